#include <gtest/gtest.h>

#include "ec_oracle.hpp"
#include "ecsap/curve_engine.hpp"
#include "ecsap/errors.hpp"

using namespace ecsap;
using namespace ecsap::curve;
using ecsap::testkit::AffinePoint;
using ecsap::testkit::BigInt;

namespace {

AffinePoint to_affine(const CurvePoint& p) {
  if (p.is_identity()) return {};
  const auto xy = p.uncompressed_xy();
  return {testkit::from_be(xy.data(), 32), testkit::from_be(xy.data() + 32, 32), false};
}

BigInt to_big(const Scalar& s) { return testkit::from_be(s.bytes().data(), 32); }

Scalar from_big(const BigInt& v) { return Scalar(testkit::to_be32(v)); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_input;
}

}  // namespace

TEST(Scalar, RejectsOrderAndAbove) {
  EXPECT_THROW(Scalar{group_order()}, Error);
  auto below = group_order();
  below[31] -= 1;
  EXPECT_NO_THROW(Scalar{below});
  EXPECT_TRUE(Scalar().is_zero());
}

TEST(Scalar, AdditionWrapsModOrder) {
  const BigInt n = testkit::secp_n();
  const Scalar a = from_big(n - 5);
  const Scalar b = from_big(BigInt(9));
  EXPECT_EQ(to_big(add(a, b)), BigInt(4));
}

TEST(SpendKeygen, InjectedSmallKeys) {
  EXPECT_EQ(spend_keypair_from(Scalar::from_u64(1)).K, CurvePoint::generator());
  EXPECT_EQ(spend_keypair_from(Scalar::from_u64(2)).K,
            add(CurvePoint::generator(), CurvePoint::generator()));
  EXPECT_THROW(spend_keypair_from(Scalar()), Error);
}

TEST(SpendKeygen, MatchesDoubleAndAddOracle) {
  SeededEntropy rng(21, "curve-test");
  for (int i = 0; i < 25; ++i) {
    const auto kp = spend_keygen(rng);
    EXPECT_FALSE(kp.k.is_zero());
    const AffinePoint expected = testkit::oracle_mul(testkit::secp_g(), to_big(kp.k));
    const AffinePoint got = to_affine(kp.K);
    EXPECT_TRUE(testkit::on_curve(got));
    EXPECT_EQ(got.x, expected.x);
    EXPECT_EQ(got.y, expected.y);
  }
}

TEST(CurvePoint, EncodingsRoundTrip) {
  SeededEntropy rng(22, "curve-test");
  const auto kp = spend_keygen(rng);
  EXPECT_EQ(CurvePoint::parse(kp.K.compressed()), kp.K);
  EXPECT_EQ(CurvePoint::from_xy(kp.K.uncompressed_xy()), kp.K);
  auto bad = kp.K.compressed();
  bad[0] = 0x05;
  EXPECT_EQ(code_of([&] { CurvePoint::parse(bad); }), Errc::invalid_point);
  EXPECT_EQ(code_of([] { CurvePoint::identity().compressed(); }), Errc::invalid_point);
}

TEST(CurvePoint, AddAndMulAgainstOracle) {
  SeededEntropy rng(23, "curve-test");
  const auto a = spend_keygen(rng);
  const auto b = spend_keygen(rng);
  const AffinePoint sum = testkit::oracle_add(to_affine(a.K), to_affine(b.K));
  EXPECT_EQ(to_affine(add(a.K, b.K)).x, sum.x);
  const AffinePoint prod = testkit::oracle_mul(to_affine(a.K), to_big(b.k));
  EXPECT_EQ(to_affine(mul(a.K, b.k)).x, prod.x);
  // P + (-P) is the identity.
  const Scalar minus_one = from_big(testkit::secp_n() - 1);
  EXPECT_TRUE(add(a.K, mul(a.K, minus_one)).is_identity());
}

TEST(XofToScalar, PinnedValues) {
  EXPECT_EQ(xof_to_scalar(Bytes(32, 0)).to_hex(),
            "49f26e04797931ffac56c22d31a65c4ae52bcba18b4cff74bc75d0e9acaa01b5");
  Bytes seq(32);
  for (int i = 0; i < 32; ++i) seq[i] = static_cast<std::uint8_t>(i);
  EXPECT_EQ(xof_to_scalar(seq).to_hex(),
            "433c7a6a9f6ac28cf7684104a1a6764e399c61b19b1cfa2443e26616112bf0f2");
}

TEST(XofToScalar, DeterministicDistinctAndReduced) {
  SeededEntropy rng(24, "curve-test");
  const BigInt n = testkit::secp_n();
  Scalar previous;
  for (int i = 0; i < 10000; ++i) {
    std::array<std::uint8_t, 32> s;
    rng.fill(s);
    const Scalar t = xof_to_scalar(s);
    ASSERT_LT(to_big(t), n);
    ASSERT_EQ(xof_to_scalar(s), t);
    ASSERT_FALSE(t == previous);
    previous = t;
  }
}

TEST(StealthDerivation, InjectedTweaks) {
  SeededEntropy rng(25, "curve-test");
  const auto kp = spend_keygen(rng);
  EXPECT_EQ(derive_stealth_pub(kp.K, Scalar()), kp.K);
  EXPECT_EQ(derive_stealth_pub(kp.K, Scalar::from_u64(1)), add(kp.K, CurvePoint::generator()));
  EXPECT_EQ(derive_stealth_priv(kp.k, Scalar()), kp.k);
  EXPECT_EQ(code_of([&] { derive_stealth_pub(CurvePoint::identity(), Scalar()); }),
            Errc::invalid_point);
}

TEST(StealthDerivation, WrapAroundNearOrder) {
  const BigInt n = testkit::secp_n();
  const Scalar k = from_big(n - 3);
  const Scalar t = Scalar::from_u64(10);
  const Scalar p = derive_stealth_priv(k, t);
  EXPECT_EQ(to_big(p), BigInt(7));
  EXPECT_EQ(mul_generator(p), derive_stealth_pub(mul_generator(k), t));
}

TEST(StealthDerivation, ZeroPrivateKeyRequiresResample) {
  const Scalar k = Scalar::from_u64(5);
  const Scalar t = from_big(testkit::secp_n() - 5);
  EXPECT_EQ(code_of([&] { derive_stealth_priv(k, t); }), Errc::resample_required);
  EXPECT_EQ(code_of([&] { derive_stealth_pub(mul_generator(k), t); }), Errc::resample_required);
}

TEST(StealthDerivation, KeyHomomorphismOverRandomPairs) {
  SeededEntropy rng(26, "curve-test");
  for (int i = 0; i < 1000; ++i) {
    const auto kp = spend_keygen(rng);
    std::array<std::uint8_t, 32> s;
    rng.fill(s);
    const kem::SharedSecret secret(s);
    const Scalar p = derive_stealth_priv(kp.k, secret);
    ASSERT_EQ(mul_generator(p), derive_stealth_pub(kp.K, secret)) << i;
  }
}

TEST(StealthDerivation, PinnedPrivateKeyAndAddress) {
  Bytes seq(32);
  for (int i = 0; i < 32; ++i) seq[i] = static_cast<std::uint8_t>(i);
  const Scalar p = derive_stealth_priv(Scalar::from_u64(0xC0FFEE), xof_to_scalar(seq));
  EXPECT_EQ(p.to_hex(), "433c7a6a9f6ac28cf7684104a1a6764e399c61b19b1cfa2443e2661611ecf0e0");
  EXPECT_EQ(address_to_string(eth_address(mul_generator(p))),
            "0xb5108c4deddfadcd5bbbbe44c6c344ae58f56579");
}

TEST(EthAddress, WellKnownGeneratorAddresses) {
  EXPECT_EQ(address_to_string(eth_address(CurvePoint::generator())),
            "0x7e5f4552091a69125d5dfcb7b8c2659029395bdf");
  EXPECT_EQ(address_to_string(eth_address(mul_generator(Scalar::from_u64(2)))),
            "0x2b5ad5c4795c026514f8317c7a215e218dccd6cf");
  EXPECT_EQ(code_of([] { eth_address(CurvePoint::identity()); }), Errc::invalid_point);
}

TEST(EthAddress, StringRoundTrip) {
  const auto a = eth_address(CurvePoint::generator());
  EXPECT_EQ(address_from_string(address_to_string(a)), a);
  EXPECT_EQ(address_from_string("7E5F4552091A69125D5DFCB7B8C2659029395BDF"), a);
  EXPECT_EQ(code_of([] { address_from_string("0x1234"); }), Errc::wrong_length);
}

TEST(Ecdh, SharedXCoordinateIsSymmetric) {
  SeededEntropy rng(27, "curve-test");
  const auto a = spend_keygen(rng);
  const auto b = spend_keygen(rng);
  EXPECT_EQ(ecdh_x(a.K, b.k), ecdh_x(b.K, a.k));
  const AffinePoint shared = testkit::oracle_mul(to_affine(a.K), to_big(b.k));
  EXPECT_EQ(testkit::from_be(ecdh_x(a.K, b.k).data(), 32), shared.x);
}
