#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "ecsap/errors.hpp"
#include "ecsap/pairing.hpp"

namespace {

using ecsap::Bytes;
using ecsap::Errc;
using ecsap::Error;
using ecsap::to_hex;
using ecsap::pairing::PairingCurve;
using boost::multiprecision::cpp_int;

Bytes scalar_be(const cpp_int& v) {
  Bytes out(32, 0);
  cpp_int x = v;
  for (int i = 31; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x & 0xff);
    x >>= 8;
  }
  return out;
}

struct Pin {
  const char* scalar;
  const char* g1;
};

struct CurveCase {
  PairingCurve curve;
  const char* order;
  std::vector<Pin> pins;
};

// Reference multiples from tests/oracles/pairing_pins.py (py_ecc).
const CurveCase kBn254{
    PairingCurve::bn254,
    "0x30644e72e131a029b85045b68181585d2833e84879b9709143e1f593f0000001",
    {{"0x1",
      "0000000000000000000000000000000000000000000000000000000000000001"
      "0000000000000000000000000000000000000000000000000000000000000002"},
     {"0x2",
      "030644e72e131a029b85045b68181585d97816a916871ca8d3c208c16d87cfd3"
      "15ed738c0e0a7c92e7845f96b2ae9c0a68a6a449e3538fc7ff3ebf7a5a18a2c4"},
     {"0xc0ffee",
      "050325d038bf285c5496dcff726bb9bad5eee8fcb6d8aa79517f2b2e65a91420"
      "2ec2e847e57b2b99bff9e96e77653a7045903b71f19db32b0e906b3719b13dc8"},
     {"0x30644e72e131a029b85045b68181585d2833e84879b9709143e1f593f0000000",
      "0000000000000000000000000000000000000000000000000000000000000001"
      "30644e72e131a029b85045b68181585d97816a916871ca8d3c208c16d87cfd45"}}};

const CurveCase kBls12_381{
    PairingCurve::bls12_381,
    "0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001",
    {{"0x1",
      "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac586c55e83ff97a1aeffb3af00adb22c6bb"
      "08b3f481e3aaa0f1a09e30ed741d8ae4fcf5e095d5d00af600db18cb2c04b3edd03cc744a2888ae40caa232946c5e7e1"},
     {"0x2",
      "0572cbea904d67468808c8eb50a9450c9721db309128012543902d0ac358a62ae28f75bb8f1c7c42c39a8c5529bf0f4e"
      "166a9d8cabc673a322fda673779d8e3822ba3ecb8670e461f73bb9021d5fd76a4c56d9d4cd16bd1bba86881979749d28"},
     {"0xc0ffee",
      "04ab31668afb74bfbb84fbc4602c783fd13fc95b20daa51cd45c0b9b82296c60217516d0e959cf91462b0068ff13e37e"
      "0fa6ffcfdfec5259fb7b7c46ea447b793035e023f6fe0dd5c5f9ff2204e84fbc58501257f4ea9827373a0764770438a8"},
     {"0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000000",
      "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac586c55e83ff97a1aeffb3af00adb22c6bb"
      "114d1d6855d545a8aa7d76c8cf2e21f267816aef1db507c96655b9d5caac42364e6f38ba0ecb751bad54dcd6b939c2ca"}}};

class PairingTest : public ::testing::TestWithParam<CurveCase> {
 protected:
  void SetUp() override {
    if (!ecsap::pairing::available(GetParam().curve)) GTEST_SKIP() << "backend not built";
    engine_ = ecsap::pairing::make_engine(GetParam().curve);
  }
  std::unique_ptr<ecsap::pairing::PairingEngine> engine_;
};

TEST_P(PairingTest, GeneratorMultiplesMatchReference) {
  for (const Pin& pin : GetParam().pins) {
    Bytes s = scalar_be(cpp_int(pin.scalar));
    EXPECT_EQ(to_hex(engine_->g1_mul_generator(s)), pin.g1) << pin.scalar;
    EXPECT_EQ(to_hex(engine_->g1_mul(engine_->g1_generator(), s)), pin.g1) << pin.scalar;
  }
  EXPECT_EQ(engine_->g1_generator().size(), engine_->g1_size());
}

TEST_P(PairingTest, GroupLaw) {
  Bytes g = engine_->g1_generator();
  EXPECT_EQ(engine_->g1_add(g, g), engine_->g1_mul_generator(scalar_be(2)));
  Bytes a = engine_->g1_mul_generator(scalar_be(1234567));
  Bytes b = engine_->g1_mul_generator(scalar_be(7654321));
  EXPECT_EQ(engine_->g1_add(a, b), engine_->g1_mul_generator(scalar_be(1234567 + 7654321)));
  EXPECT_EQ(engine_->g1_add(a, b), engine_->g1_add(b, a));
  // Scalars are reduced mod r.
  cpp_int r(GetParam().order);
  EXPECT_EQ(engine_->g1_mul_generator(scalar_be(r + 5)), engine_->g1_mul_generator(scalar_be(5)));
}

TEST_P(PairingTest, Bilinear) {
  Bytes q = engine_->g2_mul_generator(scalar_be(1));
  auto prepared_q = engine_->prepare_g2(q);
  auto prepared_5q = engine_->prepare_g2(engine_->g2_mul_generator(scalar_be(5)));

  Bytes p3 = engine_->g1_mul_generator(scalar_be(3));
  Bytes p15 = engine_->g1_mul_generator(scalar_be(15));
  EXPECT_EQ(engine_->pair(p3, *prepared_5q), engine_->pair(p15, *prepared_q));
  EXPECT_NE(engine_->pair(p3, *prepared_q), engine_->pair(p15, *prepared_q));

  // Non-degenerate.
  Bytes e = engine_->pair(engine_->g1_generator(), *prepared_q);
  Bytes one(e.size(), 0);
  one[engine_->g1_size() / 2 - 1] = 1;
  EXPECT_NE(e, one);
  cpp_int r(GetParam().order);
  Bytes pm1 = engine_->g1_mul_generator(scalar_be(r - 1));
  // e(-P, Q) differs from e(P, Q); e(-P, -Q) equals it.
  auto prepared_neg = engine_->prepare_g2(engine_->g2_mul_generator(scalar_be(r - 1)));
  EXPECT_NE(engine_->pair(pm1, *prepared_q), e);
  EXPECT_EQ(engine_->pair(pm1, *prepared_neg), e);
}

TEST_P(PairingTest, RejectsBadInputs) {
  auto prepared = engine_->prepare_g2(engine_->g2_mul_generator(scalar_be(1)));
  Bytes g = engine_->g1_generator();

  Bytes off_curve = g;
  off_curve.back() ^= 1;
  EXPECT_THROW(engine_->pair(off_curve, *prepared), Error);
  EXPECT_THROW(engine_->g1_add(off_curve, g), Error);

  cpp_int r(GetParam().order);
  Bytes identity = engine_->g1_mul_generator(scalar_be(r));
  try {
    engine_->pair(identity, *prepared);
    FAIL() << "identity accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_point);
  }

  Bytes short_point(g.begin(), g.end() - 1);
  EXPECT_THROW(engine_->pair(short_point, *prepared), Error);
  EXPECT_THROW(engine_->g1_mul_generator(Bytes(31, 1)), Error);
  EXPECT_THROW(engine_->prepare_g2(Bytes(3, 0)), Error);
}

INSTANTIATE_TEST_SUITE_P(Curves, PairingTest, ::testing::Values(kBls12_381, kBn254),
                         [](const auto& info) {
                           return std::string(ecsap::pairing::name(info.param.curve));
                         });

TEST(PairingNames, RoundTrip) {
  for (auto c : {PairingCurve::bls12_381, PairingCurve::bn254})
    EXPECT_EQ(ecsap::pairing::parse_curve(ecsap::pairing::name(c)), c);
  EXPECT_THROW(ecsap::pairing::parse_curve("BN254"), Error);
  EXPECT_FALSE(ecsap::pairing::available_curves().empty());
}

TEST(PairingEngines, PreparedPointsDoNotCrossEngines) {
  if (!ecsap::pairing::available(PairingCurve::bn254)) GTEST_SKIP();
  auto bls = ecsap::pairing::make_engine(PairingCurve::bls12_381);
  auto bn = ecsap::pairing::make_engine(PairingCurve::bn254);
  auto prepared = bn->prepare_g2(bn->g2_mul_generator(scalar_be(1)));
  EXPECT_THROW(bls->pair(bls->g1_generator(), *prepared), Error);
}

}  // namespace
