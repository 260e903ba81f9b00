#include "ecsap/pairing.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <mutex>
#include <string>

#include <blst.h>

#ifdef ECSAP_HAVE_MCL
#include <mcl/bn.h>
#endif

#include "ecsap/errors.hpp"

namespace ecsap::pairing {

std::string_view name(PairingCurve curve) noexcept {
  switch (curve) {
    case PairingCurve::bls12_381:
      return "bls12_381";
    case PairingCurve::bn254:
      return "bn254";
  }
  return "unknown";
}

PairingCurve parse_curve(std::string_view text) {
  if (text == "bls12_381") return PairingCurve::bls12_381;
  if (text == "bn254") return PairingCurve::bn254;
  throw Error(Errc::invalid_parameter, "unknown pairing curve: " + std::string(text));
}

bool available(PairingCurve curve) noexcept {
#ifdef ECSAP_HAVE_MCL
  (void)curve;
  return true;
#else
  return curve == PairingCurve::bls12_381;
#endif
}

std::vector<PairingCurve> available_curves() {
  std::vector<PairingCurve> out;
  for (auto c : {PairingCurve::bls12_381, PairingCurve::bn254})
    if (available(c)) out.push_back(c);
  return out;
}

namespace {

void require_size(ByteView b, std::size_t n, const char* what) {
  if (b.size() != n)
    throw Error(Errc::wrong_length, std::string(what) + ": expected " + std::to_string(n) +
                                        " bytes, got " + std::to_string(b.size()));
}

// ---- BLS12-381 via blst ----

constexpr std::size_t kBlsFp = 48;

blst_scalar bls_scalar(ByteView scalar) {
  require_size(scalar, 32, "scalar");
  blst_scalar s;
  blst_scalar_from_be_bytes(&s, scalar.data(), scalar.size());
  return s;
}

blst_p1 bls_g1_decode(ByteView point) {
  require_size(point, 2 * kBlsFp, "G1 point");
  blst_p1_affine a;
  if (blst_p1_deserialize(&a, point.data()) != BLST_SUCCESS)
    throw Error(Errc::invalid_point, "not a BLS12-381 G1 point");
  blst_p1 p;
  blst_p1_from_affine(&p, &a);
  return p;
}

Bytes bls_g1_encode(const blst_p1& p) {
  Bytes out(2 * kBlsFp);
  blst_p1_serialize(out.data(), &p);
  return out;
}

struct BlsPrepared final : PreparedG2 {
  std::array<blst_fp6, 68> lines;
};

class BlsEngine final : public PairingEngine {
 public:
  PairingCurve curve() const noexcept override { return PairingCurve::bls12_381; }
  std::size_t g1_size() const noexcept override { return 2 * kBlsFp; }

  Bytes g1_generator() const override { return bls_g1_encode(*blst_p1_generator()); }

  Bytes g1_mul_generator(ByteView scalar) const override {
    return mul(*blst_p1_generator(), scalar);
  }

  Bytes g1_mul(ByteView point, ByteView scalar) const override {
    return mul(bls_g1_decode(point), scalar);
  }

  Bytes g1_add(ByteView a, ByteView b) const override {
    blst_p1 pa = bls_g1_decode(a), pb = bls_g1_decode(b), r;
    blst_p1_add_or_double(&r, &pa, &pb);
    return bls_g1_encode(r);
  }

  Bytes g2_mul_generator(ByteView scalar) const override {
    blst_scalar s = bls_scalar(scalar);
    blst_p2 r;
    blst_p2_mult(&r, blst_p2_generator(), s.b, 255);
    Bytes out(192);
    blst_p2_serialize(out.data(), &r);
    return out;
  }

  std::unique_ptr<PreparedG2> prepare_g2(ByteView point) const override {
    require_size(point, 192, "G2 point");
    blst_p2_affine q;
    if (blst_p2_deserialize(&q, point.data()) != BLST_SUCCESS)
      throw Error(Errc::invalid_point, "not a BLS12-381 G2 point");
    auto prepared = std::make_unique<BlsPrepared>();
    blst_precompute_lines(prepared->lines.data(), &q);
    return prepared;
  }

  Bytes pair(ByteView p, const PreparedG2& q) const override {
    require_size(p, 2 * kBlsFp, "G1 point");
    blst_p1_affine a;
    if (blst_p1_deserialize(&a, p.data()) != BLST_SUCCESS || blst_p1_affine_is_inf(&a))
      throw Error(Errc::invalid_point, "not a non-identity BLS12-381 G1 point");
    const auto* prepared = dynamic_cast<const BlsPrepared*>(&q);
    if (prepared == nullptr) throw Error(Errc::invalid_parameter, "G2 prepared by another engine");
    blst_fp12 f;
    blst_miller_loop_lines(&f, prepared->lines.data(), &a);
    blst_final_exp(&f, &f);
    Bytes out(12 * kBlsFp);
    const auto* coeffs = reinterpret_cast<const blst_fp*>(&f);
    for (std::size_t i = 0; i < 12; ++i) blst_bendian_from_fp(out.data() + i * kBlsFp, &coeffs[i]);
    return out;
  }

 private:
  static Bytes mul(const blst_p1& base, ByteView scalar) {
    blst_scalar s = bls_scalar(scalar);
    blst_p1 r;
    blst_p1_mult(&r, &base, s.b, 255);
    return bls_g1_encode(r);
  }
};

#ifdef ECSAP_HAVE_MCL

// ---- BN254 (the Ethereum alt_bn128 curve) via mcl ----

constexpr std::size_t kBnFp = 32;

// Ethereum's G2 generator, x = x0 + x1*i.
constexpr const char* kBnG2Generator =
    "1 "
    "10857046999023057135944570762232829481370756359578518086990519993285655852781 "
    "11559732032986387107991004021392285783925812861821192530917403151452391805634 "
    "8495653923123431417604973247489272438418190587263600148770280649306958101930 "
    "4082367875863433681332203403145435568316851327593401208105741076214120093531";

void mcl_init() {
  static std::once_flag once;
  static int status = -1;
  std::call_once(once, [] { status = mclBn_init(MCL_BN_SNARK1, MCLBN_COMPILED_TIME_VAR); });
  if (status != 0) throw Error(Errc::configuration, "mcl initialisation failed");
}

void fp_to_be(std::uint8_t* out, const mclBnFp& x) {
  if (mclBnFp_serialize(out, kBnFp, &x) != kBnFp)
    throw Error(Errc::invalid_point, "BN254 field element encoding failed");
  std::reverse(out, out + kBnFp);
}

bool fp_from_be(mclBnFp& x, const std::uint8_t* in) {
  std::array<std::uint8_t, kBnFp> le;
  std::reverse_copy(in, in + kBnFp, le.begin());
  return mclBnFp_deserialize(&x, le.data(), kBnFp) == kBnFp;
}

mclBnFr bn_scalar(ByteView scalar) {
  require_size(scalar, 32, "scalar");
  mclBnFr s;
  if (mclBnFr_setBigEndianMod(&s, scalar.data(), scalar.size()) != 0)
    throw Error(Errc::invalid_input, "scalar decoding failed");
  return s;
}

// The identity is encoded as all zeros; (0, 0) is not on y^2 = x^3 + 3.
mclBnG1 bn_g1_decode(ByteView point) {
  require_size(point, 2 * kBnFp, "G1 point");
  mclBnG1 p;
  if (std::all_of(point.begin(), point.end(), [](std::uint8_t b) { return b == 0; })) {
    mclBnG1_clear(&p);
    return p;
  }
  if (!fp_from_be(p.x, point.data()) || !fp_from_be(p.y, point.data() + kBnFp))
    throw Error(Errc::invalid_point, "BN254 coordinate out of range");
  mclBnFp_setInt(&p.z, 1);
  if (!mclBnG1_isValid(&p)) throw Error(Errc::invalid_point, "not a BN254 G1 point");
  return p;
}

Bytes bn_g1_encode(const mclBnG1& p) {
  Bytes out(2 * kBnFp, 0);
  if (mclBnG1_isZero(&p)) return out;
  mclBnG1 n;
  mclBnG1_normalize(&n, &p);
  fp_to_be(out.data(), n.x);
  fp_to_be(out.data() + kBnFp, n.y);
  return out;
}

mclBnG1 bn_g1_generator() {
  mclBnG1 g;
  const char text[] = "1 1 2";
  if (mclBnG1_setStr(&g, text, sizeof(text) - 1, 10) != 0)
    throw Error(Errc::configuration, "BN254 G1 generator rejected");
  return g;
}

mclBnG2 bn_g2_generator() {
  mclBnG2 g;
  if (mclBnG2_setStr(&g, kBnG2Generator, std::strlen(kBnG2Generator), 10) != 0)
    throw Error(Errc::configuration, "BN254 G2 generator rejected");
  return g;
}

struct BnPrepared final : PreparedG2 {
  std::vector<std::uint64_t> lines;
};

class BnEngine final : public PairingEngine {
 public:
  BnEngine() {
    mcl_init();
    g1_ = bn_g1_generator();
    g2_ = bn_g2_generator();
  }

  PairingCurve curve() const noexcept override { return PairingCurve::bn254; }
  std::size_t g1_size() const noexcept override { return 2 * kBnFp; }

  Bytes g1_generator() const override { return bn_g1_encode(g1_); }

  Bytes g1_mul_generator(ByteView scalar) const override { return mul(g1_, scalar); }

  Bytes g1_mul(ByteView point, ByteView scalar) const override {
    return mul(bn_g1_decode(point), scalar);
  }

  Bytes g1_add(ByteView a, ByteView b) const override {
    mclBnG1 pa = bn_g1_decode(a), pb = bn_g1_decode(b), r;
    mclBnG1_add(&r, &pa, &pb);
    return bn_g1_encode(r);
  }

  Bytes g2_mul_generator(ByteView scalar) const override {
    mclBnFr s = bn_scalar(scalar);
    mclBnG2 r;
    mclBnG2_mul(&r, &g2_, &s);
    Bytes out(4 * kBnFp);
    std::size_t n = mclBnG2_serialize(out.data(), out.size(), &r);
    if (n == 0) throw Error(Errc::invalid_point, "BN254 G2 encoding failed");
    out.resize(n);
    return out;
  }

  std::unique_ptr<PreparedG2> prepare_g2(ByteView point) const override {
    mclBnG2 q;
    if (point.empty() || mclBnG2_deserialize(&q, point.data(), point.size()) != point.size() ||
        mclBnG2_isZero(&q))
      throw Error(Errc::invalid_point, "not a non-identity BN254 G2 point");
    auto prepared = std::make_unique<BnPrepared>();
    prepared->lines.resize(static_cast<std::size_t>(mclBn_getUint64NumToPrecompute()));
    mclBn_precomputeG2(prepared->lines.data(), &q);
    return prepared;
  }

  Bytes pair(ByteView p, const PreparedG2& q) const override {
    mclBnG1 a = bn_g1_decode(p);
    if (mclBnG1_isZero(&a)) throw Error(Errc::invalid_point, "identity G1 point");
    const auto* prepared = dynamic_cast<const BnPrepared*>(&q);
    if (prepared == nullptr) throw Error(Errc::invalid_parameter, "G2 prepared by another engine");
    mclBnGT f;
    mclBn_precomputedMillerLoop(&f, &a, prepared->lines.data());
    mclBn_finalExp(&f, &f);
    Bytes out(12 * kBnFp);
    for (std::size_t i = 0; i < 12; ++i) fp_to_be(out.data() + i * kBnFp, f.d[i]);
    return out;
  }

 private:
  static Bytes mul(const mclBnG1& base, ByteView scalar) {
    mclBnFr s = bn_scalar(scalar);
    mclBnG1 r;
    mclBnG1_mul(&r, &base, &s);
    return bn_g1_encode(r);
  }

  mclBnG1 g1_;
  mclBnG2 g2_;
};

#endif

}  // namespace

std::unique_ptr<PairingEngine> make_engine(PairingCurve curve) {
  switch (curve) {
    case PairingCurve::bls12_381:
      return std::make_unique<BlsEngine>();
    case PairingCurve::bn254:
#ifdef ECSAP_HAVE_MCL
      return std::make_unique<BnEngine>();
#else
      break;
#endif
  }
  throw Error(Errc::invalid_parameter,
              "pairing curve not available in this build: " + std::string(name(curve)));
}

}  // namespace ecsap::pairing
