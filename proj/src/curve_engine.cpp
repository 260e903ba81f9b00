#include "ecsap/curve_engine.hpp"

#include <algorithm>
#include <cstring>

#include <boost/multiprecision/cpp_int.hpp>

#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"
#include "secp256k1.h"
#include "secp256k1_ecdh.h"

namespace ecsap::curve {

namespace mp = boost::multiprecision;

namespace {

constexpr std::array<std::uint8_t, 32> kOrder = {
    0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xfe,
    0xba, 0xae, 0xdc, 0xe6, 0xaf, 0x48, 0xa0, 0x3b, 0xbf, 0xd2, 0x5e, 0x8c, 0xd0, 0x36, 0x41, 0x41};

class Context {
 public:
  Context() : ctx_(secp256k1_context_create(SECP256K1_CONTEXT_NONE)) {
    std::array<std::uint8_t, 32> seed{};
    system_entropy().fill(seed);
    if (!secp256k1_context_randomize(ctx_, seed.data())) {
      throw Error(Errc::configuration, "secp256k1 context randomization failed");
    }
    secure_zero(seed);
  }
  ~Context() { secp256k1_context_destroy(ctx_); }
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  const secp256k1_context* get() const noexcept { return ctx_; }

 private:
  secp256k1_context* ctx_;
};

const secp256k1_context* ctx() {
  static const Context instance;
  return instance.get();
}

secp256k1_pubkey to_lib(const CurvePoint& p) {
  secp256k1_pubkey out;
  std::memcpy(out.data, p.raw().data(), 64);
  return out;
}

CurvePoint from_lib(const secp256k1_pubkey& pk) {
  std::array<std::uint8_t, 64> raw;
  std::memcpy(raw.data(), pk.data, 64);
  return CurvePoint(raw);
}

mp::cpp_int to_int(ByteView big_endian) {
  mp::cpp_int v;
  mp::import_bits(v, big_endian.begin(), big_endian.end(), 8, true);
  return v;
}

const mp::cpp_int& order_int() {
  static const mp::cpp_int n = to_int(kOrder);
  return n;
}

Scalar from_int(const mp::cpp_int& v) {
  std::array<std::uint8_t, 32> out{};
  Bytes tmp;
  if (v != 0) mp::export_bits(v, std::back_inserter(tmp), 8, true);
  std::copy(tmp.begin(), tmp.end(), out.end() - static_cast<std::ptrdiff_t>(tmp.size()));
  return Scalar(out);
}

void require_point(const CurvePoint& p) {
  if (p.is_identity()) throw Error(Errc::invalid_point, "point at infinity");
}

}  // namespace

Scalar::Scalar(const std::array<std::uint8_t, 32>& big_endian) : bytes_(big_endian) {
  if (!std::lexicographical_compare(bytes_.begin(), bytes_.end(), kOrder.begin(), kOrder.end())) {
    throw Error(Errc::invalid_input, "scalar is not below the group order");
  }
}

Scalar Scalar::from_bytes(ByteView big_endian) {
  if (big_endian.size() != 32) throw Error(Errc::wrong_length, "scalar must be 32 bytes");
  std::array<std::uint8_t, 32> a;
  std::copy(big_endian.begin(), big_endian.end(), a.begin());
  Scalar s(a);
  secure_zero(a);
  return s;
}

Scalar Scalar::from_u64(std::uint64_t v) {
  std::array<std::uint8_t, 32> a{};
  for (int i = 0; i < 8; ++i) a[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return Scalar(a);
}

Scalar Scalar::from_hex(std::string_view hex) {
  Bytes b = ecsap::from_hex(hex);
  Scalar s = from_bytes(b);
  secure_zero(b);
  return s;
}

bool Scalar::is_zero() const noexcept {
  std::uint8_t acc = 0;
  for (std::uint8_t b : bytes_) acc |= b;
  return acc == 0;
}

const std::array<std::uint8_t, 32>& group_order() { return kOrder; }

Scalar add(const Scalar& a, const Scalar& b) {
  return from_int((to_int(a.bytes()) + to_int(b.bytes())) % order_int());
}

CurvePoint::CurvePoint() = default;

CurvePoint CurvePoint::generator() {
  return mul_generator(Scalar::from_u64(1));
}

CurvePoint CurvePoint::parse(ByteView sec1) {
  secp256k1_pubkey pk;
  if (!secp256k1_ec_pubkey_parse(ctx(), &pk, sec1.data(), sec1.size())) {
    throw Error(Errc::invalid_point, "bytes do not encode a secp256k1 point");
  }
  return from_lib(pk);
}

CurvePoint CurvePoint::from_xy(ByteView xy) {
  if (xy.size() != 64) throw Error(Errc::wrong_length, "x || y must be 64 bytes");
  std::array<std::uint8_t, 65> sec1;
  sec1[0] = 0x04;
  std::copy(xy.begin(), xy.end(), sec1.begin() + 1);
  return parse(sec1);
}

std::array<std::uint8_t, 33> CurvePoint::compressed() const {
  require_point(*this);
  const auto pk = to_lib(*this);
  std::array<std::uint8_t, 33> out;
  std::size_t len = out.size();
  secp256k1_ec_pubkey_serialize(ctx(), out.data(), &len, &pk, SECP256K1_EC_COMPRESSED);
  return out;
}

std::array<std::uint8_t, 64> CurvePoint::uncompressed_xy() const {
  require_point(*this);
  const auto pk = to_lib(*this);
  std::array<std::uint8_t, 65> sec1;
  std::size_t len = sec1.size();
  secp256k1_ec_pubkey_serialize(ctx(), sec1.data(), &len, &pk, SECP256K1_EC_UNCOMPRESSED);
  std::array<std::uint8_t, 64> out;
  std::copy(sec1.begin() + 1, sec1.end(), out.begin());
  return out;
}

bool operator==(const CurvePoint& a, const CurvePoint& b) {
  if (a.is_identity() || b.is_identity()) return a.is_identity() == b.is_identity();
  const auto pa = to_lib(a);
  const auto pb = to_lib(b);
  return secp256k1_ec_pubkey_cmp(ctx(), &pa, &pb) == 0;
}

CurvePoint mul_generator(const Scalar& k) {
  if (k.is_zero()) return CurvePoint::identity();
  secp256k1_pubkey pk;
  if (!secp256k1_ec_pubkey_create(ctx(), &pk, k.bytes().data())) {
    throw Error(Errc::invalid_input, "scalar rejected by secp256k1");
  }
  return from_lib(pk);
}

CurvePoint mul(const CurvePoint& p, const Scalar& k) {
  if (p.is_identity() || k.is_zero()) return CurvePoint::identity();
  auto pk = to_lib(p);
  if (!secp256k1_ec_pubkey_tweak_mul(ctx(), &pk, k.bytes().data())) {
    throw Error(Errc::invalid_input, "scalar rejected by secp256k1");
  }
  return from_lib(pk);
}

CurvePoint add(const CurvePoint& a, const CurvePoint& b) {
  if (a.is_identity()) return b;
  if (b.is_identity()) return a;
  const auto pa = to_lib(a);
  const auto pb = to_lib(b);
  const secp256k1_pubkey* ins[2] = {&pa, &pb};
  secp256k1_pubkey sum;
  // Combining fails only when the sum is the point at infinity.
  if (!secp256k1_ec_pubkey_combine(ctx(), &sum, ins, 2)) return CurvePoint::identity();
  return from_lib(sum);
}

SpendKeyPair spend_keygen(EntropySource& rng) {
  std::array<std::uint8_t, 32> candidate;
  for (;;) {
    rng.fill(candidate);
    if (secp256k1_ec_seckey_verify(ctx(), candidate.data())) break;
  }
  Scalar k(candidate);
  secure_zero(candidate);
  return spend_keypair_from(k);
}

SpendKeyPair spend_keypair_from(const Scalar& k) {
  if (k.is_zero()) throw Error(Errc::invalid_input, "spending key must be non-zero");
  return {k, mul_generator(k)};
}

Scalar xof_to_scalar(const kem::SharedSecret& s) { return xof_to_scalar(s.view()); }

Scalar xof_to_scalar(ByteView secret) {
  std::array<std::uint8_t, 48> wide;
  hash::shake256(secret, wide);
  Scalar out = from_int(to_int(wide) % order_int());
  secure_zero(wide);
  return out;
}

CurvePoint derive_stealth_pub(const CurvePoint& K, const Scalar& t) {
  require_point(K);
  auto pk = to_lib(K);
  if (!secp256k1_ec_pubkey_tweak_add(ctx(), &pk, t.bytes().data())) {
    throw Error(Errc::resample_required, "stealth public key is the point at infinity");
  }
  return from_lib(pk);
}

CurvePoint derive_stealth_pub(const CurvePoint& K, const kem::SharedSecret& s) {
  return derive_stealth_pub(K, xof_to_scalar(s));
}

Scalar derive_stealth_priv(const Scalar& k, const Scalar& t) {
  if (k.is_zero()) throw Error(Errc::invalid_input, "spending key must be non-zero");
  std::array<std::uint8_t, 32> p = k.bytes();
  if (!secp256k1_ec_seckey_tweak_add(ctx(), p.data(), t.bytes().data())) {
    secure_zero(p);
    throw Error(Errc::resample_required, "stealth private key is zero");
  }
  Scalar out(p);
  secure_zero(p);
  return out;
}

Scalar derive_stealth_priv(const Scalar& k, const kem::SharedSecret& s) {
  return derive_stealth_priv(k, xof_to_scalar(s));
}

EthAddress eth_address(const CurvePoint& p) {
  if (p.is_identity()) throw Error(Errc::invalid_point, "identity has no address");
  const auto digest = hash::keccak256(p.uncompressed_xy());
  EthAddress out;
  std::copy(digest.begin() + 12, digest.end(), out.begin());
  return out;
}

std::string address_to_string(const EthAddress& a) { return "0x" + to_hex(a); }

EthAddress address_from_string(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  const Bytes b = from_hex(text);
  if (b.size() != 20) throw Error(Errc::wrong_length, "address must be 20 bytes");
  EthAddress out;
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

namespace {

int copy_x(unsigned char* output, const unsigned char* x32, const unsigned char*, void*) {
  std::memcpy(output, x32, 32);
  return 1;
}

}  // namespace

std::array<std::uint8_t, 32> ecdh_x(const CurvePoint& p, const Scalar& k) {
  require_point(p);
  const auto pk = to_lib(p);
  std::array<std::uint8_t, 32> out;
  if (!secp256k1_ecdh(ctx(), out.data(), &pk, k.bytes().data(), copy_x, nullptr)) {
    throw Error(Errc::invalid_input, "ECDH scalar rejected");
  }
  return out;
}

}  // namespace ecsap::curve
