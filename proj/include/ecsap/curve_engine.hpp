#pragma once

// secp256k1 layer: spending keys, the XOF-to-scalar map, stealth key
// derivation and Ethereum address computation.

#include <array>
#include <cstdint>
#include <string>

#include "ecsap/bytes.hpp"
#include "ecsap/entropy.hpp"
#include "ecsap/kem_engine.hpp"

namespace ecsap::curve {

/// Integer in [0, l), l the secp256k1 group order, as 32 big-endian bytes.
class Scalar {
 public:
  Scalar() = default;
  /// Throws Errc::invalid_input if the value is not below l.
  explicit Scalar(const std::array<std::uint8_t, 32>& big_endian);
  static Scalar from_bytes(ByteView big_endian);
  static Scalar from_u64(std::uint64_t v);
  /// Big-endian hex, 64 digits, no prefix.
  static Scalar from_hex(std::string_view hex);
  Scalar(const Scalar&) = default;
  Scalar& operator=(const Scalar&) = default;
  ~Scalar() { secure_zero(bytes_); }

  const std::array<std::uint8_t, 32>& bytes() const noexcept { return bytes_; }
  bool is_zero() const noexcept;
  std::string to_hex() const { return ecsap::to_hex(bytes_); }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return constant_time_equal(a.bytes_, b.bytes_);
  }

 private:
  std::array<std::uint8_t, 32> bytes_{};
};

/// The group order l, big-endian.
const std::array<std::uint8_t, 32>& group_order();

/// (a + b) mod l.
Scalar add(const Scalar& a, const Scalar& b);

class CurvePoint {
 public:
  /// The point at infinity.
  CurvePoint();

  static CurvePoint identity() { return CurvePoint(); }
  static CurvePoint generator();
  /// 33-byte compressed or 65-byte uncompressed SEC1; Errc::invalid_point on
  /// anything that is not a curve point.
  static CurvePoint parse(ByteView sec1);
  /// 64-byte x || y without the SEC1 prefix byte.
  static CurvePoint from_xy(ByteView xy);

  bool is_identity() const noexcept { return identity_; }
  /// Errc::invalid_point for the identity, which has no SEC1 encoding here.
  std::array<std::uint8_t, 33> compressed() const;
  std::array<std::uint8_t, 64> uncompressed_xy() const;

  friend bool operator==(const CurvePoint& a, const CurvePoint& b);

  // Opaque libsecp256k1 representation; valid only when !is_identity().
  const std::array<std::uint8_t, 64>& raw() const noexcept { return raw_; }
  explicit CurvePoint(const std::array<std::uint8_t, 64>& raw) : raw_(raw), identity_(false) {}

 private:
  std::array<std::uint8_t, 64> raw_{};
  bool identity_ = true;
};

/// k * g (identity for k = 0).
CurvePoint mul_generator(const Scalar& k);
/// k * P.
CurvePoint mul(const CurvePoint& p, const Scalar& k);
CurvePoint add(const CurvePoint& a, const CurvePoint& b);

struct SpendKeyPair {
  Scalar k;
  CurvePoint K;
};

/// k uniform in [1, l) by rejection sampling, K = k * g.
SpendKeyPair spend_keygen(EntropySource& rng);
/// Keypair for an injected k; Errc::invalid_input for k = 0.
SpendKeyPair spend_keypair_from(const Scalar& k);

/// SHAKE-256(S) truncated to 48 bytes, read big-endian and reduced mod l.
Scalar xof_to_scalar(const kem::SharedSecret& s);
Scalar xof_to_scalar(ByteView secret);

/// K + t * g. Errc::invalid_point if K is the identity; Errc::resample_required
/// if the sum is the identity.
CurvePoint derive_stealth_pub(const CurvePoint& K, const Scalar& t);
CurvePoint derive_stealth_pub(const CurvePoint& K, const kem::SharedSecret& s);

/// (k + t) mod l. Errc::resample_required if the result is zero.
Scalar derive_stealth_priv(const Scalar& k, const Scalar& t);
Scalar derive_stealth_priv(const Scalar& k, const kem::SharedSecret& s);

using EthAddress = std::array<std::uint8_t, 20>;

/// Last 20 bytes of Keccak-256 over the 64-byte x || y encoding.
EthAddress eth_address(const CurvePoint& p);
/// "0x" + 40 lowercase hex digits.
std::string address_to_string(const EthAddress& a);
/// Accepts an optional "0x" prefix; Errc::bad_hex or Errc::wrong_length.
EthAddress address_from_string(std::string_view text);

/// Diffie-Hellman x-coordinate of k * P (used by the ECDH comparator).
std::array<std::uint8_t, 32> ecdh_x(const CurvePoint& p, const Scalar& k);

}  // namespace ecsap::curve
