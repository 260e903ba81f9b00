#pragma once

// CCA-secure KEM interface backed by the round-3 Kyber reference code.
// Decapsulation of a foreign or malformed-but-well-sized ciphertext never
// fails: it returns the implicit-rejection secret, which is what allows a
// scanner to decapsulate every announcement silently.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "ecsap/bytes.hpp"
#include "ecsap/entropy.hpp"

namespace ecsap::kem {

enum class ParameterSet : std::uint8_t {
  kyber512 = 1,
  kyber768 = 2,
  kyber1024 = 3,
};

inline constexpr ParameterSet kDefaultParameterSet = ParameterSet::kyber768;

struct Sizes {
  std::size_t public_key;
  std::size_t secret_key;
  std::size_t ciphertext;
  std::size_t shared_secret;
};

Sizes sizes(ParameterSet ps);
std::string_view name(ParameterSet ps);
/// Accepts "kyber512", "kyber768", "kyber1024" (case-sensitive).
std::optional<ParameterSet> parse_parameter_set(std::string_view text);
/// Parameter set whose public key has the given length, if any.
std::optional<ParameterSet> parameter_set_for_public_key(std::size_t length);
std::optional<ParameterSet> parameter_set_for_ciphertext(std::size_t length);

class PublicKey {
 public:
  /// Throws Errc::wrong_length unless bytes.size() matches the set.
  PublicKey(ParameterSet ps, Bytes bytes);

  ParameterSet parameter_set() const noexcept { return ps_; }
  const Bytes& bytes() const noexcept { return bytes_; }

  friend bool operator==(const PublicKey&, const PublicKey&) = default;

 private:
  ParameterSet ps_;
  Bytes bytes_;
};

/// Decapsulation key material (s, the embedded public key, H(pk) and the
/// implicit-rejection seed z), in the reference byte layout. Zeroed on
/// destruction.
class SecretKey {
 public:
  SecretKey(ParameterSet ps, Bytes bytes);
  SecretKey(const SecretKey& other) = default;
  SecretKey(SecretKey&& other) noexcept = default;
  SecretKey& operator=(const SecretKey& other) = default;
  SecretKey& operator=(SecretKey&& other) noexcept = default;
  ~SecretKey();

  ParameterSet parameter_set() const noexcept { return ps_; }
  const Bytes& bytes() const noexcept { return bytes_; }
  /// The public key embedded in the secret key.
  PublicKey public_key() const;

 private:
  ParameterSet ps_;
  Bytes bytes_;
};

class Ciphertext {
 public:
  Ciphertext(ParameterSet ps, Bytes bytes);

  ParameterSet parameter_set() const noexcept { return ps_; }
  const Bytes& bytes() const noexcept { return bytes_; }

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

 private:
  ParameterSet ps_;
  Bytes bytes_;
};

/// 32-byte KEM output. Deliberately has no stream or string conversion.
class SharedSecret {
 public:
  SharedSecret() = default;
  explicit SharedSecret(const std::array<std::uint8_t, 32>& bytes) : bytes_(bytes) {}
  SharedSecret(const SharedSecret&) = default;
  SharedSecret& operator=(const SharedSecret&) = default;
  ~SharedSecret() { secure_zero(bytes_); }

  const std::array<std::uint8_t, 32>& bytes() const noexcept { return bytes_; }
  ByteView view() const noexcept { return bytes_; }

  /// Constant-time comparison.
  friend bool operator==(const SharedSecret& a, const SharedSecret& b) {
    return constant_time_equal(a.bytes_, b.bytes_);
  }

 private:
  std::array<std::uint8_t, 32> bytes_{};
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

struct Encapsulation {
  Ciphertext ciphertext;
  SharedSecret shared_secret;
};

/// True if every packed coefficient of the key is below q.
bool is_well_formed(const PublicKey& pk);

/// Draws 64 bytes from rng (32 for the CPA seed, then 32 for z), in the
/// order the reference implementation requests them. Entropy failures
/// surface as Errc::keygen_failure.
KeyPair keygen(EntropySource& rng, ParameterSet ps = kDefaultParameterSet);

/// Draws 32 bytes from rng. A public key whose encoded coefficients are not
/// reduced mod q is rejected with Errc::encapsulation_failure.
Encapsulation encaps(const PublicKey& pk, EntropySource& rng);

/// Throws Errc::format_error if ct and sk belong to different parameter
/// sets. Otherwise always returns a secret.
SharedSecret decaps(const SecretKey& sk, const Ciphertext& ct);

/// Decapsulates raw ciphertext bytes; Errc::format_error on wrong length.
SharedSecret decaps(const SecretKey& sk, ByteView ct);

}  // namespace ecsap::kem
