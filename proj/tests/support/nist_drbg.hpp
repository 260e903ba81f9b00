#pragma once

// AES-256 CTR_DRBG without derivation function or personalization, as used
// by the NIST PQC known-answer test generators. Built on OpenSSL's raw AES so
// that it shares no code with the library under test.

#include <array>
#include <cstdint>
#include <span>

#include "ecsap/entropy.hpp"

namespace ecsap::testkit {

class NistDrbg final : public EntropySource {
 public:
  explicit NistDrbg(std::span<const std::uint8_t, 48> entropy);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void update(const std::uint8_t* provided);
  void encrypt_block(const std::uint8_t* in, std::uint8_t* out) const;
  void increment_v();

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 16> v_{};
};

}  // namespace ecsap::testkit
