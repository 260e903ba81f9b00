#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "ecsap/bytes.hpp"
#include "ecsap/hash.hpp"

namespace ecsap {

/// Source of random bytes for key generation and encapsulation. fill()
/// either writes every requested byte or throws Error(insufficient_entropy).
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Operating-system randomness (getrandom(2)).
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic stream: SHAKE-256 over a domain label and a seed. Used for
/// reproducible fixtures and benchmark workloads, never for real keys.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(ByteView seed, std::string_view domain = "ecsap.seeded");
  SeededEntropy(std::uint64_t seed, std::string_view domain);

  void fill(std::span<std::uint8_t> out) override { xof_.squeeze(out); }

  /// Uniform integer in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t uniform(std::uint64_t bound);

 private:
  hash::Shake256 xof_;
};

/// Process-wide system entropy instance.
EntropySource& system_entropy();

}  // namespace ecsap
