#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "ecsap/bytes.hpp"

namespace ecsap::hash {

using Digest32 = std::array<std::uint8_t, 32>;

/// Keccak-f[1600] sponge with a configurable rate and domain padding byte.
/// Absorb any number of times, then squeeze any number of times; absorbing
/// after the first squeeze is a logic error.
class KeccakSponge {
 public:
  KeccakSponge(std::size_t rate_bytes, std::uint8_t domain_pad);

  void absorb(ByteView data);
  void squeeze(std::span<std::uint8_t> out);

 private:
  void finalize();

  std::array<std::uint64_t, 25> state_{};
  std::size_t rate_;
  std::size_t offset_ = 0;
  std::uint8_t pad_;
  bool squeezing_ = false;
};

/// SHAKE-256 extendable-output function.
class Shake256 {
 public:
  Shake256() : sponge_(136, 0x1f) {}
  explicit Shake256(ByteView input) : Shake256() { absorb(input); }

  Shake256& absorb(ByteView data) {
    sponge_.absorb(data);
    return *this;
  }
  void squeeze(std::span<std::uint8_t> out) { sponge_.squeeze(out); }

 private:
  KeccakSponge sponge_;
};

/// Original Keccak-256 (0x01 padding), as used by Ethereum.
Digest32 keccak256(ByteView data);

/// FIPS 202 SHA3-256 (0x06 padding).
Digest32 sha3_256(ByteView data);

void shake256(ByteView input, std::span<std::uint8_t> out);

}  // namespace ecsap::hash
