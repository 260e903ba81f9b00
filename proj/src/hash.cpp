#include "ecsap/hash.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace ecsap::hash {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets and lane permutation for the combined rho/pi step,
// following the lane order visited by pi starting from lane 1.
constexpr std::array<int, 24> kRho = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                      27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
constexpr std::array<int, 24> kPi = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                     15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

void keccak_f1600(std::array<std::uint64_t, 25>& a) {
  for (std::uint64_t rc : kRoundConstants) {
    std::uint64_t c[5];
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      const std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
    }
    std::uint64_t carry = a[1];
    for (int i = 0; i < 24; ++i) {
      const int j = kPi[i];
      const std::uint64_t tmp = a[j];
      a[j] = std::rotl(carry, kRho[i]);
      carry = tmp;
    }
    for (int y = 0; y < 25; y += 5) {
      std::uint64_t row[5];
      for (int x = 0; x < 5; ++x) row[x] = a[y + x];
      for (int x = 0; x < 5; ++x) a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
    }
    a[0] ^= rc;
  }
}

void xor_byte(std::array<std::uint64_t, 25>& s, std::size_t pos, std::uint8_t b) {
  s[pos / 8] ^= static_cast<std::uint64_t>(b) << (8 * (pos % 8));
}

std::uint8_t get_byte(const std::array<std::uint64_t, 25>& s, std::size_t pos) {
  return static_cast<std::uint8_t>(s[pos / 8] >> (8 * (pos % 8)));
}

}  // namespace

KeccakSponge::KeccakSponge(std::size_t rate_bytes, std::uint8_t domain_pad)
    : rate_(rate_bytes), pad_(domain_pad) {
  assert(rate_bytes > 0 && rate_bytes < 200 && rate_bytes % 8 == 0);
}

void KeccakSponge::absorb(ByteView data) {
  assert(!squeezing_);
  for (std::uint8_t b : data) {
    xor_byte(state_, offset_++, b);
    if (offset_ == rate_) {
      keccak_f1600(state_);
      offset_ = 0;
    }
  }
}

void KeccakSponge::finalize() {
  xor_byte(state_, offset_, pad_);
  xor_byte(state_, rate_ - 1, 0x80);
  keccak_f1600(state_);
  offset_ = 0;
  squeezing_ = true;
}

void KeccakSponge::squeeze(std::span<std::uint8_t> out) {
  if (!squeezing_) finalize();
  for (auto& b : out) {
    if (offset_ == rate_) {
      keccak_f1600(state_);
      offset_ = 0;
    }
    b = get_byte(state_, offset_++);
  }
}

Digest32 keccak256(ByteView data) {
  KeccakSponge sponge(136, 0x01);
  sponge.absorb(data);
  Digest32 out;
  sponge.squeeze(out);
  return out;
}

Digest32 sha3_256(ByteView data) {
  KeccakSponge sponge(136, 0x06);
  sponge.absorb(data);
  Digest32 out;
  sponge.squeeze(out);
  return out;
}

void shake256(ByteView input, std::span<std::uint8_t> out) {
  Shake256 xof(input);
  xof.squeeze(out);
}

}  // namespace ecsap::hash
