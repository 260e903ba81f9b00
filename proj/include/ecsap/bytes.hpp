#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecsap {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Lowercase hex, no prefix.
std::string to_hex(ByteView data);

/// Accepts upper or lower case; rejects odd length and non-hex characters
/// with Errc::bad_hex. An optional "0x" prefix is not stripped here.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& data) {
  return to_hex(ByteView(data));
}

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Overwrites memory in a way the optimizer will not elide.
void secure_zero(std::span<std::uint8_t> data) noexcept;

/// Comparison whose running time does not depend on where the inputs differ.
bool constant_time_equal(ByteView a, ByteView b) noexcept;

// Little-endian integer codecs used by the on-disk formats.
inline void put_le32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_le64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint32_t get_le32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
inline std::uint64_t get_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace ecsap
