#include "ecsap/entropy.hpp"

#include <sys/random.h>

#include <cerrno>
#include <cstring>

#include "ecsap/errors.hpp"

namespace ecsap {

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = ::getrandom(out.data() + done, out.size() - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::insufficient_entropy, std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

SeededEntropy::SeededEntropy(ByteView seed, std::string_view domain) {
  Bytes label;
  put_le32(label, static_cast<std::uint32_t>(domain.size()));
  xof_.absorb(label).absorb(as_bytes(domain)).absorb(seed);
}

SeededEntropy::SeededEntropy(std::uint64_t seed, std::string_view domain) {
  Bytes label;
  put_le32(label, static_cast<std::uint32_t>(domain.size()));
  Bytes seed_bytes;
  put_le64(seed_bytes, seed);
  xof_.absorb(label).absorb(as_bytes(domain)).absorb(seed_bytes);
}

std::uint64_t SeededEntropy::uniform(std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::invalid_parameter, "uniform bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::uint8_t buf[8];
    fill(buf);
    const std::uint64_t v = get_le64(buf);
    if (v < limit) return v % bound;
  }
}

EntropySource& system_entropy() {
  static SystemEntropy instance;
  return instance;
}

}  // namespace ecsap
