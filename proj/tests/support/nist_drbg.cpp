#include "nist_drbg.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace ecsap::testkit {

NistDrbg::NistDrbg(std::span<const std::uint8_t, 48> entropy) { update(entropy.data()); }

void NistDrbg::encrypt_block(const std::uint8_t* in, std::uint8_t* out) const {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  int len = 0;
  if (ctx == nullptr || EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), nullptr, key_.data(), nullptr) != 1 ||
      EVP_CIPHER_CTX_set_padding(ctx, 0) != 1 || EVP_EncryptUpdate(ctx, out, &len, in, 16) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    throw std::runtime_error("AES-256-ECB failed");
  }
  EVP_CIPHER_CTX_free(ctx);
}

void NistDrbg::increment_v() {
  for (int i = 15; i >= 0; --i) {
    if (++v_[i] != 0) break;
  }
}

void NistDrbg::update(const std::uint8_t* provided) {
  std::array<std::uint8_t, 48> temp;
  for (int i = 0; i < 3; ++i) {
    increment_v();
    encrypt_block(v_.data(), temp.data() + 16 * i);
  }
  if (provided != nullptr) {
    for (int i = 0; i < 48; ++i) temp[i] ^= provided[i];
  }
  std::copy(temp.begin(), temp.begin() + 32, key_.begin());
  std::copy(temp.begin() + 32, temp.end(), v_.begin());
}

void NistDrbg::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    increment_v();
    std::array<std::uint8_t, 16> block;
    encrypt_block(v_.data(), block.data());
    const std::size_t n = std::min<std::size_t>(16, out.size() - done);
    std::copy(block.begin(), block.begin() + n, out.begin() + done);
    done += n;
  }
  update(nullptr);
}

}  // namespace ecsap::testkit
