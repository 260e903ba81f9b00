#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "ecsap/bytes.hpp"
#include "ecsap/entropy.hpp"
#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"
#include "kat_file.hpp"

using namespace ecsap;

namespace {

Bytes pattern(std::size_t n) {
  Bytes m(n);
  for (std::size_t j = 0; j < n; ++j) m[j] = static_cast<std::uint8_t>((j * 7 + 3) % 256);
  return m;
}

Bytes openssl_digest(const EVP_MD* md, ByteView in, std::size_t out_len, bool xof) {
  Bytes out(out_len);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, md, nullptr);
  EVP_DigestUpdate(ctx, in.data(), in.size());
  if (xof) {
    EVP_DigestFinalXOF(ctx, out.data(), out.size());
  } else {
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, out.data(), &len);
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

}  // namespace

TEST(Keccak256, MatchesReferenceVectors) {
  std::ifstream in(testkit::data_path("keccak256_vectors.txt"));
  ASSERT_TRUE(in);
  int checked = 0;
  std::size_t len;
  std::string hex;
  while (in >> len >> hex) {
    EXPECT_EQ(to_hex(hash::keccak256(pattern(len))), hex) << "length " << len;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(Keccak256, KnownStrings) {
  EXPECT_EQ(to_hex(hash::keccak256(as_bytes("abc"))),
            "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Sha3, AgreesWithOpenSsl) {
  for (std::size_t n : {0u, 1u, 135u, 136u, 137u, 300u}) {
    const Bytes m = pattern(n);
    const auto ours = hash::sha3_256(m);
    EXPECT_EQ(Bytes(ours.begin(), ours.end()), openssl_digest(EVP_sha3_256(), m, 32, false)) << n;
  }
}

TEST(Shake256, AgreesWithOpenSslAcrossSqueezeBlocks) {
  for (std::size_t n : {0u, 32u, 136u, 200u}) {
    const Bytes m = pattern(n);
    Bytes ours(500);
    hash::shake256(m, ours);
    EXPECT_EQ(ours, openssl_digest(EVP_shake256(), m, 500, true)) << n;
  }
}

TEST(Shake256, IncrementalAbsorbAndSqueezeMatchOneShot) {
  const Bytes m = pattern(301);
  Bytes one_shot(300);
  hash::shake256(m, one_shot);

  hash::Shake256 xof;
  xof.absorb(ByteView(m).first(100)).absorb(ByteView(m).subspan(100));
  Bytes pieces(300);
  xof.squeeze(std::span(pieces).first(7));
  xof.squeeze(std::span(pieces).subspan(7, 200));
  xof.squeeze(std::span(pieces).subspan(207));
  EXPECT_EQ(pieces, one_shot);
}

TEST(Hex, RoundTripAndErrors) {
  const Bytes b = {0x00, 0xab, 0xff};
  EXPECT_EQ(to_hex(b), "00abff");
  EXPECT_EQ(from_hex("00ABff"), b);
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(SeededEntropy, DeterministicPerSeedAndDomain) {
  SeededEntropy a(7, "x"), b(7, "x"), c(8, "x"), d(7, "y");
  std::array<std::uint8_t, 64> ra, rb, rc, rd;
  a.fill(ra);
  b.fill(rb);
  c.fill(rc);
  d.fill(rd);
  EXPECT_EQ(ra, rb);
  EXPECT_NE(ra, rc);
  EXPECT_NE(ra, rd);
}

TEST(SeededEntropy, UniformStaysInRange) {
  SeededEntropy rng(1, "uniform");
  std::array<int, 5> hits{};
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.uniform(5);
    ASSERT_LT(v, 5u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 850);
}
