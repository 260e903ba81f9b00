#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <array>
#include <string>

#include "ecsap/errors.hpp"
#include "ecsap/kem_engine.hpp"
#include "kat_file.hpp"
#include "nist_drbg.hpp"

using namespace ecsap;
using namespace ecsap::kem;

namespace {

struct KatCase {
  ParameterSet ps;
  const char* file;
  std::size_t expected_vectors;
};

std::array<std::uint8_t, 48> outer_entropy() {
  std::array<std::uint8_t, 48> e;
  for (int i = 0; i < 48; ++i) e[i] = static_cast<std::uint8_t>(i);
  return e;
}

std::string sha256_hex(const std::string& s) {
  std::array<std::uint8_t, 32> d;
  unsigned int len = 0;
  EVP_Digest(s.data(), s.size(), d.data(), &len, EVP_sha256(), nullptr);
  return to_hex(d);
}

std::string upper_hex(ByteView b) {
  std::string h = to_hex(b);
  for (auto& c : h) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return h;
}

class FailingEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t>) override {
    throw Error(Errc::insufficient_entropy, "source exhausted");
  }
};

}  // namespace

class KemKat : public ::testing::TestWithParam<KatCase> {};

TEST_P(KemKat, ReproducesVectorsBitExactly) {
  const auto& c = GetParam();
  const auto vectors = testkit::read_kat_file(testkit::data_path(c.file));
  ASSERT_EQ(vectors.size(), c.expected_vectors);

  testkit::NistDrbg outer(outer_entropy());
  for (const auto& v : vectors) {
    std::array<std::uint8_t, 48> seed;
    outer.fill(seed);
    ASSERT_EQ(Bytes(seed.begin(), seed.end()), v.seed) << "count " << v.count;

    testkit::NistDrbg inner(seed);
    const auto kp = keygen(inner, c.ps);
    ASSERT_EQ(kp.public_key.bytes(), v.pk) << "count " << v.count;
    ASSERT_EQ(kp.secret_key.bytes(), v.sk) << "count " << v.count;

    const auto enc = encaps(kp.public_key, inner);
    ASSERT_EQ(enc.ciphertext.bytes(), v.ct) << "count " << v.count;
    ASSERT_EQ(Bytes(enc.shared_secret.view().begin(), enc.shared_secret.view().end()), v.ss);

    const auto dec = decaps(kp.secret_key, enc.ciphertext);
    ASSERT_TRUE(dec == enc.shared_secret) << "count " << v.count;
  }
}

INSTANTIATE_TEST_SUITE_P(AllLevels, KemKat,
                         ::testing::Values(KatCase{ParameterSet::kyber512, "kat_kyber512.rsp", 10},
                                           KatCase{ParameterSet::kyber768, "kat_kyber768.rsp", 100},
                                           KatCase{ParameterSet::kyber1024, "kat_kyber1024.rsp", 10}),
                         [](const auto& info) { return std::string(name(info.param.ps)); });

// The reference distribution publishes SHA-256 of the first vector's .rsp text.
TEST(KemKat, FirstVectorDigestMatchesReferenceDistribution) {
  const std::pair<ParameterSet, const char*> expected[] = {
      {ParameterSet::kyber512, "bb0481d3325d828817900b709d23917cefbc10026fc857f098979451f67bb0ca"},
      {ParameterSet::kyber768, "89e82a5bf2d4ddb2c6444e10409e6d9ca65dafbca67d1a0db2c9b54920a29172"},
      {ParameterSet::kyber1024, "5afcf2a568ad32d49b55105b032af1850f03f3888ff9e2a72f4059c58e968f60"},
  };
  for (const auto& [ps, digest] : expected) {
    testkit::NistDrbg outer(outer_entropy());
    std::array<std::uint8_t, 48> seed;
    outer.fill(seed);
    testkit::NistDrbg inner(seed);
    const auto kp = keygen(inner, ps);
    const auto enc = encaps(kp.public_key, inner);
    const std::string text = "count = 0\nseed = " + upper_hex(seed) +
                             "\npk = " + upper_hex(kp.public_key.bytes()) +
                             "\nsk = " + upper_hex(kp.secret_key.bytes()) +
                             "\nct = " + upper_hex(enc.ciphertext.bytes()) +
                             "\nss = " + upper_hex(enc.shared_secret.view()) + "\n";
    EXPECT_EQ(sha256_hex(text), digest) << name(ps);
  }
}

TEST(Kem, SizesPerParameterSet) {
  EXPECT_EQ(sizes(ParameterSet::kyber768).public_key, 1184u);
  EXPECT_EQ(sizes(ParameterSet::kyber768).secret_key, 2400u);
  EXPECT_EQ(sizes(ParameterSet::kyber768).ciphertext, 1088u);
  EXPECT_EQ(sizes(ParameterSet::kyber768).shared_secret, 32u);
  EXPECT_EQ(parameter_set_for_public_key(800), ParameterSet::kyber512);
  EXPECT_EQ(parameter_set_for_public_key(1568), ParameterSet::kyber1024);
  EXPECT_EQ(parameter_set_for_public_key(1000), std::nullopt);
  EXPECT_EQ(parse_parameter_set("kyber768"), ParameterSet::kyber768);
  EXPECT_EQ(parse_parameter_set("Kyber768"), std::nullopt);
}

TEST(Kem, FreshKeysAndEncapsulationsDiffer) {
  const auto a = keygen(system_entropy());
  const auto b = keygen(system_entropy());
  EXPECT_NE(a.public_key, b.public_key);

  const auto e1 = encaps(a.public_key, system_entropy());
  const auto e2 = encaps(a.public_key, system_entropy());
  EXPECT_NE(e1.ciphertext, e2.ciphertext);
  EXPECT_FALSE(e1.shared_secret == e2.shared_secret);
}

TEST(Kem, ForeignCiphertextGivesDifferentSecretWithoutError) {
  SeededEntropy rng(11, "kem-test");
  const auto alice = keygen(rng);
  const auto bob = keygen(rng);
  for (int i = 0; i < 50; ++i) {
    const auto enc = encaps(alice.public_key, rng);
    const auto wrong = decaps(bob.secret_key, enc.ciphertext);
    EXPECT_FALSE(wrong == enc.shared_secret);
    // Implicit rejection is deterministic.
    EXPECT_TRUE(decaps(bob.secret_key, enc.ciphertext) == wrong);
  }
}

TEST(Kem, TamperedCiphertextIsImplicitlyRejected) {
  SeededEntropy rng(12, "kem-test");
  const auto kp = keygen(rng);
  const auto enc = encaps(kp.public_key, rng);
  Bytes ct = enc.ciphertext.bytes();
  ct[100] ^= 0x01;
  EXPECT_FALSE(decaps(kp.secret_key, ct) == enc.shared_secret);
}

TEST(Kem, LengthAndParameterSetErrors) {
  SeededEntropy rng(13, "kem-test");
  const auto kp = keygen(rng);
  try {
    decaps(kp.secret_key, Bytes(1087));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::format_error);
  }
  const auto other = keygen(rng, ParameterSet::kyber512);
  const auto enc512 = encaps(other.public_key, rng);
  EXPECT_THROW(decaps(kp.secret_key, enc512.ciphertext), Error);
  EXPECT_THROW(PublicKey(ParameterSet::kyber768, Bytes(1183)), Error);
  EXPECT_THROW(Ciphertext(ParameterSet::kyber768, Bytes(1089)), Error);
}

TEST(Kem, MalformedPublicKeyIsRejected) {
  SeededEntropy rng(14, "kem-test");
  Bytes pk = keygen(rng).public_key.bytes();
  pk[0] = 0xff;
  pk[1] |= 0x0f;  // first coefficient becomes 0xfff >= q
  try {
    encaps(PublicKey(ParameterSet::kyber768, pk), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::encapsulation_failure);
  }
}

TEST(Kem, EntropyFailuresSurfaceAsTypedErrors) {
  FailingEntropy bad;
  try {
    keygen(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::keygen_failure);
  }
  SeededEntropy rng(15, "kem-test");
  const auto kp = keygen(rng);
  try {
    encaps(kp.public_key, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::encapsulation_failure);
  }
}

TEST(Kem, SecretKeyEmbedsPublicKey) {
  SeededEntropy rng(16, "kem-test");
  for (auto ps : {ParameterSet::kyber512, ParameterSet::kyber768, ParameterSet::kyber1024}) {
    const auto kp = keygen(rng, ps);
    EXPECT_EQ(kp.secret_key.public_key(), kp.public_key);
  }
}
