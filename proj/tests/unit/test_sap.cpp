#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"
#include "ecsap/sap_core.hpp"

using namespace ecsap;
using namespace ecsap::sap;

namespace {

kem::SharedSecret secret_from(std::initializer_list<int> prefix) {
  std::array<std::uint8_t, 32> s{};
  std::size_t i = 0;
  for (int v : prefix) s[i++] = static_cast<std::uint8_t>(v);
  return kem::SharedSecret(s);
}

kem::SharedSecret sequential_secret() {
  std::array<std::uint8_t, 32> s;
  for (int i = 0; i < 32; ++i) s[i] = static_cast<std::uint8_t>(i);
  return kem::SharedSecret(s);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_input;
}

std::string sha256_hex(std::string_view s) {
  std::array<std::uint8_t, 32> d;
  unsigned int len = 0;
  EVP_Digest(s.data(), s.size(), d.data(), &len, EVP_sha256(), nullptr);
  return to_hex(d);
}

std::vector<Announcement> with_sequence(std::vector<Announcement> anns) {
  for (std::size_t i = 0; i < anns.size(); ++i) anns[i].sequence_no = i;
  return anns;
}

}  // namespace

TEST(RecipientSetup, MetaAddressMirrorsBundle) {
  SeededEntropy rng(1, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  EXPECT_EQ(meta.spend_pub, keys.spend_pub);
  EXPECT_EQ(meta.view_pub, keys.view_pub);
  EXPECT_EQ(curve::mul_generator(keys.spend_priv), keys.spend_pub);
  EXPECT_EQ(keys.view_priv.public_key(), keys.view_pub);

  const auto [keys2, meta2] = recipient_setup(rng);
  EXPECT_NE(encode_meta(meta), encode_meta(meta2));
}

TEST(RecipientSetup, SeededBundleIsPinned) {
  SeededEntropy rng(42, "fixture");
  const auto [keys, meta] = recipient_setup(rng);
  EXPECT_EQ(to_hex(meta.spend_pub.compressed()),
            "038579eb208215f5c383ae2e151402856f0144e51e87843104b6ad0a931c550219");
  EXPECT_EQ(sha256_hex(encode_meta(meta)),
            "b795b6e18d1de81bf0409c6356365c47810e39be440e6dbe47b1396212205654");
}

TEST(ViewTag, PinnedAndPrefixProperty) {
  EXPECT_EQ(to_hex(compute_view_tag(secret_from({}), 4)), "290decd9");
  EXPECT_EQ(to_hex(compute_view_tag(sequential_secret(), 1)), "8a");
  const auto s = sequential_secret();
  const Bytes one = compute_view_tag(s, 1);
  const Bytes two = compute_view_tag(s, 2);
  EXPECT_TRUE(std::equal(one.begin(), one.end(), two.begin()));
  EXPECT_EQ(compute_view_tag(s, 32).size(), 32u);
  EXPECT_EQ(code_of([&] { compute_view_tag(s, 0); }), Errc::invalid_parameter);
  EXPECT_EQ(code_of([&] { compute_view_tag(s, 33); }), Errc::invalid_parameter);
}

TEST(ViewTag, OneByteCollisionRateIsOneIn256) {
  SeededEntropy rng(2, "sap-test");
  const int pairs = 1000000;
  int collisions = 0;
  for (int i = 0; i < pairs; ++i) {
    std::array<std::uint8_t, 64> buf;
    rng.fill(buf);
    const auto a = hash::keccak256(ByteView(buf).first(32));
    const auto b = hash::keccak256(ByteView(buf).subspan(32));
    collisions += a[0] == b[0];
  }
  const double mean = pairs / 256.0;
  const double sigma = std::sqrt(pairs * (1.0 / 256) * (255.0 / 256));
  EXPECT_NEAR(collisions, mean, 5 * sigma);
}

TEST(SendScan, SingleRoundTrip) {
  SeededEntropy rng(3, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  const auto out = send(meta, 1, rng);
  EXPECT_EQ(out.stealth_address, curve::eth_address(out.stealth_pub));
  EXPECT_EQ(out.announcement.stealth_address, out.stealth_address);

  auto ann = out.announcement;
  ann.sequence_no = 7;
  const auto report = scan(keys, std::span(&ann, 1));
  ASSERT_EQ(report.matches.size(), 1u);
  EXPECT_EQ(report.matches[0].sequence_no, 7u);
  EXPECT_EQ(report.matches[0].stealth_address, out.stealth_address);
  EXPECT_EQ(curve::eth_address(curve::mul_generator(report.matches[0].stealth_priv)),
            out.stealth_address);
  EXPECT_EQ(report.view_tag_passes, 1u);
  EXPECT_EQ(report.decapsulations, 1u);
}

TEST(SendScan, RepeatedSendsAreUnlinkable) {
  SeededEntropy rng(4, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  std::vector<curve::EthAddress> addresses;
  std::vector<Bytes> cts;
  for (int i = 0; i < 40; ++i) {
    const auto out = send(meta, 2, rng);
    addresses.push_back(out.stealth_address);
    cts.push_back(out.announcement.ephemeral_ct);
  }
  std::sort(addresses.begin(), addresses.end());
  std::sort(cts.begin(), cts.end());
  EXPECT_EQ(std::adjacent_find(addresses.begin(), addresses.end()), addresses.end());
  EXPECT_EQ(std::adjacent_find(cts.begin(), cts.end()), cts.end());
}

TEST(SendScan, OtherRecipientFindsNothing) {
  SeededEntropy rng(5, "sap-test");
  const auto [alice, alice_meta] = recipient_setup(rng);
  const auto [bob, bob_meta] = recipient_setup(rng);
  std::vector<Announcement> anns;
  for (int i = 0; i < 20; ++i) anns.push_back(send(alice_meta, 1, rng).announcement);
  anns = with_sequence(std::move(anns));
  EXPECT_TRUE(scan(bob, anns).matches.empty());
  EXPECT_EQ(scan(alice, anns).matches.size(), 20u);
}

TEST(SendScan, EmptyRegistry) {
  SeededEntropy rng(6, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  const auto report = scan(keys, {});
  EXPECT_TRUE(report.matches.empty());
  EXPECT_EQ(report.announcements_scanned, 0u);
  EXPECT_EQ(report.view_tag_passes, 0u);
}

class PlantedRegistry : public ::testing::Test {
 protected:
  void SetUp() override {
    SeededEntropy rng(7, "sap-test");
    auto [k, m] = recipient_setup(rng);
    keys_.emplace(std::move(k));
    std::vector<StealthMetaAddress> foreign;
    for (int i = 0; i < 4; ++i) foreign.push_back(recipient_setup(rng).second);
    const std::vector<std::size_t> planted = {17, 500, 998};
    for (std::size_t i = 0; i < 1000; ++i) {
      const bool mine = std::find(planted.begin(), planted.end(), i) != planted.end();
      auto out = send(mine ? m : foreign[i % foreign.size()], 1, rng);
      if (mine) expected_[i] = out.stealth_address;
      anns_.push_back(std::move(out.announcement));
    }
    anns_ = with_sequence(std::move(anns_));
  }

  std::optional<RecipientKeys> keys_;
  std::vector<Announcement> anns_;
  std::map<std::uint64_t, curve::EthAddress> expected_;
};

TEST_F(PlantedRegistry, FindsExactlyThePlantedPayments) {
  const auto report = scan(*keys_, anns_);
  ASSERT_EQ(report.matches.size(), 3u);
  for (const auto& m : report.matches) {
    ASSERT_TRUE(expected_.count(m.sequence_no));
    EXPECT_EQ(m.stealth_address, expected_[m.sequence_no]);
    EXPECT_EQ(curve::eth_address(curve::mul_generator(m.stealth_priv)), m.stealth_address);
  }
  EXPECT_GE(report.view_tag_passes, report.matches.size());
  EXPECT_EQ(report.view_tag_passes, report.matches.size() + report.address_mismatches);
  EXPECT_EQ(report.decapsulations, 1000u);
}

TEST_F(PlantedRegistry, ParallelScanMatchesSequential) {
  const auto sequential = scan(*keys_, anns_);
  for (std::size_t workers : {2u, 3u, 8u}) {
    const auto parallel = scan(*keys_, anns_, {1, workers});
    ASSERT_EQ(parallel.matches.size(), sequential.matches.size());
    for (std::size_t i = 0; i < parallel.matches.size(); ++i) {
      EXPECT_EQ(parallel.matches[i].sequence_no, sequential.matches[i].sequence_no);
      EXPECT_EQ(parallel.matches[i].stealth_priv, sequential.matches[i].stealth_priv);
    }
    EXPECT_EQ(parallel.view_tag_passes, sequential.view_tag_passes);
    EXPECT_EQ(parallel.announcements_scanned, sequential.announcements_scanned);
  }
}

TEST_F(PlantedRegistry, PermutationPermutesMatchesOnly) {
  auto shuffled = anns_;
  std::mt19937 gen(99);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  auto a = scan(*keys_, anns_).matches;
  auto b = scan(*keys_, shuffled).matches;
  auto by_seq = [](const Match& x, const Match& y) { return x.sequence_no < y.sequence_no; };
  std::sort(a.begin(), a.end(), by_seq);
  std::sort(b.begin(), b.end(), by_seq);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sequence_no, b[i].sequence_no);
    EXPECT_EQ(a[i].stealth_address, b[i].stealth_address);
    EXPECT_EQ(a[i].stealth_priv, b[i].stealth_priv);
  }
}

TEST(SendScan, TagOnlyCollisionIsFiltered) {
  SeededEntropy rng(8, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  auto ann = send(meta, 1, rng).announcement;
  ann.stealth_address[0] ^= 0xff;  // the tag still matches, the address does not
  const auto report = scan(keys, std::span(&ann, 1));
  EXPECT_TRUE(report.matches.empty());
  EXPECT_EQ(report.view_tag_passes, 1u);
  EXPECT_EQ(report.address_mismatches, 1u);
}

TEST(SendScan, MalformedAnnouncementsAreSkipped) {
  SeededEntropy rng(9, "sap-test");
  const auto [keys, meta] = recipient_setup(rng);
  std::vector<Announcement> anns;
  anns.push_back(send(meta, 1, rng).announcement);
  auto short_ct = anns[0];
  short_ct.ephemeral_ct.pop_back();
  auto long_tag = anns[0];
  long_tag.view_tag.push_back(0);
  auto other_kem = anns[0];
  other_kem.kem = kem::ParameterSet::kyber512;
  anns.push_back(short_ct);
  anns.push_back(long_tag);
  anns.push_back(other_kem);
  anns.push_back(send(meta, 1, rng).announcement);
  anns = with_sequence(std::move(anns));

  const auto report = scan(keys, anns);
  EXPECT_EQ(report.malformed_skipped, 3u);
  EXPECT_EQ(report.announcements_scanned, 5u);
  ASSERT_EQ(report.matches.size(), 2u);
  EXPECT_EQ(report.matches[0].sequence_no, 0u);
  EXPECT_EQ(report.matches[1].sequence_no, 4u);
}

TEST(SendScan, WorksForEveryParameterSet) {
  SeededEntropy rng(10, "sap-test");
  for (auto ps : {kem::ParameterSet::kyber512, kem::ParameterSet::kyber1024}) {
    const auto [keys, meta] = recipient_setup(rng, ps);
    auto ann = send(meta, 3, rng).announcement;
    EXPECT_EQ(scan(keys, std::span(&ann, 1), {3, 1}).matches.size(), 1u);
    EXPECT_EQ(decode_meta(encode_meta(meta)), meta);
  }
}

TEST(MetaEncoding, RoundTripAndErrors) {
  SeededEntropy rng(11, "sap-test");
  for (int i = 0; i < 5; ++i) {
    const auto meta = recipient_setup(rng).second;
    const std::string text = encode_meta(meta);
    EXPECT_EQ(text.size(), 9u + 2 * (33 + 1184));
    EXPECT_EQ(decode_meta(text), meta);
  }
  const std::string good = encode_meta(recipient_setup(rng).second);
  EXPECT_EQ(code_of([&] { decode_meta("st:btc:0x" + good.substr(9)); }), Errc::bad_prefix);
  EXPECT_EQ(code_of([&] { decode_meta(good.substr(0, good.size() - 2)); }), Errc::wrong_length);
  EXPECT_EQ(code_of([&] { decode_meta(good.substr(0, good.size() - 1)); }), Errc::bad_hex);
  std::string bad_hex = good;
  bad_hex[20] = 'g';
  EXPECT_EQ(code_of([&] { decode_meta(bad_hex); }), Errc::bad_hex);

  std::string bad_point = good;
  bad_point[9] = '0';
  bad_point[10] = '5';  // SEC1 prefix 0x05 does not exist
  EXPECT_EQ(code_of([&] { decode_meta(bad_point); }), Errc::invalid_point);

  // x = 5 has no square root of x^3 + 7 on secp256k1.
  std::string off_curve = good;
  off_curve.replace(11, 64, std::string(63, '0') + "5");
  EXPECT_EQ(code_of([&] { decode_meta(off_curve); }), Errc::invalid_point);

  std::string bad_view = good;
  bad_view.replace(9 + 66, 4, "ffff");
  EXPECT_EQ(code_of([&] { decode_meta(bad_view); }), Errc::invalid_point);
}

TEST(AnnouncementRecord, RoundTripAndValidation) {
  SeededEntropy rng(12, "sap-test");
  const auto meta = recipient_setup(rng).second;
  auto ann = send(meta, 2, rng).announcement;
  ann.sequence_no = 41;
  const Bytes rec = encode_announcement(ann);
  EXPECT_EQ(rec.size(), 4u + 1088 + 2 + 20);
  EXPECT_EQ(rec[0], 2);
  EXPECT_EQ(rec[1], 2);
  EXPECT_EQ(decode_announcement(rec, 41), ann);

  Bytes truncated(rec.begin(), rec.end() - 1);
  EXPECT_EQ(code_of([&] { decode_announcement(truncated, 0); }), Errc::format_error);
  Bytes flagged = rec;
  flagged[2] = 1;
  EXPECT_EQ(code_of([&] { decode_announcement(flagged, 0); }), Errc::format_error);
  Bytes bad_kem = rec;
  bad_kem[1] = 9;
  EXPECT_EQ(code_of([&] { decode_announcement(bad_kem, 0); }), Errc::format_error);
}
