#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"
#include "ecsap/registry_store.hpp"
#include "temp_dir.hpp"

using namespace ecsap;
using namespace ecsap::registry;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_input;
}

Bytes slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void dump(const fs::path& p, const Bytes& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::vector<sap::Announcement> make_announcements(std::size_t n, std::uint64_t seed,
                                                  std::size_t tag_len = 1) {
  SeededEntropy rng(seed, "registry-test");
  const auto meta = sap::recipient_setup(rng).second;
  std::vector<sap::Announcement> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sap::send(meta, tag_len, rng).announcement);
  return out;
}

// Size of one inline-mode record for a 1-byte tag Kyber768 announcement.
constexpr std::size_t kInlineRecord = 4 + 8 + (4 + 1088 + 1 + 20) + 4;

}  // namespace

TEST(MetaRegistry, RegisterResolveAcrossInstances) {
  testkit::TempDir dir;
  SeededEntropy rng(1, "registry-test");
  const auto alice = sap::recipient_setup(rng).second;
  const auto bob = sap::recipient_setup(rng).second;
  {
    MetaRegistry reg(dir / "names.txt");
    reg.register_name("alice.eth", alice);
    reg.register_name("bob.eth", bob);
    EXPECT_EQ(reg.resolve_name("alice.eth"), alice);
  }
  MetaRegistry reopened(dir / "names.txt");
  EXPECT_EQ(reopened.resolve_name("alice.eth"), alice);
  EXPECT_EQ(reopened.resolve_name("bob.eth"), bob);
  EXPECT_EQ(sap::encode_meta(reopened.resolve_name("bob.eth")), sap::encode_meta(bob));
  EXPECT_EQ(reopened.entries().size(), 2u);

  std::ifstream in(dir / "names.txt");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# ecsap-meta-registry v1");
}

TEST(MetaRegistry, Errors) {
  testkit::TempDir dir;
  SeededEntropy rng(2, "registry-test");
  const auto meta = sap::recipient_setup(rng).second;
  MetaRegistry reg(dir / "names.txt");
  EXPECT_EQ(code_of([&] { reg.resolve_name("nobody"); }), Errc::not_found);
  reg.register_name("carol", meta);
  EXPECT_EQ(code_of([&] { reg.register_name("carol", meta); }), Errc::conflict);
  EXPECT_EQ(code_of([&] { reg.register_name("", meta); }), Errc::invalid_input);
  EXPECT_EQ(code_of([&] { reg.register_name("a\tb", meta); }), Errc::invalid_input);
  EXPECT_EQ(code_of([&] { reg.register_name("a\nb", meta); }), Errc::invalid_input);
}

TEST(AnnouncementLog, SequenceNumbersAndReopen) {
  testkit::TempDir dir;
  const auto anns = make_announcements(5, 3);
  {
    auto log = AnnouncementLog::open(dir / "log.bin");
    EXPECT_EQ(log.append(anns[0]), 0u);
    EXPECT_EQ(log.append(anns[1]), 1u);
    EXPECT_EQ(log.append(anns[2]), 2u);
  }
  auto log = AnnouncementLog::open(dir / "log.bin", LogMode::split);
  EXPECT_EQ(log.mode(), LogMode::inline_payload);
  EXPECT_EQ(log.append(anns[3]), 3u);
  EXPECT_EQ(log.append(anns[4]), 4u);

  const auto all = log.stream_since(0);
  ASSERT_EQ(all.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    auto expected = anns[i];
    expected.sequence_no = i;
    EXPECT_EQ(all[i], expected);
  }
  EXPECT_EQ(log.stream_since(3).size(), 2u);
  EXPECT_EQ(log.stream_since(3)[0].sequence_no, 3u);
  EXPECT_TRUE(log.stream_since(5).empty());
  EXPECT_TRUE(log.stream_since(1000).empty());
  EXPECT_EQ(log.inspect().records, 5u);
  EXPECT_FALSE(log.inspect().torn_tail);
}

TEST(AnnouncementLog, HeaderLayout) {
  testkit::TempDir dir;
  AnnouncementLog::open(dir / "a.bin");
  AnnouncementLog::open(dir / "b.bin", LogMode::split);
  const Bytes a = slurp(dir / "a.bin");
  const Bytes b = slurp(dir / "b.bin");
  ASSERT_EQ(a.size(), 16u);
  EXPECT_EQ(std::string(a.begin(), a.begin() + 8), "ECSAPLOG");
  EXPECT_EQ(a[8], 1);
  EXPECT_EQ(a[10], 0);
  EXPECT_EQ(b[10], 1);
  EXPECT_TRUE(fs::exists(dir / "b.bin.offchain"));

  dump(dir / "c.bin", Bytes{'n', 'o', 'p', 'e'});
  EXPECT_EQ(code_of([&] { AnnouncementLog::open(dir / "c.bin"); }), Errc::format_error);
}

TEST(AnnouncementLog, RejectsMalformedAnnouncements) {
  testkit::TempDir dir;
  auto log = AnnouncementLog::open(dir / "log.bin");
  auto ann = make_announcements(1, 4)[0];
  ann.ephemeral_ct.pop_back();
  EXPECT_EQ(code_of([&] { log.append(ann); }), Errc::invalid_input);
  EXPECT_EQ(log.inspect().records, 0u);
}

TEST(AnnouncementLog, TornFinalRecordIsDroppedThenOverwritten) {
  testkit::TempDir dir;
  const auto anns = make_announcements(4, 5);
  const fs::path p = dir / "log.bin";
  {
    auto log = AnnouncementLog::open(p);
    for (int i = 0; i < 3; ++i) log.append(anns[i]);
  }
  Bytes data = slurp(p);
  ASSERT_EQ(data.size(), 16 + 3 * kInlineRecord);
  for (std::size_t cut : {std::size_t{1}, std::size_t{4}, std::size_t{100}, kInlineRecord - 1}) {
    dump(p, Bytes(data.begin(), data.end() - static_cast<std::ptrdiff_t>(cut)));
    auto log = AnnouncementLog::open(p);
    const auto state = log.inspect();
    EXPECT_TRUE(state.torn_tail) << cut;
    EXPECT_EQ(state.records, 2u);
    EXPECT_EQ(log.stream_since(0).size(), 2u);
  }

  // Bad checksum on the final record counts as torn as well.
  Bytes bad_crc = data;
  bad_crc.back() ^= 0x01;
  dump(p, bad_crc);
  auto log = AnnouncementLog::open(p);
  EXPECT_TRUE(log.inspect().torn_tail);
  EXPECT_EQ(log.stream_since(0).size(), 2u);

  // The next append reclaims the torn slot.
  EXPECT_EQ(log.append(anns[3]), 2u);
  const auto all = log.stream_since(0);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].ephemeral_ct, anns[3].ephemeral_ct);
  EXPECT_FALSE(log.inspect().torn_tail);
}

TEST(AnnouncementLog, MidFileCorruptionIsAnIntegrityError) {
  testkit::TempDir dir;
  const fs::path p = dir / "log.bin";
  {
    auto log = AnnouncementLog::open(p);
    for (const auto& a : make_announcements(4, 6)) log.append(a);
  }
  Bytes data = slurp(p);
  data[16 + kInlineRecord + 200] ^= 0x40;  // inside record 1
  dump(p, data);
  auto log = AnnouncementLog::open(p);
  try {
    log.stream_since(0);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.sequence_no(), 1u);
    EXPECT_EQ(e.code(), Errc::integrity);
  }
}

TEST(AnnouncementLog, SplitModeKeepsOnlyCommitmentsOnChain) {
  testkit::TempDir dir;
  const fs::path p = dir / "log.bin";
  const auto anns = make_announcements(5, 7);
  auto log = AnnouncementLog::open(p, LogMode::split);
  for (const auto& a : anns) log.append(a);

  const Bytes onchain = slurp(p);
  EXPECT_EQ(onchain.size(), 16 + 5 * (4 + 8 + 4 + 1 + 20 + 32 + 4));
  const Bytes offchain = slurp(log.offchain_path());

  // Every on-chain commitment equals Keccak-256 over the off-chain payload.
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const auto c = split_commitment(i, anns[i].ephemeral_ct, anns[i].view_tag);
    Bytes buf;
    put_le64(buf, i);
    buf.insert(buf.end(), anns[i].ephemeral_ct.begin(), anns[i].ephemeral_ct.end());
    buf.insert(buf.end(), anns[i].view_tag.begin(), anns[i].view_tag.end());
    EXPECT_EQ(c, hash::keccak256(buf));
    EXPECT_NE(std::search(onchain.begin(), onchain.end(), c.begin(), c.end()), onchain.end());
    EXPECT_NE(std::search(offchain.begin(), offchain.end(), c.begin(), c.end()), offchain.end());
  }

  const auto streamed = log.stream_since(0);
  ASSERT_EQ(streamed.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(streamed[i].ephemeral_ct, anns[i].ephemeral_ct);
    EXPECT_EQ(streamed[i].view_tag, anns[i].view_tag);
    EXPECT_EQ(streamed[i].stealth_address, anns[i].stealth_address);
  }
}

TEST(AnnouncementLog, CorruptedOffchainPayloadNamesTheRecord) {
  testkit::TempDir dir;
  const fs::path p = dir / "log.bin";
  auto log = AnnouncementLog::open(p, LogMode::split);
  for (const auto& a : make_announcements(5, 8)) log.append(a);

  const Bytes original = slurp(log.offchain_path());
  const std::size_t off_record = 4 + 32 + 1088;
  for (std::size_t target : {std::size_t{0}, std::size_t{3}, std::size_t{4}}) {
    Bytes data = original;
    data[16 + target * off_record + 36 + 500] ^= 0x01;
    dump(log.offchain_path(), data);
    try {
      log.stream_since(0);
      FAIL() << target;
    } catch (const IntegrityError& e) {
      EXPECT_EQ(e.sequence_no(), target);
    }
    // Records before the corrupted one remain readable from a later cursor.
    if (target > 0) {
      EXPECT_EQ(log.stream_since(target + 1).size(), 4 - target);
    }
  }
  dump(log.offchain_path(), Bytes(original.begin(), original.begin() + 16));
  try {
    log.stream_since(2);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.sequence_no(), 2u);
  }
}

TEST(AnnouncementLog, ReadersSeeConsistentPrefixesDuringWrites) {
  testkit::TempDir dir;
  const fs::path p = dir / "log.bin";
  const auto anns = make_announcements(60, 9);
  auto writer = AnnouncementLog::open(p);
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    auto log = AnnouncementLog::open(p);
    std::size_t last = 0;
    while (!done) {
      const auto got = log.stream_since(0);
      if (got.size() < last) ++bad;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].sequence_no != i || got[i].ephemeral_ct != anns[i].ephemeral_ct) ++bad;
      }
      last = got.size();
    }
  });
  for (const auto& a : anns) writer.append(a);
  done = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST(AnnouncementLog, ConcurrentWriterProcessesProduceGapFreeLog) {
  testkit::TempDir dir;
  const fs::path p = dir / "log.bin";
  AnnouncementLog::open(p);
  const auto anns = make_announcements(20, 10);
  std::vector<pid_t> children;
  for (int c = 0; c < 3; ++c) {
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      int rc = 0;
      try {
        auto log = AnnouncementLog::open(p);
        for (const auto& a : anns) log.append(a);
      } catch (...) {
        rc = 1;
      }
      ::_exit(rc);
    }
    children.push_back(pid);
  }
  for (pid_t pid : children) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
  }
  auto log = AnnouncementLog::open(p);
  const auto all = log.stream_since(0);
  ASSERT_EQ(all.size(), 60u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].sequence_no, i);
}
