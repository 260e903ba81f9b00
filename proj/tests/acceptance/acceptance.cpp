// Acceptance checks. One PASS/FAIL line per criterion; nonzero exit if any
// criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ec_oracle.hpp"
#include "ecsap/baselines_bench.hpp"
#include "ecsap/curve_engine.hpp"
#include "ecsap/entropy.hpp"
#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"
#include "ecsap/kem_engine.hpp"
#include "ecsap/lattice_math.hpp"
#include "ecsap/registry_store.hpp"
#include "ecsap/sap_core.hpp"
#include "kat_file.hpp"
#include "nist_drbg.hpp"
#include "temp_dir.hpp"

namespace {

using namespace ecsap;
namespace fs = std::filesystem;

struct Verdict {
  bool ok;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("[%s] %s: %s\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
  std::fflush(stdout);
  if (!v.ok) ++failures;
}

// Address of k*G computed with the integer oracle.
curve::EthAddress oracle_address(const curve::Scalar& k) {
  const auto kb = k.bytes();
  const auto p = testkit::oracle_mul(testkit::secp_g(), testkit::from_be(kb.data(), kb.size()));
  Bytes xy;
  for (const auto& coord : {testkit::to_be32(p.x), testkit::to_be32(p.y)}) xy.insert(xy.end(), coord.begin(), coord.end());
  const auto h = hash::keccak256(xy);
  curve::EthAddress a;
  std::copy(h.end() - 20, h.end(), a.begin());
  return a;
}

Verdict end_to_end() {
  constexpr int kRounds = 1000;
  constexpr std::size_t kOracleChecks = 40;
  SeededEntropy rng(0xACCE55, "ecsap.acceptance.e2e");
  std::mt19937_64 shape(0xACCE55);
  std::vector<sap::StealthMetaAddress> strangers;
  for (int i = 0; i < 4; ++i) strangers.push_back(sap::recipient_setup(rng).second);

  std::size_t planted_total = 0, oracle_checked = 0;
  for (int round = 0; round < kRounds; ++round) {
    const auto [keys, meta] = sap::recipient_setup(rng);
    const std::size_t tag_len = 1 + shape() % 2;
    const int mine = static_cast<int>(shape() % 4);
    const int foreign = static_cast<int>(shape() % 6);

    struct Entry {
      sap::Announcement ann;
      bool planted;
      curve::EthAddress address;
    };
    std::vector<Entry> entries;
    for (int i = 0; i < mine; ++i) {
      auto out = sap::send(meta, tag_len, rng);
      entries.push_back({out.announcement, true, out.stealth_address});
    }
    for (int i = 0; i < foreign; ++i) {
      auto out = sap::send(strangers[shape() % strangers.size()], tag_len, rng);
      entries.push_back({out.announcement, false, out.stealth_address});
    }
    std::shuffle(entries.begin(), entries.end(), shape);

    std::vector<sap::Announcement> anns;
    std::map<std::uint64_t, curve::EthAddress> expected;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i].ann.sequence_no = i;
      anns.push_back(entries[i].ann);
      if (entries[i].planted) expected[i] = entries[i].address;
    }
    planted_total += expected.size();

    const auto rep = sap::scan(keys, anns, {.tag_len = tag_len, .workers = 1});
    std::map<std::uint64_t, curve::EthAddress> found;
    for (const auto& m : rep.matches) {
      found[m.sequence_no] = m.stealth_address;
      if (curve::eth_address(curve::mul_generator(m.stealth_priv)) != expected[m.sequence_no])
        return {false, "round " + std::to_string(round) + ": eth_address(p*G) differs from sender's address"};
      // The integer oracle is slow; cross-check a prefix of the keys with it.
      if (oracle_checked < kOracleChecks) {
        if (oracle_address(m.stealth_priv) != expected[m.sequence_no])
          return {false, "round " + std::to_string(round) + ": oracle p*G differs from sender's address"};
        ++oracle_checked;
      }
    }
    if (found != expected || rep.matches.size() != expected.size())
      return {false, "round " + std::to_string(round) + ": matches differ from planted set"};
  }
  return {true, std::to_string(kRounds) + " rounds, " + std::to_string(planted_total) +
                    " planted payments found exactly, all keys satisfy eth_address(p*G), " +
                    std::to_string(oracle_checked) + " also checked with integer oracle"};
}

Verdict compression_bound() {
  constexpr std::int64_t q = 3329;
  std::int64_t worst_slack = q;
  for (int d = 1; d <= 11; ++d) {
    // round(q / 2^(d+1)); q is odd so no tie.
    const std::int64_t bound = (q + (std::int64_t{1} << d)) >> (d + 1);
    if (lattice::compression_error_bound(q, d) != bound)
      return {false, "library bound differs at d=" + std::to_string(d)};
    for (std::int64_t x = 0; x < q; ++x) {
      const auto xe = lattice::mod_reduce(x, q);
      const auto y = lattice::compress(xe, d);
      if (y >= (1u << d)) return {false, "compress out of range"};
      std::int64_t diff = (lattice::decompress(y, d, q).value() - x) % q;
      if (diff < 0) diff += q;
      if (diff > q / 2) diff -= q;
      const std::int64_t err = std::llabs(diff);
      if (err > bound)
        return {false, "x=" + std::to_string(x) + " d=" + std::to_string(d) + " error " + std::to_string(err)};
      worst_slack = std::min(worst_slack, bound - err);
    }
  }
  return {true, "all 3329 x 11 pairs within round(q/2^(d+1)), min slack " + std::to_string(worst_slack)};
}

Verdict cbd_exact() {
  std::ostringstream detail;
  for (int eta : {2, 3}) {
    const int bits = 2 * eta;
    std::map<int, std::uint64_t> counts;
    for (std::uint32_t pattern = 0; pattern < (1u << bits); ++pattern) {
      const std::uint8_t byte = static_cast<std::uint8_t>(pattern);
      const Bytes buf{byte};
      lattice::BitReader reader(buf);
      counts[lattice::sample_cbd({eta}, reader)]++;
    }
    // Expected: C(2eta, eta + k) patterns yield k.
    auto choose = [](int n, int r) {
      std::uint64_t c = 1;
      for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
      return c;
    };
    std::int64_t sum = 0, sum_sq = 0;
    for (int k = -eta; k <= eta; ++k) {
      if (counts[k] != choose(bits, eta + k))
        return {false, "eta=" + std::to_string(eta) + " count mismatch at k=" + std::to_string(k)};
      sum += k * static_cast<std::int64_t>(counts[k]);
      sum_sq += k * k * static_cast<std::int64_t>(counts[k]);
    }
    if (counts.size() != static_cast<std::size_t>(bits + 1)) return {false, "values outside [-eta, eta]"};
    // Variance eta/2 exactly: sum_sq / 2^bits == eta / 2 and mean 0.
    if (sum != 0 || 2 * sum_sq != eta * (std::int64_t{1} << bits))
      return {false, "eta=" + std::to_string(eta) + " moments wrong"};
    detail << "eta=" << eta << " var=" << sum_sq << "/" << (1 << bits) << " ";
  }
  detail << "(binomial pmf exact)";
  return {true, detail.str()};
}

Verdict kem_kats_and_roundtrips() {
  const auto vectors = testkit::read_kat_file(testkit::data_path("kat_kyber768.rsp"));
  std::array<std::uint8_t, 48> outer_seed;
  for (int i = 0; i < 48; ++i) outer_seed[i] = static_cast<std::uint8_t>(i);
  testkit::NistDrbg outer(outer_seed);
  for (const auto& v : vectors) {
    std::array<std::uint8_t, 48> seed;
    outer.fill(seed);
    if (Bytes(seed.begin(), seed.end()) != v.seed) return {false, "seed mismatch at count " + std::to_string(v.count)};
    testkit::NistDrbg inner(seed);
    const auto kp = kem::keygen(inner, kem::ParameterSet::kyber768);
    const auto enc = kem::encaps(kp.public_key, inner);
    const auto ss = enc.shared_secret.view();
    if (kp.public_key.bytes() != v.pk || kp.secret_key.bytes() != v.sk || enc.ciphertext.bytes() != v.ct ||
        Bytes(ss.begin(), ss.end()) != v.ss || !(kem::decaps(kp.secret_key, enc.ciphertext) == enc.shared_secret))
      return {false, "KAT mismatch at count " + std::to_string(v.count)};
  }
  if (vectors.empty()) return {false, "no KAT vectors"};

  constexpr int kRoundTrips = 10000;
  SystemEntropy sys;
  int mismatches = 0;
  for (int i = 0; i < kRoundTrips; ++i) {
    const auto kp = kem::keygen(sys, kem::ParameterSet::kyber768);
    const auto enc = kem::encaps(kp.public_key, sys);
    if (!(kem::decaps(kp.secret_key, enc.ciphertext) == enc.shared_secret)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(vectors.size()) + " KATs bit-exact, " + std::to_string(kRoundTrips) +
                               " round trips, " + std::to_string(mismatches) + " mismatches"};
}

Verdict view_tag_rate() {
  constexpr std::size_t kCount = 80000;
  const double mean = kCount / 256.0;
  const double sigma = std::sqrt(kCount * (1.0 / 256) * (255.0 / 256));
  const std::array<bench::KernelId, 1> kernels{bench::KernelId::efficient_curvy};
  int outside = 0;
  std::ostringstream passes;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    bench::WorkloadPool pool(seed, kCount, 1, kernels, pairing::PairingCurve::bls12_381,
                             kem::ParameterSet::kyber768);
    const auto rep = bench::kernel_scan(bench::KernelId::efficient_curvy, pool.keys(),
                                        pool.foreign_only(bench::KernelId::efficient_curvy, kCount), 1);
    if (!rep.matches.empty()) return {false, "foreign workload produced a match"};
    const double p = static_cast<double>(rep.view_tag_passes);
    if (std::fabs(p - mean) > 3 * sigma) ++outside;
    passes << (seed > 1 ? "," : "") << rep.view_tag_passes;
  }
  std::ostringstream d;
  d << "passes [" << passes.str() << "], band " << mean << "+-" << 3 * sigma << ", " << outside
    << " of 10 seeds outside";
  return {outside <= 1, d.str()};
}

std::vector<std::uint64_t> timing_seeds() {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  if (const char* env = std::getenv("ECSAP_ACCEPT_SEEDS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      seeds.clear();
      for (int i = 1; i <= n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
    }
  }
  return seeds;
}

void progress(std::string_view label, std::size_t count, std::uint64_t seed, std::uint64_t ns, void*) {
  std::fprintf(stderr, "  %.*s count=%zu seed=%llu %.1f ms\n", static_cast<int>(label.size()), label.data(), count,
               static_cast<unsigned long long>(seed), ns / 1e6);
}

void timing_criteria() {
  bench::BenchConfig cfg;
  cfg.seeds = timing_seeds();
  cfg.kernels = {bench::kAllKernels.begin(), bench::kAllKernels.end()};
  bench::BenchResult result;
  std::string error;
  try {
    result = bench::run_bench(cfg, progress);
    bench::emit_report(result, bench::ReportFormat::csv, "acceptance_bench.csv");
  } catch (const std::exception& e) {
    error = e.what();
  }
  const std::string seeds_note = " (" + std::to_string(cfg.seeds.size()) + " seeds)";

  report("pairing_ratio_at_80k", [&]() -> Verdict {
    if (!error.empty()) return {false, error};
    const auto r = result.ratio("curvy_pairing", 80000);
    if (!r) return {false, "missing series"};
    std::ostringstream d;
    d << "curvy_pairing/efficient_curvy = " << *r << " (need >= 2.0)" << seeds_note;
    return {*r >= 2.0, d.str()};
  });

  report("mlwe_ratio_near_one", [&]() -> Verdict {
    if (!error.empty()) return {false, error};
    std::ostringstream d;
    bool ok = true;
    for (std::size_t c : cfg.counts) {
      const auto r = result.ratio("mlwe_sap", c);
      if (!r) return {false, "missing series"};
      if (std::fabs(*r - 1.0) > 0.15) ok = false;
      d << c << ":" << *r << " ";
    }
    d << "(need |r-1| <= 0.15)" << seeds_note;
    return {ok, d.str()};
  });

  report("linearity", [&]() -> Verdict {
    if (!error.empty()) return {false, error};
    std::ostringstream d;
    bool ok = true;
    for (const auto& s : result.series) {
      std::vector<double> x, y;
      for (const auto& p : s.points) {
        x.push_back(static_cast<double>(p.count));
        y.push_back(p.mean_ns());
      }
      const auto fit = bench::fit_linear(x, y);
      if (fit.r2 < 0.98) ok = false;
      d << s.label << " R2=" << fit.r2 << " ";
    }
    d << "(need >= 0.98)";
    return {ok, d.str()};
  });
}

std::vector<sap::Announcement> make_announcements(std::size_t n) {
  SeededEntropy rng(0x5EED, "ecsap.acceptance.persist");
  const auto meta = sap::recipient_setup(rng).second;
  std::vector<sap::Announcement> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = sap::send(meta, 1 + i % 3, rng).announcement;
    a.sequence_no = i;
    out.push_back(a);
  }
  return out;
}

Verdict persistence() {
  constexpr std::size_t kRecords = 40;
  constexpr std::uint64_t kCursor = 17;
  testkit::TempDir dir;
  const auto expected = make_announcements(kRecords);
  std::ostringstream d;

  for (const auto mode : {registry::LogMode::inline_payload, registry::LogMode::split}) {
    const char* mode_name = mode == registry::LogMode::split ? "split" : "inline";
    const fs::path path = dir.path() / (std::string(mode_name) + ".log");

    // Writer in a separate process that exits without any cleanup.
    const pid_t pid = ::fork();
    if (pid < 0) return {false, "fork failed"};
    if (pid == 0) {
      int rc = 0;
      try {
        auto log = registry::AnnouncementLog::open(path, mode);
        for (const auto& a : expected)
          if (log.append(a) != a.sequence_no) rc = 3;
      } catch (...) {
        rc = 2;
      }
      ::_exit(rc);
    }
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string(mode_name) + ": writer failed"};

    auto same = [](const std::vector<sap::Announcement>& got, const std::vector<sap::Announcement>& want) {
      if (got.size() != want.size()) return false;
      for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i].sequence_no != want[i].sequence_no ||
            sap::encode_announcement(got[i]) != sap::encode_announcement(want[i]))
          return false;
      return true;
    };

    {
      const auto log = registry::AnnouncementLog::open(path);
      if (log.mode() != mode) return {false, std::string(mode_name) + ": mode not restored"};
      if (!same(log.stream_since(0), expected)) return {false, std::string(mode_name) + ": full replay differs"};
      const std::vector<sap::Announcement> suffix(expected.begin() + kCursor, expected.end());
      if (!same(log.stream_since(kCursor), suffix)) return {false, std::string(mode_name) + ": cursor replay differs"};
      if (log.inspect().torn_tail) return {false, std::string(mode_name) + ": clean log reported torn"};
    }

    // Tear the final record: drop its last few bytes.
    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 5);
    {
      const auto log = registry::AnnouncementLog::open(path);
      const auto state = log.inspect();
      const std::vector<sap::Announcement> head(expected.begin(), expected.end() - 1);
      if (!state.torn_tail) return {false, std::string(mode_name) + ": torn tail not detected"};
      if (state.records != kRecords - 1) return {false, std::string(mode_name) + ": wrong record count after tear"};
      if (!same(log.stream_since(0), head)) return {false, std::string(mode_name) + ": torn record not excluded"};
    }
    d << mode_name << ": " << kRecords << " records replayed bit-exact after restart, torn tail excluded; ";
  }
  return {true, d.str()};
}

}  // namespace

int main() {
  std::printf("ecsap acceptance\n");
  report("end_to_end_rounds", end_to_end);
  report("compression_bound", compression_bound);
  report("cbd_exact", cbd_exact);
  report("kyber768_kat_and_roundtrips", kem_kats_and_roundtrips);
  report("view_tag_pass_rate", view_tag_rate);
  timing_criteria();
  report("persistence", persistence);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
