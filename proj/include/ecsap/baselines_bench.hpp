#pragma once

// Scan kernels for the comparison experiments and the harness that times
// them over seeded announcement workloads.
//
// Each kernel does one dominant operation per announcement and then applies
// the same view-tag filter:
//   efficient_curvy  Kyber decapsulation (delegates to sap::scan)
//   mlwe_sap         Kyber decapsulation; stealth key derived in R_q^k
//   curvy_pairing    one pairing e(R, V) on a pairing-friendly curve
//   dksap_ecdh       one secp256k1 scalar multiplication v*R

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ecsap/curve_engine.hpp"
#include "ecsap/kem_engine.hpp"
#include "ecsap/lattice_math.hpp"
#include "ecsap/pairing.hpp"
#include "ecsap/sap_core.hpp"

namespace ecsap::bench {

enum class KernelId { efficient_curvy, mlwe_sap, curvy_pairing, dksap_ecdh };

inline constexpr std::array<KernelId, 4> kAllKernels{
    KernelId::efficient_curvy, KernelId::mlwe_sap, KernelId::curvy_pairing, KernelId::dksap_ecdh};

std::string_view name(KernelId kernel) noexcept;
/// Errc::invalid_parameter for unknown names.
KernelId parse_kernel(std::string_view text);

/// Announcement shape of the pairing comparator: R is a G1 element.
struct PairingAnnouncement {
  Bytes ephemeral;
  Bytes view_tag;
  curve::EthAddress stealth_address{};
  std::uint64_t sequence_no = 0;
};

/// Announcement shape of the ECDH comparator: R is a secp256k1 point.
struct EcAnnouncement {
  curve::CurvePoint ephemeral;
  Bytes view_tag;
  curve::EthAddress stealth_address{};
  std::uint64_t sequence_no = 0;
};

using KernelInput = std::variant<std::vector<sap::Announcement>, std::vector<PairingAnnouncement>,
                                 std::vector<EcAnnouncement>>;

/// Key material; each kernel needs a subset (see kernel_scan).
struct KernelKeys {
  std::optional<sap::RecipientKeys> recipient;
  std::optional<lattice::RqVector> lattice_spend;
  std::shared_ptr<const pairing::PairingEngine> pairing_engine;
  std::shared_ptr<const pairing::PreparedG2> pairing_view;
  std::optional<curve::Scalar> ec_view;
};

struct KernelMatch {
  std::uint64_t sequence_no;
  curve::EthAddress stealth_address;

  friend bool operator==(const KernelMatch&, const KernelMatch&) = default;
};

struct KernelReport {
  std::vector<KernelMatch> matches;
  std::uint64_t announcements_scanned = 0;
  /// Decapsulations, pairings or scalar multiplications.
  std::uint64_t dominant_ops = 0;
  std::uint64_t view_tag_passes = 0;
  std::uint64_t address_mismatches = 0;
  std::uint64_t malformed_skipped = 0;
  std::uint64_t elapsed_ns = 0;
};

/// Runs one kernel. Requirements:
///   efficient_curvy  recipient
///   mlwe_sap         recipient, lattice_spend
///   curvy_pairing    recipient, pairing_engine, pairing_view
///   dksap_ecdh       recipient, ec_view
/// Missing keys or an input of the wrong shape raise Errc::configuration.
/// workers only applies to efficient_curvy.
KernelReport kernel_scan(KernelId kernel, const KernelKeys& keys, const KernelInput& input,
                         std::size_t tag_len, std::size_t workers = 1);

/// keccak256 of the 12-bit packing of K + XOF(S), last 20 bytes. XOF(S)
/// samples uniform R_q^k coefficients from SHAKE-256(S) by rejection.
curve::EthAddress lattice_stealth_address(const lattice::RqVector& spend, ByteView shared_secret);

// ---- workloads ----

inline constexpr std::size_t kPlantedPerRun = 5;

/// Keys plus the foreign announcements for one seed, sized for the largest
/// count. Workloads for smaller counts take prefixes of the foreign pool.
class WorkloadPool {
 public:
  WorkloadPool(std::uint64_t seed, std::size_t max_count, std::size_t tag_len,
               std::span<const KernelId> kernels, pairing::PairingCurve curve,
               kem::ParameterSet ps);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t tag_len() const noexcept { return tag_len_; }
  const KernelKeys& keys() const noexcept { return keys_; }

  /// Sorted distinct positions of the planted announcements for count.
  std::vector<std::size_t> planted_positions(std::size_t count) const;

  /// Announcement list for one kernel: count - kPlantedPerRun foreign
  /// entries with the planted ones inserted. Sequence numbers are 0..count-1.
  /// Byte-identical for identical (seed, count, kernel).
  KernelInput materialize(KernelId kernel, std::size_t count) const;

  /// Foreign-only input of the given length, for view-tag statistics.
  KernelInput foreign_only(KernelId kernel, std::size_t count) const;

  /// Addresses of the planted payments for count, in position order.
  std::vector<curve::EthAddress> planted_addresses(KernelId kernel, std::size_t count) const;

 private:
  struct Planted {
    std::vector<std::size_t> positions;
    std::vector<sap::Announcement> kem;
    std::vector<sap::Announcement> mlwe;
    std::vector<PairingAnnouncement> pairing;
    std::vector<EcAnnouncement> ec;
  };
  Planted plant(std::size_t count) const;
  bool has(KernelId kernel) const;

  std::uint64_t seed_;
  std::size_t max_count_;
  std::size_t tag_len_;
  std::vector<KernelId> kernels_;
  kem::ParameterSet ps_;
  KernelKeys keys_;
  std::optional<sap::StealthMetaAddress> meta_;
  Bytes pairing_view_pub_;
  std::shared_ptr<const pairing::PreparedG2> pairing_g2_generator_;
  curve::CurvePoint ec_view_pub_;
  std::vector<sap::Announcement> foreign_kem_;
  std::vector<PairingAnnouncement> foreign_pairing_;
  std::vector<EcAnnouncement> foreign_ec_;
};

// ---- harness ----

struct BenchConfig {
  std::vector<std::size_t> counts{5000, 10000, 20000, 40000, 80000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t tag_len = sap::kDefaultTagLen;
  std::vector<KernelId> kernels{kAllKernels.begin(), kAllKernels.end()};
  pairing::PairingCurve curve = pairing::PairingCurve::bls12_381;
  kem::ParameterSet kem = kem::kDefaultParameterSet;
  /// Announcements scanned once before each timed scan and discarded.
  std::size_t warmup = 256;
  /// Above 1, efficient_curvy is also timed with this many scan threads and
  /// reported as "efficient_curvy_parallel".
  std::size_t parallel_workers = 1;
};

/// Errc::configuration describing the first violated constraint.
void validate(const BenchConfig& cfg);

/// "key = value" lines, '#' comments. Keys: counts, seeds, tag_len, kernels,
/// curve, kem, warmup, parallel_workers. Lists are comma separated; seeds
/// also accepts "a..b". Errc::configuration on unknown keys or bad values.
BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::string& path);

struct Sample {
  std::uint64_t seed;
  std::uint64_t elapsed_ns;
  std::uint64_t view_tag_passes;
  std::uint64_t dominant_ops;
  std::uint64_t matches;
};

struct SeriesPoint {
  std::size_t count;
  std::vector<Sample> samples;
  double mean_ns() const;
};

struct Series {
  std::string label;
  std::vector<SeriesPoint> points;

  const SeriesPoint* at(std::size_t count) const;
};

struct BenchResult {
  std::vector<std::size_t> counts;
  std::vector<Series> series;

  const Series* find(std::string_view label) const;
  /// mean(label) / mean(efficient_curvy) at count; nullopt if either is absent.
  std::optional<double> ratio(std::string_view label, std::size_t count) const;
};

/// Called after each timed scan; for progress output.
using ProgressFn = void (*)(std::string_view label, std::size_t count, std::uint64_t seed,
                            std::uint64_t elapsed_ns, void* context);

/// Throws if a kernel misses a planted payment or reports an extra one.
BenchResult run_bench(const BenchConfig& cfg, ProgressFn progress = nullptr, void* context = nullptr);

struct LinearFit {
  double slope;
  double intercept;
  double r2;
};
/// Ordinary least squares; at least two distinct x values.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

enum class ReportFormat { csv, table };
ReportFormat parse_format(std::string_view text);

/// csv: "kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches"
/// rows, then "# aggregate" and "kernel,count,mean_elapsed_ns,
/// ratio_vs_efficient_curvy" rows. Means are printed in shortest
/// round-trip form.
void emit_report(const BenchResult& result, ReportFormat format, std::ostream& out);
/// Errc::storage if the file cannot be written.
void emit_report(const BenchResult& result, ReportFormat format, const std::string& path);

/// Reads the per-seed rows back. Errc::format_error on malformed input.
BenchResult parse_csv(std::string_view text);

struct AggregateRow {
  std::string label;
  std::size_t count;
  double mean_ns;
  std::optional<double> ratio;
};
/// Reads the aggregate block. Errc::format_error on malformed input.
std::vector<AggregateRow> parse_aggregate(std::string_view text);

}  // namespace ecsap::bench
