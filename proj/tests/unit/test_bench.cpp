#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ecsap/baselines_bench.hpp"
#include "ecsap/errors.hpp"

namespace {

using namespace ecsap;
using bench::KernelId;

constexpr std::size_t kPoolSize = 600;

const bench::WorkloadPool& shared_pool() {
  static const bench::WorkloadPool pool(7, kPoolSize, 1, bench::kAllKernels,
                                        pairing::PairingCurve::bls12_381, kem::ParameterSet::kyber768);
  return pool;
}

std::size_t input_size(const bench::KernelInput& input) {
  return std::visit([](const auto& v) { return v.size(); }, input);
}

TEST(Kernels, NamesRoundTrip) {
  for (KernelId k : bench::kAllKernels) EXPECT_EQ(bench::parse_kernel(bench::name(k)), k);
  EXPECT_THROW(bench::parse_kernel("curvy"), Error);
}

TEST(Kernels, LatticeAddressMatchesReference) {
  // tests/oracles/lattice_address.py
  lattice::RqVector spend(3, 256, 3329);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 256; ++j)
      spend[i].set_coefficient(j, static_cast<std::int64_t>(((i * 256 + j) * 7) % 3329));
  Bytes s(32);
  for (std::size_t i = 0; i < 32; ++i) s[i] = static_cast<std::uint8_t>(i);
  EXPECT_EQ(to_hex(bench::lattice_stealth_address(spend, s)), "fbda6028a7baaa612ffa7c24a6c1df459abe3176");
}

TEST(Workload, PlantedPositionsAreDistinctAndInRange) {
  const auto& pool = shared_pool();
  for (std::size_t count : {5u, 6u, 100u, 600u}) {
    const auto pos = pool.planted_positions(count);
    ASSERT_EQ(pos.size(), bench::kPlantedPerRun);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      EXPECT_LT(pos[i], count);
      if (i > 0) EXPECT_LT(pos[i - 1], pos[i]);
    }
  }
  EXPECT_THROW(pool.planted_positions(4), Error);
  EXPECT_THROW(pool.planted_positions(kPoolSize + 1), Error);
}

TEST(Workload, EveryKernelFindsExactlyThePlantedPayments) {
  const auto& pool = shared_pool();
  for (std::size_t count : {300u, 600u}) {
    const auto positions = pool.planted_positions(count);
    for (KernelId k : bench::kAllKernels) {
      SCOPED_TRACE(std::string(bench::name(k)) + " count " + std::to_string(count));
      const auto input = pool.materialize(k, count);
      ASSERT_EQ(input_size(input), count);
      const auto report = bench::kernel_scan(k, pool.keys(), input, 1);
      const auto expected = pool.planted_addresses(k, count);
      ASSERT_EQ(report.matches.size(), positions.size());
      for (std::size_t i = 0; i < positions.size(); ++i) {
        EXPECT_EQ(report.matches[i].sequence_no, positions[i]);
        EXPECT_EQ(report.matches[i].stealth_address, expected[i]);
      }
      EXPECT_EQ(report.announcements_scanned, count);
      EXPECT_EQ(report.dominant_ops, count);
      EXPECT_EQ(report.malformed_skipped, 0u);
      EXPECT_EQ(report.view_tag_passes, report.matches.size() + report.address_mismatches);
    }
  }
}

TEST(Workload, EfficientCurvyDelegatesToSapScan) {
  const auto& pool = shared_pool();
  const auto input = pool.materialize(KernelId::efficient_curvy, 400);
  const auto& anns = std::get<std::vector<sap::Announcement>>(input);
  const auto direct = sap::scan(*pool.keys().recipient, anns);
  for (std::size_t workers : {1u, 3u}) {
    const auto viaKernel = bench::kernel_scan(KernelId::efficient_curvy, pool.keys(), input, 1, workers);
    ASSERT_EQ(viaKernel.matches.size(), direct.matches.size());
    for (std::size_t i = 0; i < direct.matches.size(); ++i) {
      EXPECT_EQ(viaKernel.matches[i].sequence_no, direct.matches[i].sequence_no);
      EXPECT_EQ(viaKernel.matches[i].stealth_address, direct.matches[i].stealth_address);
    }
    EXPECT_EQ(viaKernel.view_tag_passes, direct.view_tag_passes);
    EXPECT_EQ(viaKernel.dominant_ops, direct.decapsulations);
  }
}

TEST(Workload, SameSeedGivesIdenticalInputs) {
  const std::array kernels{KernelId::efficient_curvy, KernelId::curvy_pairing, KernelId::dksap_ecdh};
  const bench::WorkloadPool a(11, 50, 1, kernels, pairing::PairingCurve::bls12_381, kem::ParameterSet::kyber768);
  const bench::WorkloadPool b(11, 50, 1, kernels, pairing::PairingCurve::bls12_381, kem::ParameterSet::kyber768);
  const bench::WorkloadPool c(12, 50, 1, kernels, pairing::PairingCurve::bls12_381, kem::ParameterSet::kyber768);

  auto kem_a = std::get<0>(a.materialize(KernelId::efficient_curvy, 50));
  EXPECT_EQ(kem_a, std::get<0>(b.materialize(KernelId::efficient_curvy, 50)));
  EXPECT_NE(kem_a, std::get<0>(c.materialize(KernelId::efficient_curvy, 50)));

  auto pa = std::get<1>(a.materialize(KernelId::curvy_pairing, 50));
  auto pb = std::get<1>(b.materialize(KernelId::curvy_pairing, 50));
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].ephemeral, pb[i].ephemeral);
    EXPECT_EQ(pa[i].view_tag, pb[i].view_tag);
    EXPECT_EQ(pa[i].stealth_address, pb[i].stealth_address);
  }

  auto ea = std::get<2>(a.materialize(KernelId::dksap_ecdh, 50));
  auto eb = std::get<2>(b.materialize(KernelId::dksap_ecdh, 50));
  for (std::size_t i = 0; i < ea.size(); ++i) {
    EXPECT_EQ(ea[i].ephemeral, eb[i].ephemeral);
    EXPECT_EQ(ea[i].view_tag, eb[i].view_tag);
  }
}

TEST(Workload, ViewTagPassRatesAgreeAcrossKernels) {
  // 5000 foreign announcements, tag_len 1: Binomial(5000, 1/256), mean
  // 19.53, sigma 4.41. Each kernel must land within 4 sigma, and every pair
  // of kernels within 4 sigma of their difference (sigma * sqrt 2).
  constexpr std::size_t n = 5000;
  const bench::WorkloadPool pool(21, n, 1, bench::kAllKernels, pairing::PairingCurve::bls12_381,
                                 kem::ParameterSet::kyber768);
  const double mean = n / 256.0;
  const double sigma = std::sqrt(n * (1.0 / 256) * (255.0 / 256));
  std::vector<double> passes;
  for (KernelId k : bench::kAllKernels) {
    const auto r = bench::kernel_scan(k, pool.keys(), pool.foreign_only(k, n), 1);
    EXPECT_TRUE(r.matches.empty()) << bench::name(k);
    EXPECT_EQ(r.address_mismatches, r.view_tag_passes) << bench::name(k);
    EXPECT_NEAR(static_cast<double>(r.view_tag_passes), mean, 4 * sigma) << bench::name(k);
    passes.push_back(static_cast<double>(r.view_tag_passes));
  }
  for (std::size_t i = 0; i < passes.size(); ++i)
    for (std::size_t j = i + 1; j < passes.size(); ++j)
      EXPECT_LE(std::abs(passes[i] - passes[j]), 4 * sigma * std::sqrt(2.0));
}

TEST(Kernels, MissingKeyMaterialIsAConfigurationError) {
  const auto& pool = shared_pool();
  bench::KernelKeys none;
  for (KernelId k : bench::kAllKernels) {
    try {
      bench::kernel_scan(k, none, pool.materialize(k, 10), 1);
      FAIL() << bench::name(k);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::configuration);
    }
  }
  bench::KernelKeys only_recipient;
  only_recipient.recipient = pool.keys().recipient;
  EXPECT_NO_THROW(bench::kernel_scan(KernelId::efficient_curvy, only_recipient,
                                     pool.materialize(KernelId::efficient_curvy, 10), 1));
  for (KernelId k : {KernelId::mlwe_sap, KernelId::curvy_pairing, KernelId::dksap_ecdh})
    EXPECT_THROW(bench::kernel_scan(k, only_recipient, pool.materialize(k, 10), 1), Error);

  try {
    bench::kernel_scan(KernelId::curvy_pairing, pool.keys(), pool.materialize(KernelId::dksap_ecdh, 10), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::configuration);
  }
}

TEST(Kernels, MalformedAnnouncementsAreSkipped) {
  const auto& pool = shared_pool();
  auto pairing_in = std::get<std::vector<bench::PairingAnnouncement>>(pool.materialize(KernelId::curvy_pairing, 20));
  pairing_in[0].ephemeral.back() ^= 1;
  pairing_in[1].view_tag.push_back(0);
  auto r = bench::kernel_scan(KernelId::curvy_pairing, pool.keys(), pairing_in, 1);
  EXPECT_EQ(r.malformed_skipped, 2u);
  EXPECT_EQ(r.dominant_ops, 18u);

  auto ec_in = std::get<std::vector<bench::EcAnnouncement>>(pool.materialize(KernelId::dksap_ecdh, 20));
  ec_in[3].ephemeral = curve::CurvePoint::identity();
  r = bench::kernel_scan(KernelId::dksap_ecdh, pool.keys(), ec_in, 1);
  EXPECT_EQ(r.malformed_skipped, 1u);

  auto kem_in = std::get<std::vector<sap::Announcement>>(pool.materialize(KernelId::mlwe_sap, 20));
  kem_in[2].ephemeral_ct.pop_back();
  r = bench::kernel_scan(KernelId::mlwe_sap, pool.keys(), kem_in, 1);
  EXPECT_EQ(r.malformed_skipped, 1u);
  EXPECT_EQ(r.dominant_ops, 19u);
}

TEST(Kernels, Bn254PairingKernel) {
  if (!pairing::available(pairing::PairingCurve::bn254)) GTEST_SKIP();
  const std::array kernels{KernelId::curvy_pairing};
  const bench::WorkloadPool pool(3, 200, 1, kernels, pairing::PairingCurve::bn254, kem::ParameterSet::kyber768);
  const auto r = bench::kernel_scan(KernelId::curvy_pairing, pool.keys(), pool.materialize(KernelId::curvy_pairing, 200), 1);
  EXPECT_EQ(r.matches.size(), bench::kPlantedPerRun);
  EXPECT_EQ(r.dominant_ops, 200u);
}

TEST(Config, DefaultsFollowTheExperimentLadder) {
  const bench::BenchConfig cfg;
  EXPECT_EQ(cfg.counts, (std::vector<std::size_t>{5000, 10000, 20000, 40000, 80000}));
  EXPECT_EQ(cfg.seeds.size(), 10u);
  EXPECT_EQ(cfg.tag_len, 1u);
  EXPECT_EQ(cfg.kernels.size(), 4u);
  EXPECT_NO_THROW(bench::validate(cfg));
  const auto parsed = bench::parse_config("# nothing set\n\n");
  EXPECT_EQ(parsed.counts, cfg.counts);
  EXPECT_EQ(parsed.seeds, cfg.seeds);
}

TEST(Config, ParsesAllKeys) {
  const auto cfg = bench::parse_config(
      "counts = 100, 200,400\n"
      "seeds = 3..5, 9   # trailing comment\n"
      "tag_len = 2\n"
      "kernels = dksap_ecdh, efficient_curvy\n"
      "curve = bls12_381\n"
      "kem = kyber512\n"
      "warmup = 0\n"
      "parallel_workers = 2\n");
  EXPECT_EQ(cfg.counts, (std::vector<std::size_t>{100, 200, 400}));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4, 5, 9}));
  EXPECT_EQ(cfg.tag_len, 2u);
  EXPECT_EQ(cfg.kernels, (std::vector<KernelId>{KernelId::dksap_ecdh, KernelId::efficient_curvy}));
  EXPECT_EQ(cfg.kem, kem::ParameterSet::kyber512);
  EXPECT_EQ(cfg.warmup, 0u);
  EXPECT_EQ(cfg.parallel_workers, 2u);
}

TEST(Config, RejectsInvalidSettings) {
  for (const char* text : {"counts = 200, 100", "counts = 10, 10", "counts = 4", "counts = ", "seeds = 5..3",
                           "seeds = 1, 1", "tag_len = 0", "tag_len = 33", "kernels = curvy", "kernels = ",
                           "curve = bn256", "kem = kyber", "colour = blue", "counts 100", "warmup = -1",
                           "parallel_workers = 0"}) {
    try {
      bench::parse_config(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::configuration) << text;
    }
  }
}

TEST(Fit, LinearRegression) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = bench::fit_linear(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  // y = {1, 3, 2, 4}: slope 0.8, r = 0.8.
  const auto g = bench::fit_linear(x, std::vector<double>{1, 3, 2, 4});
  EXPECT_NEAR(g.slope, 0.8, 1e-12);
  EXPECT_NEAR(g.r2, 0.64, 1e-12);
  EXPECT_THROW(bench::fit_linear(std::vector<double>{1, 1}, std::vector<double>{1, 2}), Error);
}

class SmallBench : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench::BenchConfig cfg;
    cfg.counts = {40, 80};
    cfg.seeds = {1, 2};
    cfg.warmup = 8;
    cfg.parallel_workers = 2;
    result_ = new bench::BenchResult(bench::run_bench(cfg));
  }
  static void TearDownTestSuite() { delete result_; }
  static bench::BenchResult* result_;
};
bench::BenchResult* SmallBench::result_ = nullptr;

TEST_F(SmallBench, SeriesCoverEveryKernelCountAndSeed) {
  const std::vector<std::string> labels{"efficient_curvy", "efficient_curvy_parallel", "mlwe_sap",
                                        "curvy_pairing", "dksap_ecdh"};
  ASSERT_EQ(result_->series.size(), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& s = result_->series[i];
    EXPECT_EQ(s.label, labels[i]);
    ASSERT_EQ(s.points.size(), 2u);
    for (const auto& p : s.points) {
      ASSERT_EQ(p.samples.size(), 2u);
      for (const auto& x : p.samples) {
        EXPECT_EQ(x.matches, bench::kPlantedPerRun);
        EXPECT_EQ(x.dominant_ops, p.count);
        EXPECT_GT(x.elapsed_ns, 0u);
      }
      const double mean = (static_cast<double>(p.samples[0].elapsed_ns) + p.samples[1].elapsed_ns) / 2;
      EXPECT_DOUBLE_EQ(p.mean_ns(), mean);
    }
  }
  const auto r = result_->ratio("curvy_pairing", 80);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(*r, result_->find("curvy_pairing")->at(80)->mean_ns() /
                           result_->find("efficient_curvy")->at(80)->mean_ns());
  EXPECT_FALSE(result_->ratio("nonexistent", 80).has_value());
}

TEST_F(SmallBench, CsvRoundTrip) {
  std::ostringstream out;
  bench::emit_report(*result_, bench::ReportFormat::csv, out);
  const std::string text = out.str();
  const auto parsed = bench::parse_csv(text);
  EXPECT_EQ(parsed.counts, result_->counts);
  ASSERT_EQ(parsed.series.size(), result_->series.size());
  for (std::size_t i = 0; i < parsed.series.size(); ++i) {
    EXPECT_EQ(parsed.series[i].label, result_->series[i].label);
    for (std::size_t j = 0; j < parsed.series[i].points.size(); ++j) {
      const auto& a = parsed.series[i].points[j].samples;
      const auto& b = result_->series[i].points[j].samples;
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].seed, b[k].seed);
        EXPECT_EQ(a[k].elapsed_ns, b[k].elapsed_ns);
        EXPECT_EQ(a[k].view_tag_passes, b[k].view_tag_passes);
        EXPECT_EQ(a[k].dominant_ops, b[k].dominant_ops);
        EXPECT_EQ(a[k].matches, b[k].matches);
      }
    }
  }

  // Aggregate means recomputed from the per-seed rows match the emitted ones exactly.
  const auto agg = bench::parse_aggregate(text);
  ASSERT_EQ(agg.size(), 10u);
  for (const auto& row : agg) {
    const auto* s = parsed.find(row.label);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(row.mean_ns, s->at(row.count)->mean_ns()) << row.label;
    ASSERT_TRUE(row.ratio.has_value());
    EXPECT_EQ(*row.ratio, *parsed.ratio(row.label, row.count));
  }
  EXPECT_EQ(text.find("kernel,count,seed,elapsed_ns"), 0u);
}

TEST_F(SmallBench, TableListsKernelsInDeclaredOrder) {
  std::ostringstream out;
  bench::emit_report(*result_, bench::ReportFormat::table, out);
  const std::string text = out.str();
  std::size_t last = 0;
  for (const char* label : {"efficient_curvy", "efficient_curvy_parallel", "mlwe_sap", "curvy_pairing", "dksap_ecdh"}) {
    const auto pos = text.find(std::string(" ") + label);
    ASSERT_NE(pos, std::string::npos) << label;
    EXPECT_GT(pos, last) << label;
    last = pos;
  }
  EXPECT_NE(text.find("linear fit R^2"), std::string::npos);
}

TEST_F(SmallBench, UnwritablePathIsAStorageError) {
  try {
    bench::emit_report(*result_, bench::ReportFormat::csv, std::string("/nonexistent-dir/x.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::storage);
  }
  EXPECT_THROW(bench::parse_format("xml"), Error);
}

TEST(CsvParse, RejectsMalformedInput) {
  EXPECT_THROW(bench::parse_csv("kernel,count\n"), Error);
  EXPECT_THROW(bench::parse_csv("kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches\nx,1,2\n"), Error);
  EXPECT_THROW(bench::parse_csv("kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches\nx,1,2,z,0,0,0\n"),
               Error);
  EXPECT_THROW(bench::parse_aggregate("kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches\n"), Error);
}

}  // namespace
