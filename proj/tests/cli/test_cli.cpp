// Drives the ecsap binary as a subprocess.

#include <gtest/gtest.h>
#include <sys/stat.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "ecsap/curve_engine.hpp"
#include "ecsap/sap_core.hpp"
#include "temp_dir.hpp"

namespace {

using json = nlohmann::json;

struct Outcome {
  int rc;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  // Captures stdout; stderr is merged only when asked.
  Outcome run(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(ECSAP_CLI_PATH) + " --data-dir " + (dir_.path() / "data").string() +
                            " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
  }

  std::string path(const std::string& name) const { return (dir_.path() / name).string(); }

  std::string keygen(const std::string& name, const std::string& extra = "") {
    const Outcome r = run("keygen --out " + path(name) + " " + extra);
    EXPECT_EQ(r.rc, 0) << r.out;
    return r.out.substr(0, r.out.find('\n'));
  }

  static std::vector<json> lines(const std::string& out) {
    std::vector<json> v;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) v.push_back(json::parse(line));
    return v;
  }

  ecsap::testkit::TempDir dir_;
};

TEST_F(Cli, KeygenWritesOwnerOnlyFileAndRefusesOverwrite) {
  const std::string meta = keygen("k.json");
  EXPECT_NO_THROW(ecsap::sap::decode_meta(meta));
  struct stat st {};
  ASSERT_EQ(::stat(path("k.json").c_str(), &st), 0);
  EXPECT_EQ(st.st_mode & 0777, 0600u);

  EXPECT_EQ(run("keygen --out " + path("k.json")).rc, 3);
  const Outcome forced = run("keygen --out " + path("k.json") + " --force");
  EXPECT_EQ(forced.rc, 0);
  EXPECT_NE(forced.out.substr(0, forced.out.find('\n')), meta);
  ASSERT_EQ(::stat(path("k.json").c_str(), &st), 0);
  EXPECT_EQ(st.st_mode & 0777, 0600u);
}

TEST_F(Cli, SeededKeygenIsReproducible) {
  const std::string a = keygen("a.json", "--seed 42");
  const std::string b = keygen("b.json", "--seed 42");
  EXPECT_EQ(a, b);
  // Same fixture as the seeded recipient_setup pin.
  EXPECT_EQ(ecsap::to_hex(ecsap::sap::decode_meta(a).spend_pub.compressed()),
            "038579eb208215f5c383ae2e151402856f0144e51e87843104b6ad0a931c550219");
  EXPECT_NE(a, keygen("c.json", "--seed 43"));
}

TEST_F(Cli, KeygenNeverPrintsPrivateMaterial) {
  const Outcome r = run("--json keygen --out " + path("k.json") + " --seed 5", true);
  ASSERT_EQ(r.rc, 0);
  std::ifstream in(path("k.json"));
  const json key = json::parse(in);
  EXPECT_EQ(r.out.find(key["spend_priv"].get<std::string>()), std::string::npos);
  EXPECT_EQ(r.out.find(key["view_priv"].get<std::string>().substr(0, 64)), std::string::npos);
}

TEST_F(Cli, RegisterResolveAndExitCodes) {
  const std::string meta = keygen("k.json");
  EXPECT_EQ(run("register alice " + meta).rc, 0);
  const Outcome r = run("resolve alice");
  EXPECT_EQ(r.rc, 0);
  EXPECT_EQ(r.out, meta + "\n");
  EXPECT_EQ(run("register alice " + meta).rc, 3);
  EXPECT_EQ(run("resolve bob").rc, 2);
  EXPECT_EQ(run("register carol st:eth:0x1234").rc, 4);
  EXPECT_EQ(run("register dave nonsense").rc, 4);
  EXPECT_EQ(run("frobnicate").rc, 4);
  EXPECT_EQ(run("--help").rc, 0);
}

TEST_F(Cli, SendThenScanFindsThePayment) {
  const std::string meta = keygen("k.json");
  ASSERT_EQ(run("register alice " + meta).rc, 0);

  const Outcome empty = run("--json scan --keys " + path("k.json"));
  ASSERT_EQ(empty.rc, 0);
  auto summary = lines(empty.out).back();
  EXPECT_EQ(summary["matches"], 0);
  EXPECT_EQ(summary["cursor"], 0);

  const Outcome sent = run("--json send --to alice");
  ASSERT_EQ(sent.rc, 0);
  const json s = lines(sent.out).at(0);
  ASSERT_TRUE(s.contains("address"));
  ASSERT_TRUE(s.contains("seq"));
  EXPECT_EQ(s["seq"], 0);
  EXPECT_EQ(run("send --to nobody").rc, 2);

  // Payments to someone else are not reported.
  const std::string other = keygen("other.json");
  ASSERT_EQ(run("send --meta " + other).rc, 0);

  const Outcome scanned = run("--json scan --keys " + path("k.json") + " --reveal-keys");
  ASSERT_EQ(scanned.rc, 0);
  const auto out = lines(scanned.out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0]["seq"], 0);
  EXPECT_EQ(out[0]["address"], s["address"]);
  // The revealed key controls the announced address.
  const auto priv = ecsap::curve::Scalar::from_hex(out[0]["stealth_priv"].get<std::string>());
  EXPECT_EQ(ecsap::curve::address_to_string(ecsap::curve::eth_address(ecsap::curve::mul_generator(priv))),
            s["address"].get<std::string>());
  EXPECT_EQ(out[1]["cursor"], 2);
  EXPECT_EQ(out[1]["scanned"], 2);

  // Resumed scan does not re-report; new payments are picked up.
  EXPECT_EQ(lines(run("--json scan --keys " + path("k.json")).out).back()["matches"], 0);
  ASSERT_EQ(run("send --to alice --tag-len 1").rc, 0);
  const auto resumed = lines(run("--json scan --keys " + path("k.json")).out);
  ASSERT_EQ(resumed.size(), 2u);
  EXPECT_EQ(resumed[0]["seq"], 2);
  EXPECT_EQ(resumed[1]["cursor"], 3);

  // --since rewinds.
  EXPECT_EQ(lines(run("--json scan --keys " + path("k.json") + " --since 0").out).back()["matches"], 2);
}

TEST_F(Cli, ScanHidesKeysWithoutRevealFlag) {
  const std::string meta = keygen("k.json");
  ASSERT_EQ(run("send --meta " + meta).rc, 0);
  const Outcome hidden = run("scan --keys " + path("k.json"), true);
  ASSERT_EQ(hidden.rc, 0);
  const Outcome shown = run("--json scan --since 0 --keys " + path("k.json") + " --reveal-keys");
  const std::string priv = lines(shown.out).at(0)["stealth_priv"];
  EXPECT_EQ(hidden.out.find(priv), std::string::npos);
  EXPECT_EQ(hidden.out.find("priv"), std::string::npos);
  const Outcome hidden_json = run("--json scan --since 0 --keys " + path("k.json"), true);
  EXPECT_EQ(hidden_json.out.find(priv), std::string::npos);
}

TEST_F(Cli, RefusesGroupReadableKeyFiles) {
  keygen("k.json");
  ASSERT_EQ(::chmod(path("k.json").c_str(), 0644), 0);
  EXPECT_EQ(run("scan --keys " + path("k.json")).rc, 4);
  EXPECT_EQ(run("scan --keys " + path("k.json") + " --insecure").rc, 0);
  EXPECT_EQ(run("scan --keys " + path("missing.json")).rc, 2);
}

TEST_F(Cli, SplitLogRoundTrip) {
  const std::string meta = keygen("k.json");
  const std::string log = path("split.log");
  ASSERT_EQ(run("send --meta " + meta + " --registry " + log + " --log-mode split").rc, 0);
  ASSERT_EQ(run("send --meta " + meta + " --registry " + log).rc, 0);
  const auto out = lines(run("--json scan --keys " + path("k.json") + " --registry " + log).out);
  EXPECT_EQ(out.back()["matches"], 2);
}

TEST_F(Cli, CorruptedKeyFileIsBadInput) {
  {
    std::ofstream f(path("bad.json"));
    f << "{\"version\": 1}";
  }
  ASSERT_EQ(::chmod(path("bad.json").c_str(), 0600), 0);
  EXPECT_EQ(run("scan --keys " + path("bad.json")).rc, 4);
}

TEST_F(Cli, BenchDefaultConfigAndKernelSubset) {
  const Outcome cfg = run("bench --show-config");
  ASSERT_EQ(cfg.rc, 0);
  const json c = json::parse(cfg.out);
  EXPECT_EQ(c["counts"], json({5000, 10000, 20000, 40000, 80000}));
  EXPECT_EQ(c["seeds"].size(), 10u);
  EXPECT_EQ(c["tag_len"], 1);

  const Outcome r = run("bench --counts 20,40 --seeds 1 --kernels dksap_ecdh,efficient_curvy --quiet");
  ASSERT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("efficient_curvy,20,1,"), std::string::npos);
  EXPECT_NE(r.out.find("dksap_ecdh,40,1,"), std::string::npos);
  EXPECT_EQ(r.out.find("curvy_pairing"), std::string::npos);
  EXPECT_EQ(r.out.find("mlwe_sap"), std::string::npos);

  {
    std::ofstream f(path("bench.conf"));
    f << "counts = 10, 20\nseeds = 4\nkernels = mlwe_sap\n";
  }
  const Outcome t = run("bench --config " + path("bench.conf") + " --format table --quiet --out " + path("t.txt"));
  ASSERT_EQ(t.rc, 0);
  std::ifstream table(path("t.txt"));
  std::stringstream ss;
  ss << table.rdbuf();
  EXPECT_NE(ss.str().find("mlwe_sap"), std::string::npos);

  EXPECT_EQ(run("bench --kernels nope --quiet").rc, 4);
  EXPECT_EQ(run("bench --counts 20,10 --quiet").rc, 4);
}

}  // namespace
