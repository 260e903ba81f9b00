// ecsap: command-line front end.
//
// Exit codes: 0 ok, 1 internal, 2 not found, 3 conflict, 4 bad input.
// With --json every command writes one JSON object per line to stdout.

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "ecsap/baselines_bench.hpp"
#include "ecsap/entropy.hpp"
#include "ecsap/errors.hpp"
#include "ecsap/registry_store.hpp"
#include "ecsap/sap_core.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ecsap;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kNotFound = 2, kConflict = 3, kBadInput = 4 };

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::not_found:
      return kNotFound;
    case Errc::conflict:
      return kConflict;
    case Errc::invalid_modulus:
    case Errc::invalid_parameter:
    case Errc::invalid_input:
    case Errc::format_error:
    case Errc::invalid_point:
    case Errc::bad_prefix:
    case Errc::bad_hex:
    case Errc::wrong_length:
    case Errc::configuration:
    case Errc::permission:
      return kBadInput;
    default:
      return kInternal;
  }
}

struct Globals {
  std::string data_dir;
  bool json = false;
};

fs::path data_dir(const Globals& g) {
  fs::path dir = g.data_dir;
  if (dir.empty()) {
    const char* env = std::getenv("ECSAP_DATA_DIR");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("ecsap-data");
  }
  if (!fs::exists(dir)) {
    fs::create_directories(dir);
    fs::permissions(dir, fs::perms::owner_all, fs::perm_options::replace);
  }
  return dir;
}

fs::path log_path(const Globals& g, const std::string& override_path) {
  return override_path.empty() ? data_dir(g) / "announcements.log" : fs::path(override_path);
}

// ---- key files ----

void write_private_file(const fs::path& path, const std::string& content, bool overwrite) {
  const fs::path target = overwrite ? fs::path(path.string() + ".tmp") : path;
  if (overwrite) ::unlink(target.c_str());
  const int fd = ::open(target.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0600);
  if (fd < 0) {
    if (errno == EEXIST) throw Error(Errc::conflict, path.string() + " exists; pass --force to overwrite");
    throw Error(Errc::storage, "cannot create " + target.string() + ": " + std::strerror(errno));
  }
  const bool ok = ::fchmod(fd, 0600) == 0 &&
                  ::write(fd, content.data(), content.size()) == static_cast<ssize_t>(content.size()) &&
                  ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) {
    ::unlink(target.c_str());
    throw Error(Errc::storage, "cannot write " + target.string());
  }
  if (overwrite && ::rename(target.c_str(), path.c_str()) != 0)
    throw Error(Errc::storage, "cannot replace " + path.string() + ": " + std::strerror(errno));
}

std::string read_private_file(const fs::path& path, bool insecure) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) throw Error(Errc::not_found, "no such key file: " + path.string());
  if ((st.st_mode & 077) != 0 && !insecure)
    throw Error(Errc::permission, path.string() + " is readable by group or others (mode " +
                                      [&] {
                                        std::ostringstream o;
                                        o << std::oct << (st.st_mode & 0777);
                                        return o.str();
                                      }() +
                                      "); chmod 600 it or pass --insecure");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::storage, "cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void wipe(std::string& s) {
  secure_zero(std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(s.data()), s.size()));
  s.clear();
}

std::string key_file_text(const sap::RecipientKeys& keys) {
  json j;
  j["version"] = 1;
  j["kem"] = std::string(kem::name(keys.parameter_set()));
  j["spend_priv"] = keys.spend_priv.to_hex();
  j["view_priv"] = to_hex(keys.view_priv.bytes());
  j["meta"] = sap::encode_meta(sap::meta_address_of(keys));
  std::string out = j.dump(2) + "\n";
  wipe(j["spend_priv"].get_ref<std::string&>());
  wipe(j["view_priv"].get_ref<std::string&>());
  return out;
}

sap::RecipientKeys load_keys(const fs::path& path, bool insecure) {
  std::string text = read_private_file(path, insecure);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    wipe(text);
    throw Error(Errc::format_error, "key file " + path.string() + " is not valid JSON");
  }
  wipe(text);
  try {
    if (j.at("version").get<int>() != 1) throw Error(Errc::format_error, "unsupported key file version");
    const auto ps = kem::parse_parameter_set(j.at("kem").get<std::string>());
    if (!ps) throw Error(Errc::format_error, "unknown KEM parameter set in key file");
    std::string& spend_hex = j.at("spend_priv").get_ref<std::string&>();
    std::string& view_hex = j.at("view_priv").get_ref<std::string&>();
    const auto spend = curve::spend_keypair_from(curve::Scalar::from_hex(spend_hex));
    kem::SecretKey view(*ps, from_hex(view_hex));
    wipe(spend_hex);
    wipe(view_hex);
    sap::RecipientKeys keys{spend.k, spend.K, view.public_key(), std::move(view)};
    if (j.contains("meta") && j["meta"].get<std::string>() != sap::encode_meta(sap::meta_address_of(keys)))
      throw Error(Errc::format_error, "key file meta-address does not match its private keys");
    return keys;
  } catch (const json::exception&) {
    throw Error(Errc::format_error, "key file " + path.string() + " is missing fields");
  }
}

fs::path cursor_path(const fs::path& keys) { return fs::path(keys.string() + ".cursor"); }

std::uint64_t read_cursor(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return 0;
  std::uint64_t v = 0;
  if (!(in >> v)) throw Error(Errc::format_error, "unreadable cursor file " + path.string());
  return v;
}

void write_cursor(const fs::path& path, std::uint64_t cursor) {
  write_private_file(path, std::to_string(cursor) + "\n", true);
}

// ---- commands ----

void emit(const Globals& g, const json& j, const std::string& text) {
  if (g.json) {
    std::cout << j.dump() << "\n";
  } else if (!text.empty()) {
    std::cout << text << "\n";
  }
}

struct KeygenArgs {
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::string kem = "kyber768";
};

void cmd_keygen(const Globals& g, const KeygenArgs& a) {
  const auto ps = kem::parse_parameter_set(a.kem);
  if (!ps) throw Error(Errc::invalid_parameter, "unknown KEM parameter set: " + a.kem);
  std::optional<SeededEntropy> seeded;
  if (a.seed) seeded.emplace(*a.seed, "fixture");
  EntropySource& rng = seeded ? static_cast<EntropySource&>(*seeded) : system_entropy();
  const auto [keys, meta] = sap::recipient_setup(rng, *ps);
  std::string text = key_file_text(keys);
  try {
    write_private_file(a.out, text, a.force);
  } catch (...) {
    wipe(text);
    throw;
  }
  wipe(text);
  const std::string encoded = sap::encode_meta(meta);
  emit(g, {{"keys", a.out}, {"meta", encoded}, {"kem", a.kem}}, encoded);
}

void cmd_register(const Globals& g, const std::string& name, const std::string& meta) {
  registry::MetaRegistry reg(data_dir(g) / "names.reg");
  reg.register_name(name, sap::decode_meta(meta));
  emit(g, {{"registered", name}}, "registered " + name);
}

void cmd_resolve(const Globals& g, const std::string& name) {
  const registry::MetaRegistry reg(data_dir(g) / "names.reg");
  const std::string meta = sap::encode_meta(reg.resolve_name(name));
  emit(g, {{"name", name}, {"meta", meta}}, meta);
}

struct SendArgs {
  std::string to;
  std::string meta;
  std::size_t tag_len = sap::kDefaultTagLen;
  std::string registry;
  std::string log_mode = "inline";
  std::optional<std::uint64_t> seed;
};

void cmd_send(const Globals& g, const SendArgs& a) {
  sap::StealthMetaAddress meta = !a.meta.empty()
                                     ? sap::decode_meta(a.meta)
                                     : registry::MetaRegistry(data_dir(g) / "names.reg").resolve_name(a.to);
  std::optional<SeededEntropy> seeded;
  if (a.seed) seeded.emplace(*a.seed, "ecsap.cli.send");
  EntropySource& rng = seeded ? static_cast<EntropySource&>(*seeded) : system_entropy();
  const auto outcome = sap::send(meta, a.tag_len, rng);
  const auto mode = a.log_mode == "split" ? registry::LogMode::split : registry::LogMode::inline_payload;
  auto log = registry::AnnouncementLog::open(log_path(g, a.registry), mode);
  const std::uint64_t seq = log.append(outcome.announcement);
  const std::string address = curve::address_to_string(outcome.stealth_address);
  emit(g, {{"address", address}, {"seq", seq}}, address + " seq " + std::to_string(seq));
}

struct ScanArgs {
  std::string keys;
  std::string registry;
  std::optional<std::uint64_t> since;
  bool reveal_keys = false;
  bool insecure = false;
  std::size_t workers = 1;
  std::size_t tag_len = sap::kDefaultTagLen;
};

void cmd_scan(const Globals& g, const ScanArgs& a) {
  const sap::RecipientKeys keys = load_keys(a.keys, a.insecure);
  const fs::path cpath = cursor_path(a.keys);
  const std::uint64_t cursor = a.since ? *a.since : read_cursor(cpath);
  const fs::path lpath = log_path(g, a.registry);

  std::vector<sap::Announcement> anns;
  if (fs::exists(lpath)) anns = registry::AnnouncementLog::open(lpath).stream_since(cursor);
  const auto report = sap::scan(keys, anns, {a.tag_len, a.workers});
  const std::uint64_t next = anns.empty() ? cursor : anns.back().sequence_no + 1;

  for (const auto& m : report.matches) {
    json j{{"seq", m.sequence_no}, {"address", curve::address_to_string(m.stealth_address)}};
    std::string text = "match seq " + std::to_string(m.sequence_no) + " " + curve::address_to_string(m.stealth_address);
    if (a.reveal_keys) {
      j["stealth_priv"] = m.stealth_priv.to_hex();
      text += " priv " + m.stealth_priv.to_hex();
    }
    emit(g, j, text);
  }
  write_cursor(cpath, next);
  emit(g,
       {{"scanned", report.announcements_scanned},
        {"matches", report.matches.size()},
        {"view_tag_passes", report.view_tag_passes},
        {"malformed_skipped", report.malformed_skipped},
        {"cursor", next}},
       "scanned " + std::to_string(report.announcements_scanned) + ", matches " +
           std::to_string(report.matches.size()) + ", cursor " + std::to_string(next));
}

struct BenchArgs {
  std::string config;
  std::string kernels;
  std::string counts;
  std::string seeds;
  std::string curve;
  std::string format = "csv";
  std::string out;
  bool quiet = false;
  bool show_config = false;
};

void print_progress(std::string_view label, std::size_t count, std::uint64_t seed, std::uint64_t ns, void*) {
  std::cerr << "bench " << label << " count " << count << " seed " << seed << ": " << ns / 1000000.0 << " ms\n";
}

void cmd_bench(const Globals& g, const BenchArgs& a) {
  bench::BenchConfig cfg = a.config.empty() ? bench::BenchConfig{} : bench::load_config(a.config);
  std::string overrides;
  if (!a.kernels.empty()) overrides += "kernels = " + a.kernels + "\n";
  if (!a.counts.empty()) overrides += "counts = " + a.counts + "\n";
  if (!a.seeds.empty()) overrides += "seeds = " + a.seeds + "\n";
  if (!a.curve.empty()) overrides += "curve = " + a.curve + "\n";
  if (!overrides.empty()) {
    const bench::BenchConfig o = bench::parse_config(overrides);
    if (!a.kernels.empty()) cfg.kernels = o.kernels;
    if (!a.counts.empty()) cfg.counts = o.counts;
    if (!a.seeds.empty()) cfg.seeds = o.seeds;
    if (!a.curve.empty()) cfg.curve = o.curve;
    bench::validate(cfg);
  }
  const auto format = bench::parse_format(a.format);
  if (a.show_config) {
    std::vector<std::string> kernels;
    for (auto k : cfg.kernels) kernels.emplace_back(bench::name(k));
    std::cout << json{{"counts", cfg.counts},
                      {"seeds", cfg.seeds},
                      {"tag_len", cfg.tag_len},
                      {"kernels", kernels},
                      {"curve", std::string(pairing::name(cfg.curve))},
                      {"kem", std::string(kem::name(cfg.kem))},
                      {"warmup", cfg.warmup},
                      {"parallel_workers", cfg.parallel_workers}}
                     .dump()
              << "\n";
    return;
  }
  const auto result = bench::run_bench(cfg, a.quiet ? nullptr : print_progress);
  if (!a.out.empty()) {
    bench::emit_report(result, format, a.out);
    emit(g, {{"report", a.out}}, "");
  } else {
    bench::emit_report(result, format, std::cout);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stealth address tool: Kyber-768 viewing keys, secp256k1 spending keys"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Data directory (default $ECSAP_DATA_DIR or ./ecsap-data)");
  app.add_flag("--json", g.json, "Emit JSON lines");

  KeygenArgs kg;
  auto* keygen = app.add_subcommand("keygen", "Create a recipient key bundle and print its meta-address");
  keygen->add_option("--out", kg.out, "Key file to write")->required();
  keygen->add_flag("--force", kg.force, "Overwrite an existing key file");
  keygen->add_option("--seed", kg.seed, "Deterministic keys (test fixtures only)");
  keygen->add_option("--kem", kg.kem, "kyber512, kyber768 or kyber1024")
      ->check(CLI::IsMember({"kyber512", "kyber768", "kyber1024"}));

  std::string reg_name, reg_meta;
  auto* reg = app.add_subcommand("register", "Bind a name to a meta-address");
  reg->add_option("name", reg_name)->required();
  reg->add_option("meta", reg_meta)->required();

  std::string res_name;
  auto* res = app.add_subcommand("resolve", "Look up a registered name");
  res->add_option("name", res_name)->required();

  SendArgs sa;
  auto* send = app.add_subcommand("send", "Derive a stealth address and publish the announcement");
  auto* to = send->add_option("--to", sa.to, "Registered recipient name");
  auto* meta = send->add_option("--meta", sa.meta, "Recipient meta-address");
  to->excludes(meta);
  send->add_option("--tag-len", sa.tag_len, "View tag length in bytes")->check(CLI::Range(1, 32));
  send->add_option("--registry", sa.registry, "Announcement log (default <data-dir>/announcements.log)");
  send->add_option("--log-mode", sa.log_mode, "Layout for a new log")->check(CLI::IsMember({"inline", "split"}));
  send->add_option("--seed", sa.seed, "Deterministic sender randomness (test fixtures only)");

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan", "Find payments addressed to a key bundle");
  scan->add_option("--keys", sc.keys, "Key file")->required();
  scan->add_option("--registry", sc.registry, "Announcement log (default <data-dir>/announcements.log)");
  scan->add_option("--since", sc.since, "First sequence number (default: saved cursor)");
  scan->add_flag("--reveal-keys", sc.reveal_keys, "Print stealth private keys");
  scan->add_flag("--insecure", sc.insecure, "Accept key files readable by group or others");
  scan->add_option("--workers", sc.workers, "Scan threads")->check(CLI::Range(1, 256));
  scan->add_option("--tag-len", sc.tag_len, "View tag length in bytes")->check(CLI::Range(1, 32));

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Time the scan kernels");
  bench_cmd->add_option("--config", ba.config, "key = value configuration file");
  bench_cmd->add_option("--kernels", ba.kernels, "Comma-separated kernel subset");
  bench_cmd->add_option("--counts", ba.counts, "Comma-separated announcement counts");
  bench_cmd->add_option("--seeds", ba.seeds, "Seeds, e.g. 1..10 or 3,5");
  bench_cmd->add_option("--curve", ba.curve, "bls12_381 or bn254");
  bench_cmd->add_option("--format", ba.format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
  bench_cmd->add_option("--out", ba.out, "Write the report here instead of stdout");
  bench_cmd->add_flag("--quiet", ba.quiet, "No progress on stderr");
  bench_cmd->add_flag("--show-config", ba.show_config, "Print the effective configuration and exit");

  for (auto* sub : {keygen, reg, res, send, scan, bench_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*keygen) cmd_keygen(g, kg);
    if (*reg) cmd_register(g, reg_name, reg_meta);
    if (*res) cmd_resolve(g, res_name);
    if (*send) {
      if (sa.to.empty() && sa.meta.empty()) throw Error(Errc::invalid_input, "send needs --to or --meta");
      cmd_send(g, sa);
    }
    if (*scan) cmd_scan(g, sc);
    if (*bench_cmd) cmd_bench(g, ba);
    return kOk;
  } catch (const IntegrityError& e) {
    std::cerr << "error: " << e.what() << " (record " << e.sequence_no() << ")\n";
    if (g.json) std::cout << json{{"error", e.what()}, {"seq", e.sequence_no()}}.dump() << "\n";
    return kInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (g.json) std::cout << json{{"error", e.what()}, {"kind", std::string(to_string(e.code()))}}.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
