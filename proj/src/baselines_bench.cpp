#include "ecsap/baselines_bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ecsap/entropy.hpp"
#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"

namespace ecsap::bench {

std::string_view name(KernelId kernel) noexcept {
  switch (kernel) {
    case KernelId::efficient_curvy:
      return "efficient_curvy";
    case KernelId::mlwe_sap:
      return "mlwe_sap";
    case KernelId::curvy_pairing:
      return "curvy_pairing";
    case KernelId::dksap_ecdh:
      return "dksap_ecdh";
  }
  return "unknown";
}

KernelId parse_kernel(std::string_view text) {
  for (KernelId k : kAllKernels)
    if (name(k) == text) return k;
  throw Error(Errc::invalid_parameter, "unknown kernel: " + std::string(text));
}

namespace {

constexpr std::string_view kParallelLabel = "efficient_curvy_parallel";

std::uint64_t elapsed_since(std::chrono::steady_clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start)
          .count());
}

bool tag_matches(ByteView tag, const hash::Digest32& digest) {
  return std::equal(tag.begin(), tag.end(), digest.begin());
}

// Tail shared by the two elliptic-curve comparators once S is known.
void finish_secp(const sap::RecipientKeys& keys, const hash::Digest32& s, ByteView tag,
                 const curve::EthAddress& announced, std::uint64_t seq, KernelReport& out) {
  if (!tag_matches(tag, hash::keccak256(s))) return;
  ++out.view_tag_passes;
  try {
    const curve::Scalar t = curve::xof_to_scalar(ByteView(s));
    const auto address = curve::eth_address(curve::derive_stealth_pub(keys.spend_pub, t));
    if (address != announced) {
      ++out.address_mismatches;
      return;
    }
    // sap::scan derives the spending key on a match; do the same work here.
    (void)curve::derive_stealth_priv(keys.spend_priv, t);
    out.matches.push_back({seq, address});
  } catch (const Error& e) {
    if (e.code() != Errc::resample_required) throw;
  }
}

[[noreturn]] void missing(KernelId kernel, const char* what) {
  throw Error(Errc::configuration,
              std::string(name(kernel)) + " needs " + what + " key material");
}

template <typename T>
const std::vector<T>& input_as(KernelId kernel, const KernelInput& input) {
  const auto* v = std::get_if<std::vector<T>>(&input);
  if (v == nullptr)
    throw Error(Errc::configuration, "announcement shape does not fit kernel " + std::string(name(kernel)));
  return *v;
}

KernelReport scan_efficient_curvy(const KernelKeys& keys, std::span<const sap::Announcement> anns,
                                  std::size_t tag_len, std::size_t workers) {
  if (!keys.recipient) missing(KernelId::efficient_curvy, "recipient");
  const sap::ScanReport r = sap::scan(*keys.recipient, anns, {tag_len, workers});
  KernelReport out;
  for (const auto& m : r.matches) out.matches.push_back({m.sequence_no, m.stealth_address});
  out.announcements_scanned = r.announcements_scanned;
  out.dominant_ops = r.decapsulations;
  out.view_tag_passes = r.view_tag_passes;
  out.address_mismatches = r.address_mismatches;
  out.malformed_skipped = r.malformed_skipped;
  out.elapsed_ns = r.elapsed_ns;
  return out;
}

KernelReport scan_mlwe_sap(const KernelKeys& keys, std::span<const sap::Announcement> anns,
                           std::size_t tag_len) {
  if (!keys.recipient) missing(KernelId::mlwe_sap, "recipient");
  if (!keys.lattice_spend) missing(KernelId::mlwe_sap, "lattice spend");
  const auto start = std::chrono::steady_clock::now();
  const auto ps = keys.recipient->parameter_set();
  KernelReport out;
  for (const auto& ann : anns) {
    ++out.announcements_scanned;
    if (sap::validate(ann, ps, tag_len)) {
      ++out.malformed_skipped;
      continue;
    }
    const kem::SharedSecret s = kem::decaps(keys.recipient->view_priv, ann.ephemeral_ct);
    ++out.dominant_ops;
    if (!tag_matches(ann.view_tag, hash::keccak256(s.view()))) continue;
    ++out.view_tag_passes;
    const auto address = lattice_stealth_address(*keys.lattice_spend, s.view());
    if (address != ann.stealth_address) {
      ++out.address_mismatches;
      continue;
    }
    out.matches.push_back({ann.sequence_no, address});
  }
  out.elapsed_ns = elapsed_since(start);
  return out;
}

KernelReport scan_curvy_pairing(const KernelKeys& keys, std::span<const PairingAnnouncement> anns,
                                std::size_t tag_len) {
  if (!keys.recipient) missing(KernelId::curvy_pairing, "recipient");
  if (!keys.pairing_engine || !keys.pairing_view) missing(KernelId::curvy_pairing, "pairing view");
  const auto& engine = *keys.pairing_engine;
  const auto start = std::chrono::steady_clock::now();
  KernelReport out;
  for (const auto& ann : anns) {
    ++out.announcements_scanned;
    if (ann.view_tag.size() != tag_len) {
      ++out.malformed_skipped;
      continue;
    }
    Bytes gt;
    try {
      gt = engine.pair(ann.ephemeral, *keys.pairing_view);
    } catch (const Error&) {
      ++out.malformed_skipped;
      continue;
    }
    ++out.dominant_ops;
    finish_secp(*keys.recipient, hash::keccak256(gt), ann.view_tag, ann.stealth_address,
                ann.sequence_no, out);
  }
  out.elapsed_ns = elapsed_since(start);
  return out;
}

KernelReport scan_dksap(const KernelKeys& keys, std::span<const EcAnnouncement> anns,
                        std::size_t tag_len) {
  if (!keys.recipient) missing(KernelId::dksap_ecdh, "recipient");
  if (!keys.ec_view) missing(KernelId::dksap_ecdh, "EC view");
  const auto start = std::chrono::steady_clock::now();
  KernelReport out;
  for (const auto& ann : anns) {
    ++out.announcements_scanned;
    if (ann.view_tag.size() != tag_len || ann.ephemeral.is_identity()) {
      ++out.malformed_skipped;
      continue;
    }
    const auto x = curve::ecdh_x(ann.ephemeral, *keys.ec_view);
    ++out.dominant_ops;
    finish_secp(*keys.recipient, hash::keccak256(x), ann.view_tag, ann.stealth_address,
                ann.sequence_no, out);
  }
  out.elapsed_ns = elapsed_since(start);
  return out;
}

void require_tag_len(std::size_t tag_len) {
  if (tag_len < 1 || tag_len > sap::kMaxTagLen)
    throw Error(Errc::invalid_parameter, "view tag length must be in [1, 32]");
}

}  // namespace

KernelReport kernel_scan(KernelId kernel, const KernelKeys& keys, const KernelInput& input,
                         std::size_t tag_len, std::size_t workers) {
  require_tag_len(tag_len);
  switch (kernel) {
    case KernelId::efficient_curvy:
      return scan_efficient_curvy(keys, input_as<sap::Announcement>(kernel, input), tag_len, workers);
    case KernelId::mlwe_sap:
      return scan_mlwe_sap(keys, input_as<sap::Announcement>(kernel, input), tag_len);
    case KernelId::curvy_pairing:
      return scan_curvy_pairing(keys, input_as<PairingAnnouncement>(kernel, input), tag_len);
    case KernelId::dksap_ecdh:
      return scan_dksap(keys, input_as<EcAnnouncement>(kernel, input), tag_len);
  }
  throw Error(Errc::invalid_parameter, "unknown kernel");
}

curve::EthAddress lattice_stealth_address(const lattice::RqVector& spend, ByteView shared_secret) {
  const std::int64_t q = spend[0].modulus();
  const std::size_t n = spend[0].degree_bound();
  if (q > 4096) throw Error(Errc::invalid_parameter, "12-bit packing needs q <= 4096");

  hash::Shake256 xof(shared_secret);
  const std::size_t total = spend.rank() * n;
  std::vector<std::int64_t> coeffs;
  coeffs.reserve(total);
  std::array<std::uint8_t, 168> block{};
  std::size_t pos = block.size();
  while (coeffs.size() < total) {
    if (pos == block.size()) {
      xof.squeeze(block);
      pos = 0;
    }
    for (std::uint16_t c : lattice::unpack_12bit(ByteView(block).subspan(pos, 3)))
      if (c < q && coeffs.size() < total) coeffs.push_back(c);
    pos += 3;
  }
  std::vector<lattice::RqPolynomial> offsets;
  for (std::size_t i = 0; i < spend.rank(); ++i)
    offsets.emplace_back(std::vector<std::int64_t>(coeffs.begin() + static_cast<std::ptrdiff_t>(i * n),
                                                   coeffs.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)),
                         q);
  const lattice::RqVector p = spend + lattice::RqVector(std::move(offsets));

  Bytes packed;
  packed.reserve(p.rank() * n * 3 / 2);
  for (const auto& poly : p.entries()) {
    for (std::size_t j = 0; j + 1 < n; j += 2) {
      const auto a = static_cast<std::uint16_t>(poly.coefficient(j).value());
      const auto b = static_cast<std::uint16_t>(poly.coefficient(j + 1).value());
      packed.push_back(static_cast<std::uint8_t>(a));
      packed.push_back(static_cast<std::uint8_t>((a >> 8) | (b << 4)));
      packed.push_back(static_cast<std::uint8_t>(b >> 4));
    }
  }
  const auto digest = hash::keccak256(packed);
  curve::EthAddress out;
  std::copy(digest.begin() + 12, digest.end(), out.begin());
  return out;
}

// ---- workloads ----

namespace {

constexpr std::size_t kForeignRecipients = 8;

Bytes random_bytes(EntropySource& rng, std::size_t n) {
  Bytes out(n);
  rng.fill(out);
  return out;
}

curve::EthAddress random_address(EntropySource& rng) {
  curve::EthAddress a;
  rng.fill(a);
  return a;
}

Bytes tag_of(const hash::Digest32& s, std::size_t tag_len) {
  const auto d = hash::keccak256(s);
  return Bytes(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(tag_len));
}

curve::EthAddress secp_address(const curve::CurvePoint& spend_pub, const hash::Digest32& s) {
  return curve::eth_address(curve::derive_stealth_pub(spend_pub, curve::xof_to_scalar(ByteView(s))));
}

template <typename T>
std::vector<T> interleave(const std::vector<T>& foreign, const std::vector<T>& planted,
                          const std::vector<std::size_t>& positions, std::size_t count) {
  std::vector<T> out;
  out.reserve(count);
  std::size_t f = 0, p = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (p < positions.size() && positions[p] == i) {
      out.push_back(planted[p++]);
    } else {
      out.push_back(foreign.at(f++));
    }
    out.back().sequence_no = i;
  }
  return out;
}

template <typename T>
std::vector<T> prefix(const std::vector<T>& all, std::size_t count) {
  std::vector<T> out(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
  for (std::size_t i = 0; i < count; ++i) out[i].sequence_no = i;
  return out;
}

}  // namespace

WorkloadPool::WorkloadPool(std::uint64_t seed, std::size_t max_count, std::size_t tag_len,
                           std::span<const KernelId> kernels, pairing::PairingCurve curve,
                           kem::ParameterSet ps)
    : seed_(seed), max_count_(max_count), tag_len_(tag_len), kernels_(kernels.begin(), kernels.end()),
      ps_(ps) {
  require_tag_len(tag_len);
  if (max_count < kPlantedPerRun)
    throw Error(Errc::configuration, "workload must hold at least the planted announcements");

  SeededEntropy key_rng(seed, "ecsap.bench.keys");
  auto [recipient, meta] = sap::recipient_setup(key_rng, ps);
  keys_.recipient = std::move(recipient);
  meta_ = std::move(meta);

  if (has(KernelId::mlwe_sap)) {
    const std::size_t rank = static_cast<std::size_t>(ps == kem::ParameterSet::kyber512 ? 2
                                                      : ps == kem::ParameterSet::kyber768 ? 3
                                                                                          : 4);
    lattice::RqVector spend(rank, lattice::kKyberN, lattice::kKyberQ);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < lattice::kKyberN; ++j)
        spend[i].set_coefficient(j, static_cast<std::int64_t>(key_rng.uniform(lattice::kKyberQ)));
    keys_.lattice_spend = std::move(spend);
  }
  if (has(KernelId::curvy_pairing)) {
    auto engine = std::shared_ptr<const pairing::PairingEngine>(pairing::make_engine(curve));
    const Bytes v = random_bytes(key_rng, 32);
    pairing_view_pub_ = engine->g1_mul_generator(v);
    keys_.pairing_view = engine->prepare_g2(engine->g2_mul_generator(v));
    Bytes one(32, 0);
    one.back() = 1;
    pairing_g2_generator_ = engine->prepare_g2(engine->g2_mul_generator(one));
    keys_.pairing_engine = std::move(engine);
  }
  if (has(KernelId::dksap_ecdh)) {
    const auto view = curve::spend_keygen(key_rng);
    keys_.ec_view = view.k;
    ec_view_pub_ = view.K;
  }

  if (has(KernelId::efficient_curvy) || has(KernelId::mlwe_sap)) {
    SeededEntropy rng(seed, "ecsap.bench.foreign.kem");
    std::vector<kem::PublicKey> others;
    for (std::size_t i = 0; i < kForeignRecipients; ++i) others.push_back(kem::keygen(rng, ps).public_key);
    foreign_kem_.reserve(max_count);
    for (std::size_t i = 0; i < max_count; ++i) {
      auto enc = kem::encaps(others[i % kForeignRecipients], rng);
      sap::Announcement ann;
      ann.kem = ps;
      ann.ephemeral_ct = enc.ciphertext.bytes();
      ann.view_tag = sap::compute_view_tag(enc.shared_secret, tag_len);
      ann.stealth_address = random_address(rng);
      foreign_kem_.push_back(std::move(ann));
    }
  }
  if (has(KernelId::curvy_pairing)) {
    SeededEntropy rng(seed, "ecsap.bench.foreign.pairing");
    const auto& engine = *keys_.pairing_engine;
    Bytes r = engine.g1_mul_generator(random_bytes(rng, 32));
    const Bytes step = engine.g1_mul_generator(random_bytes(rng, 32));
    foreign_pairing_.reserve(max_count);
    for (std::size_t i = 0; i < max_count; ++i) {
      r = engine.g1_add(r, step);
      foreign_pairing_.push_back({r, random_bytes(rng, tag_len), random_address(rng), 0});
    }
  }
  if (has(KernelId::dksap_ecdh)) {
    SeededEntropy rng(seed, "ecsap.bench.foreign.ec");
    curve::CurvePoint r = curve::spend_keygen(rng).K;
    const curve::CurvePoint step = curve::spend_keygen(rng).K;
    foreign_ec_.reserve(max_count);
    for (std::size_t i = 0; i < max_count; ++i) {
      r = curve::add(r, step);
      foreign_ec_.push_back({r, random_bytes(rng, tag_len), random_address(rng), 0});
    }
  }
}

bool WorkloadPool::has(KernelId kernel) const {
  return std::find(kernels_.begin(), kernels_.end(), kernel) != kernels_.end();
}

std::vector<std::size_t> WorkloadPool::planted_positions(std::size_t count) const {
  if (count < kPlantedPerRun || count > max_count_)
    throw Error(Errc::configuration, "count outside the pool's range: " + std::to_string(count));
  SeededEntropy rng(seed_, "ecsap.bench.positions." + std::to_string(count));
  std::set<std::size_t> chosen;
  while (chosen.size() < kPlantedPerRun) chosen.insert(rng.uniform(count));
  return {chosen.begin(), chosen.end()};
}

WorkloadPool::Planted WorkloadPool::plant(std::size_t count) const {
  Planted out;
  out.positions = planted_positions(count);
  SeededEntropy rng(seed_, "ecsap.bench.plant." + std::to_string(count));
  const auto& recipient = *keys_.recipient;
  for (std::size_t i = 0; i < kPlantedPerRun; ++i) {
    if (has(KernelId::efficient_curvy)) out.kem.push_back(sap::send(*meta_, tag_len_, rng).announcement);
    if (has(KernelId::mlwe_sap)) {
      auto enc = kem::encaps(recipient.view_pub, rng);
      sap::Announcement ann;
      ann.kem = ps_;
      ann.ephemeral_ct = enc.ciphertext.bytes();
      ann.view_tag = sap::compute_view_tag(enc.shared_secret, tag_len_);
      ann.stealth_address = lattice_stealth_address(*keys_.lattice_spend, enc.shared_secret.view());
      out.mlwe.push_back(std::move(ann));
    }
    if (has(KernelId::curvy_pairing)) {
      const auto& engine = *keys_.pairing_engine;
      const Bytes r = random_bytes(rng, 32);
      const auto s = hash::keccak256(engine.pair(engine.g1_mul(pairing_view_pub_, r), *pairing_g2_generator_));
      out.pairing.push_back(
          {engine.g1_mul_generator(r), tag_of(s, tag_len_), secp_address(recipient.spend_pub, s), 0});
    }
    if (has(KernelId::dksap_ecdh)) {
      const auto r = curve::spend_keygen(rng);
      const auto s = hash::keccak256(curve::ecdh_x(ec_view_pub_, r.k));
      out.ec.push_back({r.K, tag_of(s, tag_len_), secp_address(recipient.spend_pub, s), 0});
    }
  }
  return out;
}

KernelInput WorkloadPool::materialize(KernelId kernel, std::size_t count) const {
  if (!has(kernel)) throw Error(Errc::configuration, "pool was built without " + std::string(name(kernel)));
  const Planted p = plant(count);
  switch (kernel) {
    case KernelId::efficient_curvy:
      return interleave(foreign_kem_, p.kem, p.positions, count);
    case KernelId::mlwe_sap:
      return interleave(foreign_kem_, p.mlwe, p.positions, count);
    case KernelId::curvy_pairing:
      return interleave(foreign_pairing_, p.pairing, p.positions, count);
    case KernelId::dksap_ecdh:
      return interleave(foreign_ec_, p.ec, p.positions, count);
  }
  throw Error(Errc::invalid_parameter, "unknown kernel");
}

KernelInput WorkloadPool::foreign_only(KernelId kernel, std::size_t count) const {
  if (!has(kernel)) throw Error(Errc::configuration, "pool was built without " + std::string(name(kernel)));
  if (count > max_count_) throw Error(Errc::configuration, "count exceeds the pool size");
  switch (kernel) {
    case KernelId::efficient_curvy:
    case KernelId::mlwe_sap:
      return prefix(foreign_kem_, count);
    case KernelId::curvy_pairing:
      return prefix(foreign_pairing_, count);
    case KernelId::dksap_ecdh:
      return prefix(foreign_ec_, count);
  }
  throw Error(Errc::invalid_parameter, "unknown kernel");
}

std::vector<curve::EthAddress> WorkloadPool::planted_addresses(KernelId kernel, std::size_t count) const {
  if (!has(kernel)) throw Error(Errc::configuration, "pool was built without " + std::string(name(kernel)));
  const Planted p = plant(count);
  std::vector<curve::EthAddress> out;
  auto collect = [&out](const auto& v) {
    for (const auto& a : v) out.push_back(a.stealth_address);
  };
  switch (kernel) {
    case KernelId::efficient_curvy:
      collect(p.kem);
      break;
    case KernelId::mlwe_sap:
      collect(p.mlwe);
      break;
    case KernelId::curvy_pairing:
      collect(p.pairing);
      break;
    case KernelId::dksap_ecdh:
      collect(p.ec);
      break;
  }
  return out;
}

// ---- configuration ----

void validate(const BenchConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(Errc::configuration, m); };
  if (cfg.counts.empty()) fail("counts must not be empty");
  for (std::size_t i = 0; i < cfg.counts.size(); ++i) {
    if (cfg.counts[i] < kPlantedPerRun)
      fail("every count must be at least " + std::to_string(kPlantedPerRun));
    if (i > 0 && cfg.counts[i] <= cfg.counts[i - 1]) fail("counts must be strictly increasing");
  }
  if (cfg.seeds.empty()) fail("at least one seed is required");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
    fail("seeds must be distinct");
  if (cfg.tag_len < 1 || cfg.tag_len > sap::kMaxTagLen) fail("tag_len must be in [1, 32]");
  if (cfg.kernels.empty()) fail("at least one kernel is required");
  if (std::set<KernelId>(cfg.kernels.begin(), cfg.kernels.end()).size() != cfg.kernels.size())
    fail("kernels must be distinct");
  if (std::find(cfg.kernels.begin(), cfg.kernels.end(), KernelId::curvy_pairing) != cfg.kernels.end() &&
      !pairing::available(cfg.curve))
    fail("pairing curve not available in this build: " + std::string(pairing::name(cfg.curve)));
  if (cfg.parallel_workers < 1) fail("parallel_workers must be at least 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::uint64_t config_uint(std::string_view key, std::string_view value) {
  const auto v = parse_number<std::uint64_t>(value);
  if (!v) throw Error(Errc::configuration, std::string(key) + ": not an unsigned integer: " + std::string(value));
  return *v;
}

}  // namespace

BenchConfig parse_config(std::string_view text) {
  BenchConfig cfg;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash_pos = line.find('#'); hash_pos != std::string_view::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      if (key == "counts") {
        cfg.counts.clear();
        for (auto item : split(value, ',')) cfg.counts.push_back(config_uint(key, item));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (auto item : split(value, ',')) {
          if (const auto dots = item.find(".."); dots != std::string_view::npos) {
            const auto lo = config_uint(key, trim(item.substr(0, dots)));
            const auto hi = config_uint(key, trim(item.substr(dots + 2)));
            if (hi < lo) throw Error(Errc::configuration, "seeds: empty range");
            for (auto s = lo; s <= hi; ++s) cfg.seeds.push_back(s);
          } else {
            cfg.seeds.push_back(config_uint(key, item));
          }
        }
      } else if (key == "tag_len") {
        cfg.tag_len = config_uint(key, value);
      } else if (key == "kernels") {
        cfg.kernels.clear();
        for (auto item : split(value, ',')) cfg.kernels.push_back(parse_kernel(item));
      } else if (key == "curve") {
        cfg.curve = pairing::parse_curve(value);
      } else if (key == "kem") {
        const auto ps = kem::parse_parameter_set(value);
        if (!ps) throw Error(Errc::configuration, "kem: unknown parameter set " + std::string(value));
        cfg.kem = *ps;
      } else if (key == "warmup") {
        cfg.warmup = config_uint(key, value);
      } else if (key == "parallel_workers") {
        cfg.parallel_workers = config_uint(key, value);
      } else {
        throw Error(Errc::configuration, "unknown key: " + std::string(key));
      }
    } catch (const Error& e) {
      throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::configuration, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---- harness ----

double SeriesPoint::mean_ns() const {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) sum += static_cast<double>(s.elapsed_ns);
  return sum / static_cast<double>(samples.size());
}

const SeriesPoint* Series::at(std::size_t count) const {
  for (const auto& p : points)
    if (p.count == count) return &p;
  return nullptr;
}

const Series* BenchResult::find(std::string_view label) const {
  for (const auto& s : series)
    if (s.label == label) return &s;
  return nullptr;
}

std::optional<double> BenchResult::ratio(std::string_view label, std::size_t count) const {
  const Series* num = find(label);
  const Series* den = find(name(KernelId::efficient_curvy));
  if (num == nullptr || den == nullptr) return std::nullopt;
  const SeriesPoint* a = num->at(count);
  const SeriesPoint* b = den->at(count);
  if (a == nullptr || b == nullptr || b->mean_ns() == 0.0) return std::nullopt;
  return a->mean_ns() / b->mean_ns();
}

namespace {

KernelInput head(const KernelInput& input, std::size_t n) {
  return std::visit(
      [n](const auto& v) -> KernelInput {
        using V = std::decay_t<decltype(v)>;
        return V(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size())));
      },
      input);
}

Series& series_for(BenchResult& result, std::string_view label) {
  for (auto& s : result.series)
    if (s.label == label) return s;
  result.series.push_back({std::string(label), {}});
  for (std::size_t c : result.counts) result.series.back().points.push_back({c, {}});
  return result.series.back();
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg, ProgressFn progress, void* context) {
  validate(cfg);
  std::vector<KernelId> kernels;
  for (KernelId k : kAllKernels)
    if (std::find(cfg.kernels.begin(), cfg.kernels.end(), k) != cfg.kernels.end()) kernels.push_back(k);

  BenchResult result;
  result.counts = cfg.counts;
  for (KernelId k : kernels) {
    series_for(result, name(k));
    if (k == KernelId::efficient_curvy && cfg.parallel_workers > 1) series_for(result, kParallelLabel);
  }

  for (std::uint64_t seed : cfg.seeds) {
    const WorkloadPool pool(seed, cfg.counts.back(), cfg.tag_len, kernels, cfg.curve, cfg.kem);
    for (std::size_t ci = 0; ci < cfg.counts.size(); ++ci) {
      const std::size_t count = cfg.counts[ci];
      for (KernelId kernel : kernels) {
        const KernelInput input = pool.materialize(kernel, count);
        const auto expected = pool.planted_addresses(kernel, count);
        if (cfg.warmup > 0) (void)kernel_scan(kernel, pool.keys(), head(input, cfg.warmup), cfg.tag_len);

        auto run = [&](std::string_view label, std::size_t workers) {
          const KernelReport r = kernel_scan(kernel, pool.keys(), input, cfg.tag_len, workers);
          std::vector<curve::EthAddress> found;
          for (const auto& m : r.matches) found.push_back(m.stealth_address);
          if (found != expected)
            throw Error(Errc::integrity, std::string(label) + " reported " + std::to_string(found.size()) +
                                             " matches, expected the " + std::to_string(expected.size()) +
                                             " planted payments (seed " + std::to_string(seed) + ")");
          series_for(result, label).points[ci].samples.push_back(
              {seed, r.elapsed_ns, r.view_tag_passes, r.dominant_ops, r.matches.size()});
          if (progress != nullptr) progress(label, count, seed, r.elapsed_ns, context);
        };
        run(name(kernel), 1);
        if (kernel == KernelId::efficient_curvy && cfg.parallel_workers > 1)
          run(kParallelLabel, cfg.parallel_workers);
      }
    }
  }
  return result;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_input, "fit needs matching series of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw Error(Errc::invalid_input, "fit needs two distinct x values");
  const double slope = sxy / sxx;
  const double r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

// ---- reports ----

ReportFormat parse_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "table") return ReportFormat::table;
  throw Error(Errc::invalid_parameter, "unknown report format: " + std::string(text));
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void emit_csv(const BenchResult& result, std::ostream& out) {
  out << "kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches\n";
  for (const auto& s : result.series)
    for (const auto& p : s.points)
      for (const auto& x : p.samples)
        out << s.label << ',' << p.count << ',' << x.seed << ',' << x.elapsed_ns << ',' << x.view_tag_passes
            << ',' << x.dominant_ops << ',' << x.matches << '\n';
  out << "# aggregate\n";
  out << "kernel,count,mean_elapsed_ns,ratio_vs_efficient_curvy\n";
  for (const auto& s : result.series)
    for (const auto& p : s.points) {
      if (p.samples.empty()) continue;
      const auto r = result.ratio(s.label, p.count);
      out << s.label << ',' << p.count << ',' << shortest(p.mean_ns()) << ',' << (r ? shortest(*r) : "") << '\n';
    }
}

void emit_table(const BenchResult& result, std::ostream& out) {
  char buf[64];
  out << "mean scan time (ms)\n";
  std::snprintf(buf, sizeof(buf), "%8s", "count");
  out << buf;
  for (const auto& s : result.series) {
    std::snprintf(buf, sizeof(buf), "  %26s", s.label.c_str());
    out << buf;
  }
  out << '\n';
  for (std::size_t count : result.counts) {
    std::snprintf(buf, sizeof(buf), "%8zu", count);
    out << buf;
    for (const auto& s : result.series) {
      const SeriesPoint* p = s.at(count);
      const auto r = result.ratio(s.label, count);
      if (p == nullptr || p->samples.empty()) {
        std::snprintf(buf, sizeof(buf), "  %26s", "-");
      } else if (r && s.label != name(KernelId::efficient_curvy)) {
        std::snprintf(buf, sizeof(buf), "  %16.2f (x%6.3f)", p->mean_ns() / 1e6, *r);
      } else {
        std::snprintf(buf, sizeof(buf), "  %26.2f", p->mean_ns() / 1e6);
      }
      out << buf;
    }
    out << '\n';
  }
  if (result.counts.size() >= 2) {
    out << "linear fit R^2:";
    for (const auto& s : result.series) {
      std::vector<double> xs, ys;
      for (const auto& p : s.points)
        if (!p.samples.empty()) {
          xs.push_back(static_cast<double>(p.count));
          ys.push_back(p.mean_ns());
        }
      if (xs.size() < 2) continue;
      std::snprintf(buf, sizeof(buf), " %s=%.4f", s.label.c_str(), fit_linear(xs, ys).r2);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace

void emit_report(const BenchResult& result, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::csv) {
    emit_csv(result, out);
  } else {
    emit_table(result, out);
  }
}

void emit_report(const BenchResult& result, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::storage, "cannot open " + path + " for writing");
  emit_report(result, format, out);
  out.flush();
  if (!out) throw Error(Errc::storage, "write to " + path + " failed");
}

namespace {

[[noreturn]] void bad_csv(std::size_t line_no, const std::string& why) {
  throw Error(Errc::format_error, "csv line " + std::to_string(line_no) + ": " + why);
}

std::uint64_t csv_uint(std::string_view s, std::size_t line_no) {
  const auto v = parse_number<std::uint64_t>(s);
  if (!v) bad_csv(line_no, "expected an unsigned integer, got '" + std::string(s) + "'");
  return *v;
}

}  // namespace

BenchResult parse_csv(std::string_view text) {
  BenchResult result;
  std::map<std::string, std::map<std::size_t, std::vector<Sample>>> rows;
  std::vector<std::string> order;
  std::set<std::size_t> counts;
  bool header = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "# aggregate") break;
    if (!header) {
      if (line != "kernel,count,seed,elapsed_ns,view_tag_passes,dominant_ops,matches")
        bad_csv(line_no, "unexpected header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) bad_csv(line_no, "expected 7 fields");
    const std::string label(f[0]);
    if (!rows.contains(label)) order.push_back(label);
    const std::size_t count = csv_uint(f[1], line_no);
    counts.insert(count);
    rows[label][count].push_back({csv_uint(f[2], line_no), csv_uint(f[3], line_no), csv_uint(f[4], line_no),
                                  csv_uint(f[5], line_no), csv_uint(f[6], line_no)});
  }
  if (!header) bad_csv(line_no, "missing header");
  result.counts.assign(counts.begin(), counts.end());
  for (const auto& label : order) {
    Series s{label, {}};
    for (std::size_t c : result.counts) {
      auto it = rows[label].find(c);
      s.points.push_back({c, it == rows[label].end() ? std::vector<Sample>{} : it->second});
    }
    result.series.push_back(std::move(s));
  }
  return result;
}

std::vector<AggregateRow> parse_aggregate(std::string_view text) {
  std::vector<AggregateRow> out;
  bool in_block = false, header = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!in_block) {
      in_block = line == "# aggregate";
      continue;
    }
    if (line.empty()) continue;
    if (!header) {
      if (line != "kernel,count,mean_elapsed_ns,ratio_vs_efficient_curvy") bad_csv(line_no, "unexpected header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) bad_csv(line_no, "expected 4 fields");
    const auto mean = parse_number<double>(f[2]);
    if (!mean) bad_csv(line_no, "bad mean");
    std::optional<double> ratio;
    if (!f[3].empty()) {
      ratio = parse_number<double>(f[3]);
      if (!ratio) bad_csv(line_no, "bad ratio");
    }
    out.push_back({std::string(f[0]), csv_uint(f[1], line_no), *mean, ratio});
  }
  if (!header) bad_csv(line_no, "missing aggregate block");
  return out;
}

}  // namespace ecsap::bench
