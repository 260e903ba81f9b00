#include "ecsap/sap_core.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"

namespace ecsap::sap {

namespace {

constexpr std::string_view kMetaPrefix = "st:eth:0x";
constexpr std::size_t kHeaderLen = 4;
constexpr std::size_t kAddressLen = 20;

void require_tag_len(std::size_t tag_len) {
  if (tag_len < 1 || tag_len > kMaxTagLen) {
    throw Error(Errc::invalid_parameter, "view tag length must be in [1, 32], got " +
                                             std::to_string(tag_len));
  }
}

void scan_range(const RecipientKeys& keys, std::span<const Announcement> anns,
                std::size_t tag_len, ScanReport& out) {
  const auto ps = keys.parameter_set();
  for (const Announcement& ann : anns) {
    ++out.announcements_scanned;
    if (validate(ann, ps, tag_len)) {
      ++out.malformed_skipped;
      continue;
    }
    const kem::SharedSecret s = kem::decaps(keys.view_priv, ann.ephemeral_ct);
    ++out.decapsulations;
    const auto digest = hash::keccak256(s.view());
    if (!std::equal(ann.view_tag.begin(), ann.view_tag.end(), digest.begin())) continue;
    ++out.view_tag_passes;
    try {
      const curve::Scalar t = curve::xof_to_scalar(s);
      const auto address = curve::eth_address(curve::derive_stealth_pub(keys.spend_pub, t));
      if (address != ann.stealth_address) {
        ++out.address_mismatches;
        continue;
      }
      out.matches.push_back({ann.sequence_no, address, curve::derive_stealth_priv(keys.spend_priv, t)});
    } catch (const Error& e) {
      // Only the negligible-probability degenerate keys reach here; such an
      // announcement cannot be ours to spend.
      if (e.code() != Errc::resample_required) throw;
      ++out.address_mismatches;
    }
  }
}

void merge(ScanReport& into, ScanReport&& part) {
  into.announcements_scanned += part.announcements_scanned;
  into.decapsulations += part.decapsulations;
  into.view_tag_passes += part.view_tag_passes;
  into.address_mismatches += part.address_mismatches;
  into.malformed_skipped += part.malformed_skipped;
  for (auto& m : part.matches) into.matches.push_back(std::move(m));
}

}  // namespace

std::pair<RecipientKeys, StealthMetaAddress> recipient_setup(EntropySource& rng,
                                                             kem::ParameterSet ps) {
  auto spend = curve::spend_keygen(rng);
  auto view = kem::keygen(rng, ps);
  RecipientKeys keys{spend.k, spend.K, view.public_key, view.secret_key};
  StealthMetaAddress meta = meta_address_of(keys);
  return {std::move(keys), std::move(meta)};
}

StealthMetaAddress meta_address_of(const RecipientKeys& keys) {
  return {keys.spend_pub, keys.view_pub};
}

Bytes compute_view_tag(const kem::SharedSecret& s, std::size_t tag_len) {
  require_tag_len(tag_len);
  const auto digest = hash::keccak256(s.view());
  return Bytes(digest.begin(), digest.begin() + static_cast<std::ptrdiff_t>(tag_len));
}

SendOutcome send(const StealthMetaAddress& meta, std::size_t tag_len, EntropySource& rng) {
  require_tag_len(tag_len);
  if (meta.spend_pub.is_identity()) throw Error(Errc::invalid_point, "spending key is the identity");
  for (;;) {
    auto enc = kem::encaps(meta.view_pub, rng);
    try {
      const auto stealth_pub = curve::derive_stealth_pub(meta.spend_pub, enc.shared_secret);
      const auto address = curve::eth_address(stealth_pub);
      Announcement ann{meta.view_pub.parameter_set(), enc.ciphertext.bytes(),
                       compute_view_tag(enc.shared_secret, tag_len), address, 0};
      return {std::move(ann), stealth_pub, address};
    } catch (const Error& e) {
      if (e.code() != Errc::resample_required) throw;
    }
  }
}

std::optional<std::string> validate(const Announcement& ann, kem::ParameterSet expected,
                                    std::size_t tag_len) {
  if (ann.kem != expected) return "parameter set mismatch";
  if (ann.ephemeral_ct.size() != kem::sizes(expected).ciphertext) return "ciphertext length";
  if (ann.view_tag.size() != tag_len) return "view tag length";
  return std::nullopt;
}

ScanReport scan(const RecipientKeys& keys, std::span<const Announcement> announcements,
                const ScanOptions& options) {
  require_tag_len(options.tag_len);
  const auto start = std::chrono::steady_clock::now();
  ScanReport report;
  const std::size_t workers =
      std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, announcements.size()));
  if (workers == 1) {
    scan_range(keys, announcements, options.tag_len, report);
  } else {
    std::vector<ScanReport> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    const std::size_t chunk = (announcements.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(announcements.size(), w * chunk);
      const std::size_t end = std::min(announcements.size(), begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        try {
          scan_range(keys, announcements.subspan(begin, end - begin), options.tag_len, parts[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto& p : parts) merge(report, std::move(p));
  }
  report.elapsed_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start)
          .count());
  return report;
}

std::string encode_meta(const StealthMetaAddress& meta) {
  const auto k = meta.spend_pub.compressed();
  return std::string(kMetaPrefix) + to_hex(k) + to_hex(meta.view_pub.bytes());
}

StealthMetaAddress decode_meta(std::string_view text) {
  if (!text.starts_with(kMetaPrefix)) throw Error(Errc::bad_prefix, "meta-address must start with st:eth:0x");
  const Bytes raw = from_hex(text.substr(kMetaPrefix.size()));
  if (raw.size() <= 33) throw Error(Errc::wrong_length, "meta-address too short");
  const auto ps = kem::parameter_set_for_public_key(raw.size() - 33);
  if (!ps) {
    throw Error(Errc::wrong_length, "meta-address payload of " + std::to_string(raw.size()) +
                                        " bytes matches no KEM parameter set");
  }
  const ByteView view(raw);
  const auto spend = curve::CurvePoint::parse(view.first(33));
  kem::PublicKey pk(*ps, Bytes(raw.begin() + 33, raw.end()));
  if (!kem::is_well_formed(pk)) throw Error(Errc::invalid_point, "viewing key coefficients not reduced mod q");
  return {spend, std::move(pk)};
}

Bytes encode_announcement(const Announcement& ann) {
  require_tag_len(ann.view_tag.size());
  Bytes out;
  out.reserve(kHeaderLen + ann.ephemeral_ct.size() + ann.view_tag.size() + kAddressLen);
  put_le32(out, static_cast<std::uint32_t>(ann.view_tag.size()) |
                    (static_cast<std::uint32_t>(ann.kem) << 8));
  out.insert(out.end(), ann.ephemeral_ct.begin(), ann.ephemeral_ct.end());
  out.insert(out.end(), ann.view_tag.begin(), ann.view_tag.end());
  out.insert(out.end(), ann.stealth_address.begin(), ann.stealth_address.end());
  return out;
}

Announcement decode_announcement(ByteView record, std::uint64_t sequence_no) {
  if (record.size() < kHeaderLen) throw Error(Errc::format_error, "announcement shorter than header");
  const std::uint32_t header = get_le32(record.data());
  const std::size_t tag_len = header & 0xff;
  const auto kem_id = static_cast<std::uint8_t>((header >> 8) & 0xff);
  if ((header >> 16) != 0) throw Error(Errc::format_error, "unknown announcement flags");
  if (tag_len < 1 || tag_len > kMaxTagLen) throw Error(Errc::format_error, "bad view tag length");
  if (kem_id < 1 || kem_id > 3) throw Error(Errc::format_error, "unknown KEM parameter set");
  const auto ps = static_cast<kem::ParameterSet>(kem_id);
  const std::size_t ct_len = kem::sizes(ps).ciphertext;
  if (record.size() != kHeaderLen + ct_len + tag_len + kAddressLen) {
    throw Error(Errc::format_error, "announcement length does not match its header");
  }
  Announcement ann;
  ann.kem = ps;
  ann.sequence_no = sequence_no;
  auto it = record.begin() + kHeaderLen;
  ann.ephemeral_ct.assign(it, it + static_cast<std::ptrdiff_t>(ct_len));
  it += static_cast<std::ptrdiff_t>(ct_len);
  ann.view_tag.assign(it, it + static_cast<std::ptrdiff_t>(tag_len));
  it += static_cast<std::ptrdiff_t>(tag_len);
  std::copy(it, record.end(), ann.stealth_address.begin());
  return ann;
}

}  // namespace ecsap::sap
