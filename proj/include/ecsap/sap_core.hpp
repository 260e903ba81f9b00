#pragma once

// The stealth address protocol: recipient key bundles and meta-addresses,
// sender announcements, and recipient scanning with view-tag filtering.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecsap/bytes.hpp"
#include "ecsap/curve_engine.hpp"
#include "ecsap/entropy.hpp"
#include "ecsap/kem_engine.hpp"

namespace ecsap::sap {

inline constexpr std::size_t kDefaultTagLen = 1;
inline constexpr std::size_t kMaxTagLen = 32;

struct RecipientKeys {
  curve::Scalar spend_priv;
  curve::CurvePoint spend_pub;
  kem::PublicKey view_pub;
  kem::SecretKey view_priv;

  kem::ParameterSet parameter_set() const { return view_pub.parameter_set(); }
};

struct StealthMetaAddress {
  curve::CurvePoint spend_pub;
  kem::PublicKey view_pub;

  friend bool operator==(const StealthMetaAddress&, const StealthMetaAddress&) = default;
};

/// A published payment record. Besides the ephemeral ciphertext R and the
/// view tag it carries the stealth address that was paid, which the
/// recipient compares against its own derivation to discard view-tag
/// collisions. Fields are raw so that malformed registry entries can be
/// represented and skipped rather than rejected at load time.
struct Announcement {
  kem::ParameterSet kem = kem::kDefaultParameterSet;
  Bytes ephemeral_ct;
  Bytes view_tag;
  curve::EthAddress stealth_address{};
  std::uint64_t sequence_no = 0;

  friend bool operator==(const Announcement&, const Announcement&) = default;
};

struct SendOutcome {
  Announcement announcement;
  curve::CurvePoint stealth_pub;
  curve::EthAddress stealth_address;
};

struct Match {
  std::uint64_t sequence_no;
  curve::EthAddress stealth_address;
  curve::Scalar stealth_priv;
};

struct ScanReport {
  std::vector<Match> matches;
  std::uint64_t announcements_scanned = 0;
  std::uint64_t decapsulations = 0;
  std::uint64_t view_tag_passes = 0;
  /// Tag passes whose derived address differed from the announced one.
  std::uint64_t address_mismatches = 0;
  std::uint64_t malformed_skipped = 0;
  std::uint64_t elapsed_ns = 0;
};

struct ScanOptions {
  std::size_t tag_len = kDefaultTagLen;
  /// Number of threads; 1 scans on the calling thread.
  std::size_t workers = 1;
};

std::pair<RecipientKeys, StealthMetaAddress> recipient_setup(
    EntropySource& rng, kem::ParameterSet ps = kem::kDefaultParameterSet);

StealthMetaAddress meta_address_of(const RecipientKeys& keys);

/// First tag_len bytes of Keccak-256(S). Errc::invalid_parameter unless
/// 1 <= tag_len <= 32.
Bytes compute_view_tag(const kem::SharedSecret& s, std::size_t tag_len);

SendOutcome send(const StealthMetaAddress& meta, std::size_t tag_len, EntropySource& rng);

/// Never throws for malformed announcements; they are counted and skipped.
/// Matches are reported in input order regardless of the worker count.
ScanReport scan(const RecipientKeys& keys, std::span<const Announcement> announcements,
                const ScanOptions& options = {});

/// Error category of an announcement that scan would skip, if any.
std::optional<std::string> validate(const Announcement& ann, kem::ParameterSet expected,
                                    std::size_t tag_len);

/// "st:eth:0x" + hex(compressed K || V).
std::string encode_meta(const StealthMetaAddress& meta);
/// Errc::bad_prefix, bad_hex, wrong_length or invalid_point.
StealthMetaAddress decode_meta(std::string_view text);

/// Binary record: u32 little-endian header (bits 0-7 tag length, bits 8-15
/// KEM parameter set id, bits 16-31 flags, currently zero) || ct || tag ||
/// address (20 bytes). The sequence number is not part of the record.
Bytes encode_announcement(const Announcement& ann);
/// Errc::format_error on any inconsistency.
Announcement decode_announcement(ByteView record, std::uint64_t sequence_no);

}  // namespace ecsap::sap
