#pragma once

// File-backed stand-ins for the name service and the ephemeral public key
// registry.
//
// Meta registry: UTF-8 text, first line "# ecsap-meta-registry v1", then one
// "name<TAB>st:eth:0x..." line per entry.
//
// Announcement log (all integers little-endian):
//   header  "ECSAPLOG" | u16 version (1) | u8 mode | 5 reserved zero bytes
//   record  u32 body_len | body | u32 crc32(body_len bytes || body)
//   body    u64 sequence_no | payload
// Inline mode payload is the announcement record of sap::encode_announcement.
// Split mode payload is u32 header | view tag | address | commitment, where
// commitment = keccak256(u64 sequence_no || ct || view tag); the ciphertext
// lives in "<log>.offchain":
//   header  "ECSAPOFF" | u16 version (1) | 6 reserved zero bytes
//   record  u32 ct_len | commitment (32) | ct

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ecsap/sap_core.hpp"

namespace ecsap::registry {

class MetaRegistry {
 public:
  explicit MetaRegistry(std::filesystem::path path);

  /// Errc::invalid_input for empty names or names containing tabs or line
  /// breaks; Errc::conflict if the name exists.
  void register_name(const std::string& name, const sap::StealthMetaAddress& meta);
  /// Errc::not_found for unknown names.
  sap::StealthMetaAddress resolve_name(const std::string& name) const;
  std::map<std::string, std::string> entries() const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

enum class LogMode : std::uint8_t { inline_payload = 0, split = 1 };

struct LogState {
  std::uint64_t records = 0;
  std::uint64_t valid_bytes = 0;
  std::uint64_t file_bytes = 0;
  /// An incomplete or checksum-failing final record is present (and ignored).
  bool torn_tail = false;
};

class AnnouncementLog {
 public:
  /// Opens an existing log (its header decides the mode) or creates one with
  /// `mode_if_new`.
  static AnnouncementLog open(const std::filesystem::path& path,
                              LogMode mode_if_new = LogMode::inline_payload);

  AnnouncementLog(AnnouncementLog&&) noexcept;
  AnnouncementLog& operator=(AnnouncementLog&&) noexcept;
  ~AnnouncementLog();

  LogMode mode() const noexcept { return mode_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path offchain_path() const;

  /// Durably appends and returns the assigned sequence number. A torn tail
  /// left by an earlier crash is truncated first. Serialized across
  /// processes with an advisory lock on "<log>.lock".
  std::uint64_t append(const sap::Announcement& ann);

  /// Records with sequence_no >= cursor, in order. Split-mode payloads are
  /// verified against their commitments; a mismatch or missing payload
  /// raises IntegrityError naming the record. A checksum failure before the
  /// final record also raises IntegrityError.
  std::vector<sap::Announcement> stream_since(std::uint64_t cursor) const;

  /// Scans the file without decoding payloads.
  LogState inspect() const;

 private:
  AnnouncementLog(std::filesystem::path path, LogMode mode);

  std::filesystem::path path_;
  LogMode mode_;
  std::unique_ptr<std::mutex> mutex_;
  // Writer-side cache of the last verified tail.
  std::optional<LogState> cached_;
};

/// Split-mode commitment keccak256(le64 seq || ct || tag).
std::array<std::uint8_t, 32> split_commitment(std::uint64_t sequence_no, ByteView ct, ByteView tag);

}  // namespace ecsap::registry
