#include "ecsap/registry_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <boost/crc.hpp>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ecsap/errors.hpp"
#include "ecsap/hash.hpp"

namespace ecsap::registry {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMetaHeader = "# ecsap-meta-registry v1";
constexpr char kLogMagic[8] = {'E', 'C', 'S', 'A', 'P', 'L', 'O', 'G'};
constexpr char kOffMagic[8] = {'E', 'C', 'S', 'A', 'P', 'O', 'F', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderLen = 16;
constexpr std::size_t kAddressLen = 20;
// Upper bound on one record; anything claiming more is corruption, not a
// torn write.
constexpr std::size_t kMaxBody = 8 + 4 + 1568 + 32 + kAddressLen + 32;
constexpr std::size_t kMaxRecord = 4 + kMaxBody + 4;

[[noreturn]] void storage_error(const std::string& what, const fs::path& p) {
  throw Error(Errc::storage, what + " " + p.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  Fd(const fs::path& p, int flags, mode_t mode = 0644) : fd_(::open(p.c_str(), flags | O_CLOEXEC, mode)) {
    if (fd_ < 0) storage_error("cannot open", p);
  }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

class FileLock {
 public:
  explicit FileLock(const fs::path& target) : fd_(fs::path(target.string() + ".lock"), O_RDWR | O_CREAT) {
    while (::flock(fd_.get(), LOCK_EX) != 0) {
      if (errno != EINTR) storage_error("cannot lock", target);
    }
  }
  ~FileLock() { ::flock(fd_.get(), LOCK_UN); }

 private:
  Fd fd_;
};

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    errno = ENOENT;
    storage_error("cannot read", p);
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_all(int fd, ByteView data, std::uint64_t offset, const fs::path& p) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::pwrite(fd, data.data() + done, data.size() - done,
                               static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_error("cannot write", p);
    }
    done += static_cast<std::size_t>(n);
  }
}

void sync(int fd, const fs::path& p) {
  if (::fdatasync(fd) != 0) storage_error("cannot sync", p);
}

std::uint64_t size_of(const fs::path& p) {
  struct stat st {};
  if (::stat(p.c_str(), &st) != 0) storage_error("cannot stat", p);
  return static_cast<std::uint64_t>(st.st_size);
}

Bytes make_header(const char (&magic)[8], std::uint8_t mode_byte) {
  Bytes h(magic, magic + 8);
  h.push_back(static_cast<std::uint8_t>(kVersion & 0xff));
  h.push_back(static_cast<std::uint8_t>(kVersion >> 8));
  h.push_back(mode_byte);
  h.resize(kHeaderLen, 0);
  return h;
}

// Creates the file with its header atomically, unless it already exists.
void create_with_header(const fs::path& p, const Bytes& header) {
  if (fs::exists(p)) return;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp." + std::to_string(::getpid());
  {
    Fd fd(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    write_all(fd.get(), header, 0, tmp);
    sync(fd.get(), tmp);
  }
  // link() fails if another process won the race, which is fine.
  if (::link(tmp.c_str(), p.c_str()) != 0 && errno != EEXIST) storage_error("cannot create", p);
  fs::remove(tmp);
}

std::uint32_t crc_of(ByteView data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

struct RawRecord {
  std::uint64_t sequence_no;
  ByteView payload;
};

struct ParsedLog {
  LogMode mode;
  std::vector<RawRecord> records;
  LogState state;
};

ParsedLog parse_log(const Bytes& data, const fs::path& p) {
  if (data.size() < kHeaderLen || !std::equal(kLogMagic, kLogMagic + 8, data.begin())) {
    throw Error(Errc::format_error, p.string() + " is not an announcement log");
  }
  if (data[8] != (kVersion & 0xff) || data[9] != (kVersion >> 8)) {
    throw Error(Errc::format_error, p.string() + " has an unsupported log version");
  }
  if (data[10] > 1) throw Error(Errc::format_error, p.string() + " has an unknown log mode");

  ParsedLog out;
  out.mode = static_cast<LogMode>(data[10]);
  out.state.file_bytes = data.size();
  std::size_t pos = kHeaderLen;
  std::uint64_t expected = 0;
  while (pos < data.size()) {
    const std::size_t remaining = data.size() - pos;
    const bool could_be_tail = remaining <= kMaxRecord;
    if (remaining < 4) {
      out.state.torn_tail = true;
      break;
    }
    const std::uint32_t len = get_le32(&data[pos]);
    if (static_cast<std::uint64_t>(len) + 8 > remaining) {
      if (!could_be_tail) throw IntegrityError(expected, "record length runs past end of log");
      out.state.torn_tail = true;
      break;
    }
    const ByteView framed(&data[pos], 4 + len);
    const bool last = pos + 8 + len == data.size();
    if (len < 8 || len > kMaxBody || get_le32(&data[pos + 4 + len]) != crc_of(framed)) {
      if (last) {
        out.state.torn_tail = true;
        break;
      }
      throw IntegrityError(expected, "checksum mismatch");
    }
    const std::uint64_t seq = get_le64(&data[pos + 4]);
    if (seq != expected) {
      throw IntegrityError(expected, "sequence number " + std::to_string(seq) + " out of order");
    }
    out.records.push_back({seq, ByteView(&data[pos + 12], len - 8)});
    pos += 8 + len;
    ++expected;
  }
  out.state.records = expected;
  out.state.valid_bytes = pos;
  return out;
}

struct ParsedOffchain {
  std::unordered_map<std::string, ByteView> payloads;
  std::uint64_t valid_bytes = kHeaderLen;
};

ParsedOffchain parse_offchain(const Bytes& data, const fs::path& p) {
  if (data.size() < kHeaderLen || !std::equal(kOffMagic, kOffMagic + 8, data.begin())) {
    throw Error(Errc::format_error, p.string() + " is not an off-chain payload store");
  }
  ParsedOffchain out;
  std::size_t pos = kHeaderLen;
  while (data.size() - pos >= 36) {
    const std::uint32_t len = get_le32(&data[pos]);
    if (static_cast<std::uint64_t>(len) + 36 > data.size() - pos) break;
    const std::string key(reinterpret_cast<const char*>(&data[pos + 4]), 32);
    out.payloads[key] = ByteView(&data[pos + 36], len);
    pos += 36 + len;
  }
  out.valid_bytes = pos;
  return out;
}

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of("\t\r\n") != std::string::npos) {
    throw Error(Errc::invalid_input, "registry names must be non-empty and free of tabs and newlines");
  }
}

std::map<std::string, std::string> load_registry(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::ifstream in(p);
  if (!in) return out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      if (line != kMetaHeader) throw Error(Errc::format_error, p.string() + " is not a meta registry");
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::format_error, "malformed registry line");
    out.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

}  // namespace

MetaRegistry::MetaRegistry(fs::path path) : path_(std::move(path)) {}

void MetaRegistry::register_name(const std::string& name, const sap::StealthMetaAddress& meta) {
  check_name(name);
  const std::string encoded = sap::encode_meta(meta);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  FileLock lock(path_);
  const auto existing = load_registry(path_);
  if (existing.count(name)) throw Error(Errc::conflict, "name already registered: " + name);
  Fd fd(path_, O_WRONLY | O_CREAT | O_APPEND);
  std::string text;
  if (size_of(path_) == 0) text = std::string(kMetaHeader) + "\n";
  text += name + "\t" + encoded + "\n";
  if (::write(fd.get(), text.data(), text.size()) != static_cast<ssize_t>(text.size())) {
    storage_error("cannot write", path_);
  }
  sync(fd.get(), path_);
}

sap::StealthMetaAddress MetaRegistry::resolve_name(const std::string& name) const {
  const auto entries = load_registry(path_);
  const auto it = entries.find(name);
  if (it == entries.end()) throw Error(Errc::not_found, "no meta-address registered for " + name);
  return sap::decode_meta(it->second);
}

std::map<std::string, std::string> MetaRegistry::entries() const { return load_registry(path_); }

std::array<std::uint8_t, 32> split_commitment(std::uint64_t sequence_no, ByteView ct, ByteView tag) {
  Bytes buf;
  buf.reserve(8 + ct.size() + tag.size());
  put_le64(buf, sequence_no);
  buf.insert(buf.end(), ct.begin(), ct.end());
  buf.insert(buf.end(), tag.begin(), tag.end());
  return hash::keccak256(buf);
}

AnnouncementLog::AnnouncementLog(fs::path path, LogMode mode)
    : path_(std::move(path)), mode_(mode), mutex_(std::make_unique<std::mutex>()) {}

AnnouncementLog::AnnouncementLog(AnnouncementLog&&) noexcept = default;
AnnouncementLog& AnnouncementLog::operator=(AnnouncementLog&&) noexcept = default;
AnnouncementLog::~AnnouncementLog() = default;

fs::path AnnouncementLog::offchain_path() const { return path_.string() + ".offchain"; }

AnnouncementLog AnnouncementLog::open(const fs::path& path, LogMode mode_if_new) {
  create_with_header(path, make_header(kLogMagic, static_cast<std::uint8_t>(mode_if_new)));
  Bytes head(kHeaderLen);
  {
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(head.data()), kHeaderLen);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderLen)) {
      throw Error(Errc::format_error, path.string() + " has a truncated header");
    }
  }
  AnnouncementLog log(path, parse_log(head, path).mode);
  if (log.mode_ == LogMode::split) create_with_header(log.offchain_path(), make_header(kOffMagic, 0));
  return log;
}

LogState AnnouncementLog::inspect() const { return parse_log(read_file(path_), path_).state; }

std::uint64_t AnnouncementLog::append(const sap::Announcement& ann) {
  if (auto problem = sap::validate(ann, ann.kem, ann.view_tag.size())) {
    throw Error(Errc::invalid_input, "announcement rejected: " + *problem);
  }
  std::lock_guard guard(*mutex_);
  FileLock lock(path_);

  Fd fd(path_, O_RDWR);
  if (!cached_ || cached_->file_bytes != size_of(path_)) {
    cached_ = parse_log(read_file(path_), path_).state;
  }
  if (cached_->torn_tail || cached_->valid_bytes != cached_->file_bytes) {
    if (::ftruncate(fd.get(), static_cast<off_t>(cached_->valid_bytes)) != 0) {
      storage_error("cannot truncate", path_);
    }
    cached_->file_bytes = cached_->valid_bytes;
    cached_->torn_tail = false;
  }
  const std::uint64_t seq = cached_->records;

  Bytes payload;
  if (mode_ == LogMode::inline_payload) {
    payload = sap::encode_announcement(ann);
  } else {
    const auto commitment = split_commitment(seq, ann.ephemeral_ct, ann.view_tag);
    const fs::path off = offchain_path();
    Fd off_fd(off, O_RDWR);
    const Bytes off_data = read_file(off);
    const auto valid = parse_offchain(off_data, off).valid_bytes;
    Bytes rec;
    put_le32(rec, static_cast<std::uint32_t>(ann.ephemeral_ct.size()));
    rec.insert(rec.end(), commitment.begin(), commitment.end());
    rec.insert(rec.end(), ann.ephemeral_ct.begin(), ann.ephemeral_ct.end());
    if (valid != off_data.size() && ::ftruncate(off_fd.get(), static_cast<off_t>(valid)) != 0) {
      storage_error("cannot truncate", off);
    }
    write_all(off_fd.get(), rec, valid, off);
    sync(off_fd.get(), off);

    put_le32(payload, static_cast<std::uint32_t>(ann.view_tag.size()) |
                          (static_cast<std::uint32_t>(ann.kem) << 8));
    payload.insert(payload.end(), ann.view_tag.begin(), ann.view_tag.end());
    payload.insert(payload.end(), ann.stealth_address.begin(), ann.stealth_address.end());
    payload.insert(payload.end(), commitment.begin(), commitment.end());
  }

  Bytes record;
  put_le32(record, static_cast<std::uint32_t>(8 + payload.size()));
  put_le64(record, seq);
  record.insert(record.end(), payload.begin(), payload.end());
  put_le32(record, crc_of(record));
  write_all(fd.get(), record, cached_->valid_bytes, path_);
  sync(fd.get(), path_);

  cached_->records += 1;
  cached_->valid_bytes += record.size();
  cached_->file_bytes = cached_->valid_bytes;
  return seq;
}

std::vector<sap::Announcement> AnnouncementLog::stream_since(std::uint64_t cursor) const {
  // The on-chain file is read before the off-chain one: the writer persists
  // payloads first, so every commitment seen here has its payload available.
  const Bytes data = read_file(path_);
  const ParsedLog log = parse_log(data, path_);
  std::vector<sap::Announcement> out;
  if (cursor >= log.records.size()) return out;

  if (log.mode == LogMode::inline_payload) {
    for (std::size_t i = cursor; i < log.records.size(); ++i) {
      const auto& r = log.records[i];
      try {
        out.push_back(sap::decode_announcement(r.payload, r.sequence_no));
      } catch (const Error& e) {
        throw IntegrityError(r.sequence_no, e.what());
      }
    }
    return out;
  }

  const fs::path off = offchain_path();
  const Bytes off_data = read_file(off);
  const ParsedOffchain payloads = parse_offchain(off_data, off);
  for (std::size_t i = cursor; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    const ByteView p = r.payload;
    if (p.size() < 4) throw IntegrityError(r.sequence_no, "split record too short");
    const std::uint32_t header = get_le32(p.data());
    const std::size_t tag_len = header & 0xff;
    const auto kem_id = static_cast<std::uint8_t>((header >> 8) & 0xff);
    if (p.size() != 4 + tag_len + kAddressLen + 32 || kem_id < 1 || kem_id > 3 || tag_len < 1 ||
        tag_len > sap::kMaxTagLen || (header >> 16) != 0) {
      throw IntegrityError(r.sequence_no, "malformed split record");
    }
    sap::Announcement ann;
    ann.kem = static_cast<kem::ParameterSet>(kem_id);
    ann.sequence_no = r.sequence_no;
    ann.view_tag.assign(p.begin() + 4, p.begin() + 4 + static_cast<std::ptrdiff_t>(tag_len));
    const auto addr = p.subspan(4 + tag_len, kAddressLen);
    std::copy(addr.begin(), addr.end(), ann.stealth_address.begin());
    const auto commitment = p.subspan(4 + tag_len + kAddressLen, 32);
    const std::string key(reinterpret_cast<const char*>(commitment.data()), 32);
    const auto it = payloads.payloads.find(key);
    if (it == payloads.payloads.end()) {
      throw IntegrityError(r.sequence_no, "off-chain payload missing");
    }
    ann.ephemeral_ct.assign(it->second.begin(), it->second.end());
    const auto recomputed = split_commitment(r.sequence_no, ann.ephemeral_ct, ann.view_tag);
    if (!std::equal(recomputed.begin(), recomputed.end(), commitment.begin())) {
      throw IntegrityError(r.sequence_no, "off-chain payload does not match its commitment");
    }
    out.push_back(std::move(ann));
  }
  return out;
}

}  // namespace ecsap::registry
