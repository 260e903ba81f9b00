#include "ecsap/errors.hpp"

namespace ecsap {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_modulus: return "invalid modulus";
    case Errc::invalid_parameter: return "invalid parameter";
    case Errc::invalid_input: return "invalid input";
    case Errc::insufficient_entropy: return "insufficient entropy";
    case Errc::keygen_failure: return "key generation failure";
    case Errc::encapsulation_failure: return "encapsulation failure";
    case Errc::format_error: return "format error";
    case Errc::invalid_point: return "invalid point";
    case Errc::resample_required: return "resample required";
    case Errc::bad_prefix: return "bad prefix";
    case Errc::bad_hex: return "bad hex";
    case Errc::wrong_length: return "wrong length";
    case Errc::conflict: return "conflict";
    case Errc::not_found: return "not found";
    case Errc::integrity: return "integrity";
    case Errc::storage: return "storage";
    case Errc::configuration: return "configuration";
    case Errc::permission: return "permission";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

IntegrityError::IntegrityError(std::uint64_t sequence_no, const std::string& message)
    : Error(Errc::integrity, "record " + std::to_string(sequence_no) + ": " + message),
      sequence_no_(sequence_no) {}

}  // namespace ecsap
