#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecsap {

/// Error categories raised by the library. The CLI maps these onto its exit
/// codes, so adding a category means deciding which exit code it belongs to.
enum class Errc {
  invalid_modulus,
  invalid_parameter,
  invalid_input,
  insufficient_entropy,
  keygen_failure,
  encapsulation_failure,
  format_error,
  invalid_point,
  resample_required,
  bad_prefix,
  bad_hex,
  wrong_length,
  conflict,
  not_found,
  integrity,
  storage,
  configuration,
  permission,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised when a stored record fails verification. Carries the sequence
/// number of the offending record.
class IntegrityError : public Error {
 public:
  IntegrityError(std::uint64_t sequence_no, const std::string& message);

  std::uint64_t sequence_no() const noexcept { return sequence_no_; }

 private:
  std::uint64_t sequence_no_;
};

}  // namespace ecsap
