#pragma once

// Arithmetic over Z_q, R_q = Z_q[x]/(x^n + 1) and R_q^k, together with the
// centered binomial sampler and the compress/decompress pair used by Kyber.
// Every operation takes its modulus explicitly; the Kyber constants below are
// defaults, not assumptions.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecsap/bytes.hpp"

namespace ecsap::lattice {

inline constexpr std::int64_t kKyberQ = 3329;
inline constexpr std::size_t kKyberN = 256;

/// Module rank and noise/compression parameters of a Kyber parameter set.
struct KyberParameters {
  int k;
  int eta1;
  int eta2;
  int du;
  int dv;
};

inline constexpr KyberParameters kKyber512{2, 3, 2, 10, 4};
inline constexpr KyberParameters kKyber768{3, 2, 2, 10, 4};
inline constexpr KyberParameters kKyber1024{4, 2, 2, 11, 5};

/// An element of Z_q, always held as its representative in [0, q).
class ZqElement {
 public:
  std::int64_t value() const noexcept { return value_; }
  std::int64_t modulus() const noexcept { return q_; }

  friend ZqElement operator+(ZqElement a, ZqElement b);
  friend ZqElement operator-(ZqElement a, ZqElement b);
  friend ZqElement operator*(ZqElement a, ZqElement b);
  friend bool operator==(ZqElement a, ZqElement b) = default;

 private:
  friend ZqElement mod_reduce(std::int64_t r, std::int64_t q);
  ZqElement(std::int64_t value, std::int64_t q) : value_(value), q_(q) {}

  std::int64_t value_;
  std::int64_t q_;
};

/// The unique r' with r' = r (mod q) and 0 <= r' < q. Throws
/// Errc::invalid_modulus for q < 1.
ZqElement mod_reduce(std::int64_t r, std::int64_t q);

/// Centered representative: reduce into [0, q), then subtract q when the
/// result exceeds q/2. Even q yields (-q/2, q/2]; odd q yields
/// [-(q-1)/2, (q-1)/2]. Throws Errc::invalid_modulus for q < 2.
std::int64_t mod_reduce_symmetric(std::int64_t r, std::int64_t q);

class RqPolynomial {
 public:
  /// Zero polynomial. n must be a power of two, q >= 2.
  RqPolynomial(std::size_t n, std::int64_t q);
  /// Coefficients are reduced mod q; the count must be a power of two.
  RqPolynomial(const std::vector<std::int64_t>& coefficients, std::int64_t q);

  std::size_t degree_bound() const noexcept { return coeffs_.size(); }
  std::int64_t modulus() const noexcept { return q_; }
  ZqElement coefficient(std::size_t i) const;
  void set_coefficient(std::size_t i, std::int64_t value);

  friend RqPolynomial operator+(const RqPolynomial& a, const RqPolynomial& b);
  friend bool operator==(const RqPolynomial& a, const RqPolynomial& b) = default;

 private:
  std::vector<std::int64_t> coeffs_;
  std::int64_t q_;
};

class RqVector {
 public:
  /// All entries must share (n, q); throws Errc::invalid_parameter otherwise.
  explicit RqVector(std::vector<RqPolynomial> entries);
  /// k zero polynomials.
  RqVector(std::size_t k, std::size_t n, std::int64_t q);

  std::size_t rank() const noexcept { return entries_.size(); }
  const RqPolynomial& operator[](std::size_t i) const { return entries_.at(i); }
  RqPolynomial& operator[](std::size_t i) { return entries_.at(i); }
  const std::vector<RqPolynomial>& entries() const noexcept { return entries_; }

  friend RqVector operator+(const RqVector& a, const RqVector& b);
  friend bool operator==(const RqVector& a, const RqVector& b) = default;

 private:
  std::vector<RqPolynomial> entries_;
};

/// |x mod+ q|, lifted to polynomials and vectors by taking the maximum.
std::int64_t inf_norm(ZqElement x);
std::int64_t inf_norm(const RqPolynomial& p);
std::int64_t inf_norm(const RqVector& v);

struct CbdParams {
  int eta = 2;
};

/// Reads bits least-significant first within each byte.
class BitReader {
 public:
  explicit BitReader(ByteView bytes) : bytes_(bytes) {}

  /// Throws Errc::insufficient_entropy when the stream is exhausted.
  int next_bit();
  std::size_t remaining_bits() const noexcept { return bytes_.size() * 8 - position_; }

 private:
  ByteView bytes_;
  std::size_t position_ = 0;
};

/// One draw from B_eta: consumes eta bits a_i then eta bits b_i and returns
/// sum(a_i) - sum(b_i).
int sample_cbd(CbdParams params, BitReader& bits);

/// Nearest integer to numerator / denominator, rounding ties down.
/// Both arguments non-negative, denominator positive.
std::int64_t round_ties_down(std::int64_t numerator, std::int64_t denominator);

/// round(2^d * x / q) mod 2^d. Requires 2^d < q (Errc::invalid_parameter).
std::uint32_t compress(ZqElement x, int d);

/// round(q * y / 2^d) mod q. Requires 0 <= y < 2^d (Errc::invalid_input).
ZqElement decompress(std::uint32_t y, int d, std::int64_t q);

/// The guaranteed decompress(compress(x)) error, round(q / 2^(d+1)).
std::int64_t compression_error_bound(std::int64_t q, int d);

/// Unpacks 12-bit little-endian packed coefficients (Kyber's polynomial
/// encoding). Values are returned unreduced so callers can check them
/// against q. The input length must be a multiple of 3.
std::vector<std::uint16_t> unpack_12bit(ByteView packed);

}  // namespace ecsap::lattice
