#include "ecsap/lattice_math.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "ecsap/errors.hpp"

namespace ecsap::lattice {

namespace {

__extension__ using Wide = __int128;

void require_modulus(std::int64_t q, std::int64_t minimum) {
  if (q < minimum) {
    throw Error(Errc::invalid_modulus, "modulus " + std::to_string(q) + " is below " +
                                           std::to_string(minimum));
  }
}

void require_same_modulus(std::int64_t a, std::int64_t b) {
  if (a != b) throw Error(Errc::invalid_parameter, "operands have different moduli");
}

void require_power_of_two(std::size_t n) {
  if (!std::has_single_bit(n)) {
    throw Error(Errc::invalid_parameter, "polynomial length " + std::to_string(n) +
                                             " is not a power of two");
  }
}

void require_d(int d) {
  if (d < 1 || d > 30) throw Error(Errc::invalid_parameter, "d out of range");
}

}  // namespace

ZqElement mod_reduce(std::int64_t r, std::int64_t q) {
  require_modulus(q, 1);
  std::int64_t v = r % q;
  if (v < 0) v += q;
  return ZqElement(v, q);
}

ZqElement operator+(ZqElement a, ZqElement b) {
  require_same_modulus(a.q_, b.q_);
  return mod_reduce(a.value_ + b.value_, a.q_);
}

ZqElement operator-(ZqElement a, ZqElement b) {
  require_same_modulus(a.q_, b.q_);
  return mod_reduce(a.value_ - b.value_, a.q_);
}

ZqElement operator*(ZqElement a, ZqElement b) {
  require_same_modulus(a.q_, b.q_);
  const auto product = static_cast<Wide>(a.value_) * b.value_;
  return mod_reduce(static_cast<std::int64_t>(product % a.q_), a.q_);
}

std::int64_t mod_reduce_symmetric(std::int64_t r, std::int64_t q) {
  require_modulus(q, 2);
  const std::int64_t v = mod_reduce(r, q).value();
  // For odd q, v > q/2 and v > floor(q/2) coincide on integers.
  return v > q / 2 ? v - q : v;
}

RqPolynomial::RqPolynomial(std::size_t n, std::int64_t q) : coeffs_(n, 0), q_(q) {
  require_power_of_two(n);
  require_modulus(q, 2);
}

RqPolynomial::RqPolynomial(const std::vector<std::int64_t>& coefficients, std::int64_t q)
    : coeffs_(coefficients.size()), q_(q) {
  require_power_of_two(coefficients.size());
  require_modulus(q, 2);
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    coeffs_[i] = mod_reduce(coefficients[i], q).value();
  }
}

ZqElement RqPolynomial::coefficient(std::size_t i) const {
  return mod_reduce(coeffs_.at(i), q_);
}

void RqPolynomial::set_coefficient(std::size_t i, std::int64_t value) {
  coeffs_.at(i) = mod_reduce(value, q_).value();
}

RqPolynomial operator+(const RqPolynomial& a, const RqPolynomial& b) {
  require_same_modulus(a.q_, b.q_);
  if (a.coeffs_.size() != b.coeffs_.size()) {
    throw Error(Errc::invalid_parameter, "polynomials have different lengths");
  }
  RqPolynomial out(a.coeffs_.size(), a.q_);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    out.coeffs_[i] = mod_reduce(a.coeffs_[i] + b.coeffs_[i], a.q_).value();
  }
  return out;
}

RqVector::RqVector(std::vector<RqPolynomial> entries) : entries_(std::move(entries)) {
  for (const auto& p : entries_) {
    if (p.modulus() != entries_.front().modulus() ||
        p.degree_bound() != entries_.front().degree_bound()) {
      throw Error(Errc::invalid_parameter, "vector entries disagree on (n, q)");
    }
  }
}

RqVector::RqVector(std::size_t k, std::size_t n, std::int64_t q)
    : entries_(k, RqPolynomial(n, q)) {}

RqVector operator+(const RqVector& a, const RqVector& b) {
  if (a.rank() != b.rank()) throw Error(Errc::invalid_parameter, "vectors differ in rank");
  std::vector<RqPolynomial> sum;
  sum.reserve(a.rank());
  for (std::size_t i = 0; i < a.rank(); ++i) sum.push_back(a[i] + b[i]);
  return RqVector(std::move(sum));
}

std::int64_t inf_norm(ZqElement x) {
  const std::int64_t s = mod_reduce_symmetric(x.value(), x.modulus());
  return s < 0 ? -s : s;
}

std::int64_t inf_norm(const RqPolynomial& p) {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < p.degree_bound(); ++i) {
    best = std::max(best, inf_norm(p.coefficient(i)));
  }
  return best;
}

std::int64_t inf_norm(const RqVector& v) {
  std::int64_t best = 0;
  for (const auto& p : v.entries()) best = std::max(best, inf_norm(p));
  return best;
}

int BitReader::next_bit() {
  if (position_ >= bytes_.size() * 8) {
    throw Error(Errc::insufficient_entropy, "bit stream exhausted");
  }
  const int bit = (bytes_[position_ / 8] >> (position_ % 8)) & 1;
  ++position_;
  return bit;
}

int sample_cbd(CbdParams params, BitReader& bits) {
  if (params.eta < 1) throw Error(Errc::invalid_parameter, "eta must be at least 1");
  if (bits.remaining_bits() < static_cast<std::size_t>(2 * params.eta)) {
    throw Error(Errc::insufficient_entropy, "bit stream shorter than 2*eta");
  }
  int a = 0;
  int b = 0;
  for (int i = 0; i < params.eta; ++i) a += bits.next_bit();
  for (int i = 0; i < params.eta; ++i) b += bits.next_bit();
  return a - b;
}

std::int64_t round_ties_down(std::int64_t numerator, std::int64_t denominator) {
  // floor(n/d + 1/2) rounds ties up; shifting by one before the floor sends
  // exact halves down and leaves every other value unchanged.
  return (2 * numerator + denominator - 1) / (2 * denominator);
}

std::uint32_t compress(ZqElement x, int d) {
  require_d(d);
  const std::int64_t two_d = std::int64_t{1} << d;
  if (two_d >= x.modulus()) {
    throw Error(Errc::invalid_parameter, "compress requires 2^d < q");
  }
  return static_cast<std::uint32_t>(round_ties_down(two_d * x.value(), x.modulus()) % two_d);
}

ZqElement decompress(std::uint32_t y, int d, std::int64_t q) {
  require_d(d);
  require_modulus(q, 2);
  const std::int64_t two_d = std::int64_t{1} << d;
  if (y >= two_d) throw Error(Errc::invalid_input, "decompress input exceeds 2^d");
  return mod_reduce(round_ties_down(q * static_cast<std::int64_t>(y), two_d), q);
}

std::int64_t compression_error_bound(std::int64_t q, int d) {
  require_d(d);
  return round_ties_down(q, std::int64_t{1} << (d + 1));
}

std::vector<std::uint16_t> unpack_12bit(ByteView packed) {
  if (packed.size() % 3 != 0) throw Error(Errc::wrong_length, "12-bit packing needs 3-byte groups");
  std::vector<std::uint16_t> out;
  out.reserve(packed.size() / 3 * 2);
  for (std::size_t i = 0; i < packed.size(); i += 3) {
    out.push_back(static_cast<std::uint16_t>(packed[i] | ((packed[i + 1] & 0x0f) << 8)));
    out.push_back(static_cast<std::uint16_t>((packed[i + 1] >> 4) | (packed[i + 2] << 4)));
  }
  return out;
}

}  // namespace ecsap::lattice
