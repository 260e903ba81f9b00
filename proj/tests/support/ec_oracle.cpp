#include "ec_oracle.hpp"

#include <algorithm>
#include <iterator>
#include <vector>

namespace ecsap::testkit {

namespace {

BigInt mod(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  return r < 0 ? r + m : r;
}

BigInt inverse(const BigInt& a, const BigInt& m) {
  return boost::multiprecision::powm(mod(a, m), m - 2, m);
}

}  // namespace

const BigInt& secp_p() {
  static const BigInt p("0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F");
  return p;
}

const BigInt& secp_n() {
  static const BigInt n("0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
  return n;
}

AffinePoint secp_g() {
  return {BigInt("0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798"),
          BigInt("0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8"), false};
}

AffinePoint oracle_add(const AffinePoint& a, const AffinePoint& b) {
  if (a.infinity) return b;
  if (b.infinity) return a;
  const BigInt& p = secp_p();
  BigInt lambda;
  if (a.x == b.x) {
    if (mod(a.y + b.y, p) == 0) return {};
    lambda = mod(3 * a.x * a.x * inverse(2 * a.y, p), p);
  } else {
    lambda = mod((b.y - a.y) * inverse(b.x - a.x, p), p);
  }
  AffinePoint r;
  r.x = mod(lambda * lambda - a.x - b.x, p);
  r.y = mod(lambda * (a.x - r.x) - a.y, p);
  r.infinity = false;
  return r;
}

AffinePoint oracle_mul(const AffinePoint& pt, BigInt k) {
  k = mod(k, secp_n());
  AffinePoint acc;
  for (int bit = static_cast<int>(boost::multiprecision::msb(k | 1)); bit >= 0; --bit) {
    acc = oracle_add(acc, acc);
    if (boost::multiprecision::bit_test(k, static_cast<unsigned>(bit))) acc = oracle_add(acc, pt);
  }
  return acc;
}

bool on_curve(const AffinePoint& pt) {
  if (pt.infinity) return true;
  const BigInt& p = secp_p();
  return mod(pt.y * pt.y - pt.x * pt.x * pt.x - 7, p) == 0;
}

BigInt from_be(const std::uint8_t* data, std::size_t len) {
  BigInt v;
  boost::multiprecision::import_bits(v, data, data + len, 8, true);
  return v;
}

std::array<std::uint8_t, 32> to_be32(const BigInt& v) {
  std::vector<std::uint8_t> tmp;
  if (v != 0) boost::multiprecision::export_bits(v, std::back_inserter(tmp), 8, true);
  std::array<std::uint8_t, 32> out{};
  std::copy(tmp.begin(), tmp.end(), out.end() - static_cast<std::ptrdiff_t>(tmp.size()));
  return out;
}

}  // namespace ecsap::testkit
