#pragma once

// Textbook affine secp256k1 arithmetic on arbitrary-precision integers. Slow
// and variable-time; it exists only to cross-check the optimized backend.

#include <array>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace ecsap::testkit {

using BigInt = boost::multiprecision::cpp_int;

struct AffinePoint {
  BigInt x;
  BigInt y;
  bool infinity = true;
};

const BigInt& secp_p();
const BigInt& secp_n();
AffinePoint secp_g();

AffinePoint oracle_add(const AffinePoint& a, const AffinePoint& b);
/// Left-to-right double-and-add.
AffinePoint oracle_mul(const AffinePoint& p, BigInt k);
bool on_curve(const AffinePoint& p);

BigInt from_be(const std::uint8_t* data, std::size_t len);
std::array<std::uint8_t, 32> to_be32(const BigInt& v);

}  // namespace ecsap::testkit
