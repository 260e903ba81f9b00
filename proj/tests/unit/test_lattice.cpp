#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>

#include "ecsap/errors.hpp"
#include "ecsap/lattice_math.hpp"

using namespace ecsap;
using namespace ecsap::lattice;

namespace {

// Nearest-integer division with ties rounded down, computed independently in
// long double for the small ranges these tests use.
std::int64_t nearest_ties_down(long double v) {
  const long double f = std::floor(v);
  return (v - f > 0.5L) ? static_cast<std::int64_t>(f) + 1 : static_cast<std::int64_t>(f);
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(ModReduce, Examples) {
  EXPECT_EQ(mod_reduce(3330, 3329).value(), 1);
  EXPECT_EQ(mod_reduce(0, 3329).value(), 0);
  EXPECT_EQ(mod_reduce(-1, 3329).value(), 3328);
  EXPECT_EQ(mod_reduce(-3329 * 5 - 2, 3329).value(), 3327);
}

TEST(ModReduce, RejectsNonPositiveModulus) {
  try {
    mod_reduce(1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_modulus);
  }
  EXPECT_THROW(mod_reduce(1, -7), Error);
}

TEST(ModReduceSymmetric, Examples) {
  EXPECT_EQ(mod_reduce_symmetric(3, 4), -1);
  EXPECT_EQ(mod_reduce_symmetric(2, 4), 2);
  EXPECT_EQ(mod_reduce_symmetric(3328, 3329), -1);
  EXPECT_THROW(mod_reduce_symmetric(0, 1), Error);
}

TEST(ModReduceSymmetric, BruteForceRangeAndCongruence) {
  for (std::int64_t q : {2, 3, 4, 5, 16, 17, 3329}) {
    for (std::int64_t r = -2 * q; r < 2 * q; ++r) {
      const std::int64_t s = mod_reduce_symmetric(r, q);
      ASSERT_EQ(((s - r) % q + q) % q, 0) << r << " " << q;
      // Centered range (-q/2, q/2]: 2s lies in (-q, q].
      ASSERT_GT(2 * s, -q);
      ASSERT_LE(2 * s, q);
    }
  }
}

TEST(InfNorm, ScalarPolynomialVector) {
  EXPECT_EQ(inf_norm(mod_reduce(3328, 3329)), 1);
  EXPECT_EQ(inf_norm(RqPolynomial(256, 3329)), 0);

  RqVector v(3, 256, 3329);
  v[1].set_coefficient(17, 1664);
  std::int64_t direct = 0;
  for (const auto& p : v.entries()) {
    for (std::size_t i = 0; i < p.degree_bound(); ++i) {
      direct = std::max<std::int64_t>(direct, std::llabs(mod_reduce_symmetric(p.coefficient(i).value(), 3329)));
    }
  }
  EXPECT_EQ(inf_norm(v), 1664);
  EXPECT_EQ(inf_norm(v), direct);
}

TEST(InfNorm, TriangleInequalityExhaustiveSmallModulus) {
  const std::int64_t q = 97;
  for (std::int64_t a = 0; a < q; ++a) {
    for (std::int64_t b = 0; b < q; ++b) {
      const auto x = mod_reduce(a, q);
      const auto y = mod_reduce(b, q);
      ASSERT_LE(inf_norm(x + y), inf_norm(x) + inf_norm(y));
      ASSERT_EQ(inf_norm(x) == 0, a == 0);
    }
  }
}

TEST(RqPolynomial, RequiresPowerOfTwoLengthAndMatchingShapes) {
  EXPECT_THROW(RqPolynomial(255, 3329), Error);
  EXPECT_THROW(RqPolynomial(std::vector<std::int64_t>(3, 0), 3329), Error);
  EXPECT_THROW(RqVector({RqPolynomial(256, 3329), RqPolynomial(128, 3329)}), Error);
  EXPECT_THROW(RqVector({RqPolynomial(256, 3329), RqPolynomial(256, 7681)}), Error);

  RqPolynomial a(std::vector<std::int64_t>{3328, 5, -1, 0}, 3329);
  RqPolynomial b(std::vector<std::int64_t>{1, 3324, 1, 0}, 3329);
  EXPECT_EQ(a + b, RqPolynomial(4, 3329));
}

TEST(Cbd, Examples) {
  const std::uint8_t all_ones = 0x0f;
  BitReader r1(ByteView(&all_ones, 1));
  EXPECT_EQ(sample_cbd({2}, r1), 0);

  const std::uint8_t a_only = 0x03;
  BitReader r2(ByteView(&a_only, 1));
  EXPECT_EQ(sample_cbd({2}, r2), 2);
}

TEST(Cbd, ExhaustedStreamIsReported) {
  const std::uint8_t one = 0xff;
  BitReader r(ByteView(&one, 1));
  EXPECT_EQ(sample_cbd({3}, r), 0);
  try {
    sample_cbd({3}, r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_entropy);
  }
}

TEST(Cbd, ExhaustiveEnumerationMatchesBinomialDifference) {
  for (int eta = 1; eta <= 4; ++eta) {
    std::map<int, std::int64_t> counts;
    const int patterns = 1 << (2 * eta);
    for (int bits = 0; bits < patterns; ++bits) {
      const std::uint8_t byte = static_cast<std::uint8_t>(bits);
      BitReader r(ByteView(&byte, 1));
      ++counts[sample_cbd({eta}, r)];
    }
    // P(a - b = x) * 4^eta = sum_j C(eta, j) C(eta, j - x).
    for (int x = -eta; x <= eta; ++x) {
      std::int64_t expected = 0;
      for (int j = 0; j <= eta; ++j) {
        if (j - x >= 0 && j - x <= eta) expected += binomial(eta, j) * binomial(eta, j - x);
      }
      EXPECT_EQ(counts[x], expected) << "eta=" << eta << " x=" << x;
    }
  }
}

TEST(Compress, Examples) {
  EXPECT_EQ(compress(mod_reduce(0, 3329), 10), 0u);
  EXPECT_EQ(compress(mod_reduce(3328, 3329), 1), 0u);
  EXPECT_EQ(decompress(0, 10, 3329).value(), 0);
  EXPECT_EQ(compression_error_bound(3329, 10), 2);
  EXPECT_EQ(compression_error_bound(3329, 4), 104);
}

TEST(Compress, ParameterChecks) {
  EXPECT_THROW(compress(mod_reduce(5, 3329), 12), Error);
  EXPECT_THROW(decompress(1024, 10, 3329), Error);
  try {
    decompress(16, 4, 3329);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_input);
  }
}

TEST(Compress, AgreesWithFloatingPointOracle) {
  const std::int64_t q = 3329;
  for (int d = 1; d <= 11; ++d) {
    const std::int64_t two_d = std::int64_t{1} << d;
    for (std::int64_t x = 0; x < q; ++x) {
      const auto expected = nearest_ties_down(static_cast<long double>(two_d) * x / q) % two_d;
      ASSERT_EQ(compress(mod_reduce(x, q), d), static_cast<std::uint32_t>(expected));
    }
    for (std::int64_t y = 0; y < two_d; ++y) {
      const auto expected = nearest_ties_down(static_cast<long double>(q) * y / two_d) % q;
      ASSERT_EQ(decompress(static_cast<std::uint32_t>(y), d, q).value(), expected);
    }
  }
}

TEST(Compress, TiesRoundDown) {
  EXPECT_EQ(round_ties_down(3, 2), 1);
  EXPECT_EQ(round_ties_down(5, 2), 2);
  EXPECT_EQ(round_ties_down(7, 5), 1);
  EXPECT_EQ(round_ties_down(8, 5), 2);
  // q = 4, d = 1: 2 * 1 / 4 = 0.5 is a tie.
  EXPECT_EQ(compress(mod_reduce(1, 4), 1), 0u);
}

TEST(Unpack12, DecodesKnownLayout) {
  const std::uint8_t packed[3] = {0x01, 0x23, 0x45};
  const auto v = unpack_12bit(packed);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], 0x301);
  EXPECT_EQ(v[1], 0x452);
}
