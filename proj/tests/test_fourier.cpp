#include "kcsp/error.hpp"
#include "kcsp/fourier.hpp"
#include "kcsp/rng.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

namespace kcsp {
namespace {

// Naive transform: 2^-k sum_y 1_C(y) prod_{i in S} y_i.
Rational naive_coefficient(const PredicateSet& c, std::uint64_t subset) {
  const int k = c.arity();
  std::int64_t total = 0;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
    const SignVector y(k, code);
    if (!c.contains(y)) continue;
    total += (std::popcount(code & subset) % 2 == 0) ? 1 : -1;
  }
  return Rational(total, std::int64_t{1} << k);
}

PredicateSet random_predicate(int k, Rng& rng) {
  std::vector<int> slices;
  while (slices.empty()) {
    for (int m = 0; m <= k; ++m) {
      if (rng() & 1U) slices.push_back(m);
    }
  }
  return PredicateSet(k, slices);
}

TEST(PredicateSet, Basics) {
  const PredicateSet c(16, {11, 5, 9});
  EXPECT_EQ(c.slices(), (std::vector<int>{5, 9, 11}));
  EXPECT_EQ(c.cardinality(), 20176U);
  EXPECT_EQ(c.density(), Rational(20176, 65536));
  EXPECT_TRUE(c.accepts_plus_count(9));
  EXPECT_FALSE(c.accepts_plus_count(8));
  EXPECT_THROW(PredicateSet(4, {5}), Error);
}

TEST(Spectrum, EvenParityK3) {
  const PredicateSet parity(3, {1, 3});
  EXPECT_EQ(trilinear_coefficient(parity, 0, 1, 2), Rational(1, 2));
  const FourierSpectrum s = wht_spectrum(parity);
  EXPECT_EQ(s.coefficient(0), Rational(1, 2));
  EXPECT_EQ(s.coefficient(0b111), Rational(1, 2));
  for (std::uint64_t mask = 1; mask < 7; ++mask) EXPECT_EQ(s.coefficient(mask), 0);
}

TEST(Spectrum, DenseMatchesNaive) {
  Rng rng(11);
  for (int k = 1; k <= 8; ++k) {
    const PredicateSet c = random_predicate(k, rng);
    const FourierSpectrum s = wht_spectrum(c);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      EXPECT_EQ(s.coefficient(mask), naive_coefficient(c, mask));
    }
  }
}

TEST(Spectrum, ParsevalAndTrilinearUpToK12) {
  Rng rng(5);
  for (int k = 3; k <= 12; ++k) {
    for (int trial = 0; trial < 3; ++trial) {
      const PredicateSet c = random_predicate(k, rng);
      const FourierSpectrum s = wht_spectrum(c);
      EXPECT_TRUE(parseval_holds(s, c));
      for (int d = 0; d <= k; ++d) {
        EXPECT_EQ(symmetric_coefficient(c, d), s.coefficient(arity_mask(d)));
      }
      const std::uint64_t mask = (1U << 0) | (1U << (k / 2)) | (1U << (k - 1));
      EXPECT_EQ(trilinear_coefficient(c, 0, k / 2, k - 1), s.coefficient(mask));
    }
  }
}

TEST(Spectrum, CapacityLimit) {
  EXPECT_THROW(wht_spectrum(PredicateSet::everything(25)), Error);
  EXPECT_THROW(wht_spectrum(PredicateSet::everything(10), 8), Error);
}

TEST(Spectrum, ParsevalDetectsTampering) {
  const PredicateSet c(6, {2, 3});
  FourierSpectrum s = wht_spectrum(c);
  s.numerators[5] += 2;
  EXPECT_FALSE(parseval_holds(s, c));
}

TEST(Spectrum, CsvHeaderAndRows) {
  std::ostringstream out;
  write_spectrum_csv(out, wht_spectrum(PredicateSet(3, {1, 3})));
  EXPECT_EQ(out.str(), "mask,degree,coefficient\n0,0,1/2\n7,3,1/2\n");
}

TEST(Degree3, ElementaryCubic) {
  // e3 of (1,1,1,-1): triples with one -1 contribute -1 (3 of them), one triple +1.
  EXPECT_EQ(elementary_cubic(4, 2), BigInt(-2));
  EXPECT_EQ(elementary_cubic(3, 3), BigInt(1));
  EXPECT_EQ(elementary_cubic(3, -3), BigInt(-1));
}

TEST(Degree3, PathsAgreeOnRandomInputsK16) {
  const PredicateSet c(16, {5, 9, 11});
  const Degree3Evaluator closed(c);
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const SignVector y(16, rng() & arity_mask(16));
    const double fast = closed.evaluate(y, Degree3Path::symmetric);
    const double slow = closed.evaluate(y, Degree3Path::triple_sum);
    EXPECT_NEAR(fast, slow, 1e-12 * (1 + std::abs(slow)));
    EXPECT_NEAR(fast, to_double(closed.evaluate_exact(y)), 1e-15);
  }
}

TEST(Degree3, DenseRouteAgreesK10) {
  const PredicateSet c(10, {2, 5, 7});
  const Degree3Evaluator closed(c);
  const Degree3Evaluator dense(wht_spectrum(c));
  for (std::uint64_t code = 0; code < 1024; code += 7) {
    const SignVector y(10, code);
    EXPECT_NEAR(closed.evaluate(y, Degree3Path::triple_sum), dense.evaluate(y, Degree3Path::triple_sum),
                1e-12);
  }
}

TEST(Degree3, ScanAtK16) {
  const PredicateSet c(16, {5, 9, 11});
  const Degree3Scan scan = scan_degree3(c);
  EXPECT_EQ(scan.members, 20176U);
  EXPECT_DOUBLE_EQ(scan.min_value, -715.0 / 16384.0);
  EXPECT_EQ(scan.argmin.count_plus(), 5);
  const LowDegreeReport r = low_degree_report(c);
  EXPECT_EQ(r.degree3, Rational(-143, 32768));
  EXPECT_EQ(r.min_p3_on_c, Rational(-715, 16384));
  EXPECT_EQ(r.max_p3_on_c, Rational(1001, 16384));
  EXPECT_EQ(r.degree0, Rational(1261, 4096));
  EXPECT_EQ(r.max_abs_degree1, Rational(715, 32768));
  EXPECT_EQ(r.max_abs_degree2, Rational(39, 16384));
}

}  // namespace
}  // namespace kcsp
