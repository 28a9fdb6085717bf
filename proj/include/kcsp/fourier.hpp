#pragma once

#include "kcsp/predicates.hpp"
#include "kcsp/rational.hpp"
#include "kcsp/sign_vector.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kcsp {

// A predicate C that is a union of Hamming-weight slices of {+1,-1}^k.
class PredicateSet {
 public:
  PredicateSet(int k, std::vector<int> slices);

  static PredicateSet from_mixture(const MixtureDistribution& mixture);
  static PredicateSet everything(int k);

  int arity() const { return k_; }
  // Sorted, distinct slice weights (number of +1 coordinates).
  const std::vector<int>& slices() const { return slices_; }

  bool contains(const SignVector& y) const {
    return y.arity() == k_ && accepts_plus_count(y.count_plus());
  }
  bool accepts_plus_count(int plus) const { return accept_[plus] != 0; }

  std::uint64_t cardinality() const;
  // |C| / 2^k, the value of a uniformly random assignment.
  Rational density() const;

  friend bool operator==(const PredicateSet& a, const PredicateSet& b) {
    return a.k_ == b.k_ && a.slices_ == b.slices_;
  }

 private:
  int k_;
  std::vector<int> slices_;
  std::vector<char> accept_;  // indexed by number of +1 coordinates
};

// Spectrum of the 0/1 indicator of C: coef(S) = 2^-k sum_{y in C} chi_S(y).
// Numerators are exact integers over the shared denominator 2^k.
struct FourierSpectrum {
  int k = 0;
  std::vector<std::int64_t> numerators;  // indexed by subset bitmask

  Rational coefficient(std::uint64_t subset) const;
  double coefficient_value(std::uint64_t subset) const;
  std::int64_t numerator(std::uint64_t subset) const {
    return numerators.at(subset);
  }
};

inline constexpr int kDenseSpectrumLimit = 24;

// Dense fast Walsh-Hadamard transform. Throws capacity when k exceeds
// max_k; symmetric_coefficient answers any k.
FourierSpectrum wht_spectrum(const PredicateSet& c,
                             int max_k = kDenseSpectrumLimit);

// Sum_S coef(S)^2 == |C| / 2^k, checked in exact integer arithmetic.
bool parseval_holds(const FourierSpectrum& spectrum, const PredicateSet& c);

// Coefficient shared by every subset of size d (C is permutation
// symmetric), by counting slice members per sign pattern on S.
Rational symmetric_coefficient(const PredicateSet& c, int degree);

// 2^-k sum_{y in C} y_i1 y_i2 y_i3 from slice third moments. Throws
// invalid_request on repeated or out-of-range coordinates.
Rational trilinear_coefficient(const PredicateSet& c, int i1, int i2, int i3);

// Degree-3 elementary symmetric polynomial of a +-1 vector with coordinate
// sum s: (s^3 - 3ks + 2s) / 6.
BigInt elementary_cubic(int k, int coordinate_sum);

enum class Degree3Path { symmetric, triple_sum };

// P^(3)(y) = sum_{i1<i2<i3} a_{i1 i2 i3} y_i1 y_i2 y_i3.
class Degree3Evaluator {
 public:
  // Coefficients from the closed form.
  explicit Degree3Evaluator(const PredicateSet& c);
  // Coefficients read from a dense spectrum (independent route).
  explicit Degree3Evaluator(const FourierSpectrum& spectrum);

  int arity() const { return k_; }
  double evaluate(const SignVector& y, Degree3Path path) const;
  // Exact value; symmetric predicates only.
  Rational evaluate_exact(const SignVector& y) const;

 private:
  int k_;
  bool symmetric_;
  Rational common_;                  // valid when symmetric_
  std::vector<double> per_triple_;   // lexicographic i1<i2<i3 order
};

double eval_degree3(const PredicateSet& c, const SignVector& y,
                    Degree3Path path = Degree3Path::symmetric);

struct Degree3Scan {
  double min_value = 0;
  double max_value = 0;
  SignVector argmin;
  std::uint64_t members = 0;
};

// Visits every y in C (capacity error above 2^26 members).
Degree3Scan scan_degree3(const PredicateSet& c,
                         Degree3Path path = Degree3Path::symmetric);

struct LowDegreeReport {
  Rational degree0;
  Rational max_abs_degree1;
  Rational max_abs_degree2;
  Rational degree3;  // the common tri-linear coefficient (0 when k < 3)
  Rational min_p3_on_c;
  Rational max_p3_on_c;
};

LowDegreeReport low_degree_report(const PredicateSet& c);

// "mask,degree,coefficient" rows; coefficients as exact p/q.
void write_spectrum_csv(std::ostream& out, const FourierSpectrum& spectrum,
                        bool include_zero = false);

}  // namespace kcsp
