#include "kcsp/fourier.hpp"

#include "kcsp/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

namespace kcsp {

PredicateSet::PredicateSet(int k, std::vector<int> slices)
    : k_(k), slices_(std::move(slices)) {
  if (k <= 0 || k > SignVector::kMaxArity) {
    throw Error(Errc::invalid_request, "predicate arity must lie in 1..64");
  }
  std::sort(slices_.begin(), slices_.end());
  if (std::adjacent_find(slices_.begin(), slices_.end()) != slices_.end()) {
    throw Error(Errc::disjointness, "predicate slices must be distinct");
  }
  accept_.assign(k + 1, 0);
  for (int m : slices_) {
    if (m < 0 || m > k) {
      throw Error(Errc::invalid_request, "predicate slice outside 0..k");
    }
    accept_[m] = 1;
  }
}

PredicateSet PredicateSet::from_mixture(const MixtureDistribution& mixture) {
  std::vector<int> slices;
  for (const auto& s : mixture.slices()) slices.push_back(s.m);
  return PredicateSet(mixture.k(), std::move(slices));
}

PredicateSet PredicateSet::everything(int k) {
  std::vector<int> slices(k + 1);
  for (int m = 0; m <= k; ++m) slices[m] = m;
  return PredicateSet(k, std::move(slices));
}

std::uint64_t PredicateSet::cardinality() const {
  std::uint64_t total = 0;
  for (int m : slices_) total += binomial(k_, m);
  return total;
}

Rational PredicateSet::density() const {
  return Rational(BigInt(cardinality()), BigInt(1) << k_);
}

Rational FourierSpectrum::coefficient(std::uint64_t subset) const {
  return Rational(BigInt(numerators.at(subset)), BigInt(1) << k);
}

double FourierSpectrum::coefficient_value(std::uint64_t subset) const {
  return std::ldexp(static_cast<double>(numerators.at(subset)), -k);
}

FourierSpectrum wht_spectrum(const PredicateSet& c, int max_k) {
  const int k = c.arity();
  if (k > max_k || k > kDenseSpectrumLimit) {
    throw Error(Errc::capacity,
                "dense spectrum limited to k <= " +
                    std::to_string(std::min(max_k, kDenseSpectrumLimit)) +
                    "; use symmetric_coefficient for larger k");
  }
  const std::size_t size = std::size_t{1} << k;
  FourierSpectrum spectrum{k, std::vector<std::int64_t>(size, 0)};
  auto& f = spectrum.numerators;
  for (std::size_t code = 0; code < size; ++code) {
    const int plus = k - std::popcount(code);
    f[code] = c.accepts_plus_count(plus) ? 1 : 0;
  }
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const std::int64_t u = f[i];
        const std::int64_t v = f[i + half];
        f[i] = u + v;
        f[i + half] = u - v;
      }
    }
  }
  return spectrum;
}

bool parseval_holds(const FourierSpectrum& spectrum, const PredicateSet& c) {
  if (spectrum.k != c.arity()) return false;
  // sum_S num(S)^2 = 2^k |C|; at most 2^24 * 2^48 fits in 128 bits.
  unsigned __int128 lhs = 0;
  for (std::int64_t num : spectrum.numerators) {
    const auto mag = static_cast<unsigned __int128>(num < 0 ? -num : num);
    lhs += mag * mag;
  }
  const unsigned __int128 rhs =
      (static_cast<unsigned __int128>(c.cardinality())) << spectrum.k;
  return lhs == rhs;
}

Rational symmetric_coefficient(const PredicateSet& c, int degree) {
  const int k = c.arity();
  if (degree < 0 || degree > k) {
    throw Error(Errc::invalid_request, "degree outside 0..k");
  }
  BigInt total = 0;
  for (int m : c.slices()) {
    // Members of G_m with j of the `degree` fixed coordinates equal to +1.
    for (int j = 0; j <= degree; ++j) {
      const BigInt count =
          BigInt(binomial(degree, j)) * BigInt(binomial(k - degree, m - j));
      if ((degree - j) % 2 == 0) {
        total += count;
      } else {
        total -= count;
      }
    }
  }
  return Rational(total, BigInt(1) << k);
}

Rational trilinear_coefficient(const PredicateSet& c, int i1, int i2, int i3) {
  const int k = c.arity();
  for (int i : {i1, i2, i3}) {
    if (i < 0 || i >= k) {
      throw Error(Errc::invalid_request, "coordinate outside [0, k)");
    }
  }
  if (i1 == i2 || i1 == i3 || i2 == i3) {
    throw Error(Errc::invalid_request, "tri-linear coordinates must be distinct");
  }
  // |G_m| E[z_1 z_2 z_3] = C(k, m) s (s^2 - 3k + 2) / (k (k-1) (k-2)),
  // s = 2m - k, is an integer.
  const __int128 falling = static_cast<__int128>(k) * (k - 1) * (k - 2);
  __int128 total = 0;
  for (int m : c.slices()) {
    const __int128 s = 2 * m - k;
    const __int128 scaled = static_cast<__int128>(binomial(k, m)) * (s * (s * s - 3 * k + 2));
    if (scaled % falling != 0) {
      throw Error(Errc::integrality, "slice third moment is not integral");
    }
    total += scaled / falling;
  }
  const bool negative = total < 0;
  const unsigned __int128 magnitude = negative ? -static_cast<unsigned __int128>(total)
                                               : static_cast<unsigned __int128>(total);
  BigInt numerator = static_cast<std::uint64_t>(magnitude >> 64);
  numerator <<= 64;
  numerator += static_cast<std::uint64_t>(magnitude);
  if (negative) numerator = -numerator;
  return Rational(numerator, BigInt(1) << k);
}

BigInt elementary_cubic(int k, int coordinate_sum) {
  const BigInt s = coordinate_sum;
  return (s * s * s - 3 * BigInt(k) * s + 2 * s) / 6;
}

Degree3Evaluator::Degree3Evaluator(const PredicateSet& c)
    : k_(c.arity()), symmetric_(true) {
  common_ = k_ >= 3 ? trilinear_coefficient(c, 0, 1, 2) : Rational(0);
  const double value = to_double(common_);
  per_triple_.assign(binomial(k_, 3), value);
}

Degree3Evaluator::Degree3Evaluator(const FourierSpectrum& spectrum)
    : k_(spectrum.k), symmetric_(false) {
  per_triple_.reserve(binomial(k_, 3));
  for (int i = 0; i < k_; ++i) {
    for (int j = i + 1; j < k_; ++j) {
      for (int l = j + 1; l < k_; ++l) {
        const std::uint64_t mask = (std::uint64_t{1} << i) |
                                   (std::uint64_t{1} << j) |
                                   (std::uint64_t{1} << l);
        per_triple_.push_back(spectrum.coefficient_value(mask));
      }
    }
  }
}

double Degree3Evaluator::evaluate(const SignVector& y, Degree3Path path) const {
  if (y.arity() != k_) {
    throw Error(Errc::invalid_request, "sign vector arity mismatch");
  }
  if (path == Degree3Path::symmetric && symmetric_) {
    return to_double(evaluate_exact(y));
  }
  double total = 0;
  std::size_t t = 0;
  for (int i = 0; i < k_; ++i) {
    for (int j = i + 1; j < k_; ++j) {
      const int yij = y[i] * y[j];
      for (int l = j + 1; l < k_; ++l) {
        total += per_triple_[t++] * (yij * y[l]);
      }
    }
  }
  return total;
}

Rational Degree3Evaluator::evaluate_exact(const SignVector& y) const {
  if (!symmetric_) {
    throw Error(Errc::precondition, "exact degree-3 value needs the closed form");
  }
  if (y.arity() != k_) {
    throw Error(Errc::invalid_request, "sign vector arity mismatch");
  }
  return common_ * Rational(elementary_cubic(k_, y.sum()));
}

double eval_degree3(const PredicateSet& c, const SignVector& y,
                    Degree3Path path) {
  return Degree3Evaluator(c).evaluate(y, path);
}

Degree3Scan scan_degree3(const PredicateSet& c, Degree3Path path) {
  if (c.cardinality() > (std::uint64_t{1} << 26)) {
    throw Error(Errc::capacity, "predicate too large to scan member by member");
  }
  if (c.cardinality() == 0) {
    throw Error(Errc::invalid_request, "empty predicate");
  }
  const Degree3Evaluator evaluator(c);
  Degree3Scan scan;
  scan.min_value = std::numeric_limits<double>::infinity();
  scan.max_value = -std::numeric_limits<double>::infinity();
  for (int m : c.slices()) {
    for_each_slice_member(HomogeneousSlice{c.arity(), m}, [&](const SignVector& y) {
      const double v = evaluator.evaluate(y, path);
      ++scan.members;
      if (v < scan.min_value) {
        scan.min_value = v;
        scan.argmin = y;
      }
      scan.max_value = std::max(scan.max_value, v);
    });
  }
  return scan;
}

LowDegreeReport low_degree_report(const PredicateSet& c) {
  const int k = c.arity();
  auto magnitude = [](Rational r) { return r < 0 ? Rational(-r) : r; };
  LowDegreeReport report;
  report.degree0 = symmetric_coefficient(c, 0);
  report.max_abs_degree1 = k >= 1 ? magnitude(symmetric_coefficient(c, 1)) : 0;
  report.max_abs_degree2 = k >= 2 ? magnitude(symmetric_coefficient(c, 2)) : 0;
  report.degree3 = k >= 3 ? trilinear_coefficient(c, 0, 1, 2) : Rational(0);
  bool first = true;
  for (int m : c.slices()) {
    // P^(3) depends on y only through its coordinate sum.
    const Rational v =
        report.degree3 * Rational(elementary_cubic(k, 2 * m - k));
    if (first || v < report.min_p3_on_c) report.min_p3_on_c = v;
    if (first || v > report.max_p3_on_c) report.max_p3_on_c = v;
    first = false;
  }
  return report;
}

void write_spectrum_csv(std::ostream& out, const FourierSpectrum& spectrum,
                        bool include_zero) {
  out << "mask,degree,coefficient\n";
  for (std::size_t mask = 0; mask < spectrum.numerators.size(); ++mask) {
    if (!include_zero && spectrum.numerators[mask] == 0) continue;
    out << mask << ',' << std::popcount(mask) << ','
        << to_string(spectrum.coefficient(mask)) << '\n';
  }
}

}  // namespace kcsp
