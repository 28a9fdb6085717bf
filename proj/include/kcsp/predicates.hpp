#pragma once

#include "kcsp/rational.hpp"
#include "kcsp/sign_vector.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace kcsp {

using RationalTriple = std::array<Rational, 3>;

// G_m: the k-tuples with exactly m coordinates equal to +1. The uniform
// distribution on it is the (m/k)-biased homogeneous distribution.
struct HomogeneousSlice {
  int k = 0;
  int m = 0;

  std::uint64_t cardinality() const { return binomial(k, m); }
  bool contains(const SignVector& z) const {
    return z.arity() == k && z.count_plus() == m;
  }
  Rational bias() const { return Rational(m, k); }

  friend bool operator==(const HomogeneousSlice&,
                         const HomogeneousSlice&) = default;
};

// Probability that `order` fixed distinct coordinates are all +1 under the
// uniform distribution on the slice: m^(order falling) / k^(order falling).
// Throws invalid_request when k < order or order is outside 1..3.
Rational slice_moments(const HomogeneousSlice& slice, int order);

// E[z_1 ... z_order] on the slice, derived from the all-(+1) moments by
// expanding z = 2w - 1.
Rational slice_signed_moment(const HomogeneousSlice& slice, int order);

// Calls fn(SignVector) for every member of the slice, in increasing code
// order.
template <class Fn>
void for_each_slice_member(const HomogeneousSlice& slice, Fn&& fn) {
  const int minus = slice.k - slice.m;
  if (minus == 0) {
    fn(SignVector(slice.k, 0));
    return;
  }
  const std::uint64_t mask = arity_mask(slice.k);
  std::uint64_t code = arity_mask(minus);
  while (true) {
    fn(SignVector(slice.k, code));
    // Gosper's hack: next larger word with the same popcount.
    const std::uint64_t low = code & (~code + 1);
    const std::uint64_t ripple = code + low;
    if (ripple == 0 || (ripple & ~mask) != 0) break;
    code = (((ripple ^ code) >> 2) / low) | ripple;
  }
}

// Three slices G_{k/2 + rho_1 sqrt(k)}, G_{k/2 - rho_2 sqrt(k)},
// G_{k/2 + rho_3 sqrt(k)}.
class BiasProfile {
 public:
  // Validates every invariant: k a perfect square, integral slice weights
  // in [0, k], 0 < rho_1 < rho_3, rho_2 > 0, pairwise distinct slices.
  static BiasProfile create(int k, const RationalTriple& rho);

  int k() const { return k_; }
  int root_k() const { return root_k_; }
  const RationalTriple& rho() const { return rho_; }
  const std::array<int, 3>& slice_weights() const { return weights_; }
  // gamma_l = m_l / k.
  Rational gamma(int l) const { return Rational(weights_.at(l), k_); }
  HomogeneousSlice slice(int l) const { return {k_, weights_.at(l)}; }

 private:
  BiasProfile(int k, int root_k, RationalTriple rho, std::array<int, 3> w)
      : k_(k), root_k_(root_k), rho_(std::move(rho)), weights_(w) {}

  int k_;
  int root_k_;
  RationalTriple rho_;
  std::array<int, 3> weights_;
};

struct DisguiseWeights {
  RationalTriple psi;
};

// Exact Gaussian elimination; nullopt when the matrix is singular.
std::optional<std::vector<Rational>> solve_linear_system(
    std::vector<std::vector<Rational>> matrix, std::vector<Rational> rhs);

// Solves sum psi = 1, rho1 psi1 - rho2 psi2 + rho3 psi3 = 0,
// rho1^2 psi1 + rho2^2 psi2 + rho3^2 psi3 = 1/4 exactly.
// Errors: degenerate_profile when singular, infeasible_bias when some
// psi_l <= 0 (the message names the violated condition).
DisguiseWeights solve_disguise(const RationalTriple& rho);

// A convex combination of homogeneous slices with disjoint grounds.
class MixtureDistribution {
 public:
  // General form with any number of slices. Weights must be positive and
  // sum to exactly one; slices must share k and be pairwise distinct.
  MixtureDistribution(std::vector<HomogeneousSlice> slices,
                      std::vector<Rational> weights);

  int k() const { return slices_.front().k; }
  const std::vector<HomogeneousSlice>& slices() const { return slices_; }
  const std::vector<Rational>& weights() const { return weights_; }
  const std::optional<BiasProfile>& profile() const { return profile_; }

  Rational probability(const SignVector& z) const;

  // Coordinate-symmetric moments in closed form.
  Rational marginal() const;        // P[z_i = +1]
  Rational pair_joint() const;      // P[z_i = z_j = +1], i != j
  Rational triple_joint() const;    // P[z_i = z_j = z_l = +1]
  Rational third_signed_moment() const;  // E[z_i z_j z_l]

 private:
  friend MixtureDistribution build_mixture(const BiasProfile& profile);

  std::vector<HomogeneousSlice> slices_;
  std::vector<Rational> weights_;
  std::optional<BiasProfile> profile_;
};

// The three-slice mixture with weights from solve_disguise.
MixtureDistribution build_mixture(const BiasProfile& profile);

// An explicit probability table over {+1,-1}^k keyed by SignVector code.
struct AtomDistribution {
  int k = 0;
  std::map<std::uint64_t, Rational> atoms;

  static AtomDistribution uniform(int k, std::span<const SignVector> support);
  static AtomDistribution from_mixture(const MixtureDistribution& mixture);
};

struct PairwiseReport {
  bool pairwise_independent = false;
  bool balanced = false;
  std::optional<Rational> bias;
  // max over coordinates and pairs of |P_i - gamma| and |P_ij - gamma^2|,
  // with gamma the mean marginal.
  Rational max_deviation;
};

PairwiseReport check_pairwise_independence(const MixtureDistribution& dist);
// Enumerates atoms. Throws invalid_distribution unless probabilities are
// nonnegative and sum to one.
PairwiseReport check_pairwise_independence(const AtomDistribution& dist);

struct TestMoments {
  Rational a;  // P[+1,+1,+1]
  Rational b;  // each pattern with two +1 and one -1
  Rational c;  // each pattern with one +1 and two -1
  Rational d;  // P[-1,-1,-1]
  Rational alpha;
};

// Solves the 4x4 system rows a+3b+3c+d = 1, a-3b+3c-d = alpha, a+b = 1/4,
// c+d = 1/4.
TestMoments test_moments_from_alpha(const Rational& alpha);

// Requires a balanced pairwise independent mixture (precondition error
// otherwise).
TestMoments test_moments(const MixtureDistribution& dist);

// 8 rho_1 (1/4 - rho_2^2) / (k sqrt k).
Rational approximate_alpha(const BiasProfile& profile);

struct SearchConstraints {
  // Allowed |rho_2 - rho_3|; zero means rho_2 == rho_3.
  Rational delta = 0;
};

// rho_l(4/3 rho_l^2 - 1), the per-slice driver of the degree-3 signal.
Rational cubic_driver(const Rational& rho);

// |prod_l cubic_driver(rho_l)|, higher is better.
Rational profile_score(const RationalTriple& rho);

// Enumerates integral profiles at k (a perfect square) with
// rho_1 rho_2 < 1/4, rho_2 rho_3 > 1/4, 1/2 < rho_2^2 < 3/4 and
// 0 < rho_1 < rho_3, ordered by decreasing profile_score.
std::vector<BiasProfile> search_bias_profiles(
    int k, const SearchConstraints& constraints = {});

}  // namespace kcsp
