#include "kcsp/predicates.hpp"

#include "kcsp/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kcsp {

namespace {

void require_slice(const HomogeneousSlice& slice) {
  if (slice.k <= 0 || slice.k > SignVector::kMaxArity) {
    throw Error(Errc::invalid_request, "slice arity must lie in 1..64");
  }
  if (slice.m < 0 || slice.m > slice.k) {
    throw Error(Errc::invalid_request, "slice weight must lie in 0..k");
  }
}

Rational falling_ratio(int m, int k, int order) {
  Rational r = 1;
  for (int i = 0; i < order; ++i) r *= Rational(m - i, k - i);
  return r;
}

}  // namespace

Rational slice_moments(const HomogeneousSlice& slice, int order) {
  require_slice(slice);
  if (order < 1 || order > 3) {
    throw Error(Errc::invalid_request, "moment order must be 1, 2 or 3");
  }
  if (slice.k < order) {
    throw Error(Errc::invalid_request, "arity is smaller than the moment order");
  }
  return falling_ratio(slice.m, slice.k, order);
}

Rational slice_signed_moment(const HomogeneousSlice& slice, int order) {
  const Rational p1 = slice_moments(slice, 1);
  switch (order) {
    case 1:
      return 2 * p1 - 1;
    case 2:
      return 4 * slice_moments(slice, 2) - 4 * p1 + 1;
    case 3:
      return 8 * slice_moments(slice, 3) - 12 * slice_moments(slice, 2) +
             6 * p1 - 1;
    default:
      throw Error(Errc::invalid_request, "moment order must be 1, 2 or 3");
  }
}

BiasProfile BiasProfile::create(int k, const RationalTriple& rho) {
  if (k <= 0 || k > SignVector::kMaxArity) {
    throw Error(Errc::invalid_request, "arity must lie in 1..64");
  }
  const int root = exact_sqrt(k);
  if (root < 0) {
    throw Error(Errc::invalid_request,
                "k = " + std::to_string(k) + " is not a perfect square");
  }
  if (rho[0] <= 0 || rho[1] <= 0 || rho[2] <= 0) {
    throw Error(Errc::invalid_request, "rho entries must be positive");
  }
  if (!(rho[0] < rho[2])) {
    throw Error(Errc::invalid_request, "profile requires rho1 < rho3");
  }
  const Rational half_k(k, 2);
  const std::array<Rational, 3> exact = {half_k + rho[0] * root,
                                         half_k - rho[1] * root,
                                         half_k + rho[2] * root};
  std::array<int, 3> weights{};
  for (int l = 0; l < 3; ++l) {
    if (boost::multiprecision::denominator(exact[l]) != 1) {
      throw Error(Errc::integrality,
                  "gamma_" + std::to_string(l + 1) + " * k = " +
                      to_string(exact[l]) + " is not an integer");
    }
    const BigInt w = boost::multiprecision::numerator(exact[l]);
    if (w < 0 || w > k) {
      throw Error(Errc::integrality,
                  "gamma_" + std::to_string(l + 1) + " * k = " + w.str() +
                      " lies outside [0, k]");
    }
    weights[l] = w.convert_to<int>();
  }
  if (weights[0] == weights[1] || weights[0] == weights[2] ||
      weights[1] == weights[2]) {
    throw Error(Errc::disjointness, "slice weights are not pairwise distinct");
  }
  return BiasProfile(k, root, rho, weights);
}

std::optional<std::vector<Rational>> solve_linear_system(
    std::vector<std::vector<Rational>> matrix, std::vector<Rational> rhs) {
  const std::size_t n = rhs.size();
  if (matrix.size() != n) {
    throw Error(Errc::invalid_request, "linear system shape mismatch");
  }
  for (const auto& row : matrix) {
    if (row.size() != n) {
      throw Error(Errc::invalid_request, "linear system shape mismatch");
    }
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && matrix[pivot][col] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(matrix[col], matrix[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || matrix[row][col] == 0) continue;
      const Rational factor = matrix[row][col] / matrix[col][col];
      for (std::size_t j = col; j < n; ++j) {
        matrix[row][j] -= factor * matrix[col][j];
      }
      rhs[row] -= factor * rhs[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= matrix[i][i];
  return rhs;
}

DisguiseWeights solve_disguise(const RationalTriple& rho) {
  const auto& [r1, r2, r3] = rho;
  std::vector<std::vector<Rational>> matrix = {
      {1, 1, 1}, {r1, -r2, r3}, {r1 * r1, r2 * r2, r3 * r3}};
  auto solution =
      solve_linear_system(std::move(matrix), {1, 0, Rational(1, 4)});
  if (!solution) {
    throw Error(Errc::degenerate_profile,
                "disguise system is singular for rho = (" + to_string(r1) +
                    ", " + to_string(r2) + ", " + to_string(r3) + ")");
  }
  DisguiseWeights out{{(*solution)[0], (*solution)[1], (*solution)[2]}};
  std::vector<int> bad;
  for (int l = 0; l < 3; ++l) {
    if (out.psi[l] <= 0) bad.push_back(l + 1);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "infeasible bias: psi_";
    for (std::size_t i = 0; i < bad.size(); ++i) {
      msg << (i ? ",psi_" : "") << bad[i];
    }
    msg << " <= 0; violated:";
    const Rational quarter(1, 4);
    bool named = false;
    if (!(r1 * r2 < quarter)) {
      msg << " rho1*rho2 < 1/4";
      named = true;
    }
    if (!(r2 * r3 > quarter)) {
      msg << (named ? "," : "") << " rho2*rho3 > 1/4";
      named = true;
    }
    if (!named) msg << " 0 < rho1 < rho3 with rho2 > 0";
    throw Error(Errc::infeasible_bias, msg.str());
  }
  return out;
}

MixtureDistribution::MixtureDistribution(std::vector<HomogeneousSlice> slices,
                                         std::vector<Rational> weights)
    : slices_(std::move(slices)), weights_(std::move(weights)) {
  if (slices_.empty() || slices_.size() != weights_.size()) {
    throw Error(Errc::invalid_distribution,
                "mixture needs one positive weight per slice");
  }
  std::set<int> seen;
  Rational total = 0;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    require_slice(slices_[l]);
    if (slices_[l].k != slices_.front().k) {
      throw Error(Errc::invalid_request, "mixture slices differ in arity");
    }
    if (!seen.insert(slices_[l].m).second) {
      throw Error(Errc::disjointness,
                  "slice G_" + std::to_string(slices_[l].m) + " repeated");
    }
    if (weights_[l] <= 0) {
      throw Error(Errc::invalid_distribution, "mixture weights must be positive");
    }
    total += weights_[l];
  }
  if (total != 1) {
    throw Error(Errc::invalid_distribution,
                "mixture weights sum to " + to_string(total) + ", not 1");
  }
}

Rational MixtureDistribution::probability(const SignVector& z) const {
  if (z.arity() != k()) return 0;
  const int plus = z.count_plus();
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    if (slices_[l].m == plus) {
      return weights_[l] / Rational(BigInt(slices_[l].cardinality()));
    }
  }
  return 0;
}

Rational MixtureDistribution::marginal() const {
  Rational sum = 0;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    sum += weights_[l] * slice_moments(slices_[l], 1);
  }
  return sum;
}

Rational MixtureDistribution::pair_joint() const {
  Rational sum = 0;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    sum += weights_[l] * slice_moments(slices_[l], 2);
  }
  return sum;
}

Rational MixtureDistribution::triple_joint() const {
  Rational sum = 0;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    sum += weights_[l] * slice_moments(slices_[l], 3);
  }
  return sum;
}

Rational MixtureDistribution::third_signed_moment() const {
  Rational sum = 0;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    sum += weights_[l] * slice_signed_moment(slices_[l], 3);
  }
  return sum;
}

MixtureDistribution build_mixture(const BiasProfile& profile) {
  const DisguiseWeights weights = solve_disguise(profile.rho());
  MixtureDistribution mixture(
      {profile.slice(0), profile.slice(1), profile.slice(2)},
      {weights.psi[0], weights.psi[1], weights.psi[2]});
  mixture.profile_ = profile;
  return mixture;
}

AtomDistribution AtomDistribution::uniform(int k,
                                           std::span<const SignVector> support) {
  AtomDistribution out{k, {}};
  std::set<std::uint64_t> codes;
  for (const auto& z : support) {
    if (z.arity() != k) {
      throw Error(Errc::invalid_distribution, "support arity mismatch");
    }
    codes.insert(z.code());
  }
  if (codes.empty()) {
    throw Error(Errc::invalid_distribution, "empty support");
  }
  const Rational p(1, static_cast<long long>(codes.size()));
  for (auto code : codes) out.atoms.emplace(code, p);
  return out;
}

AtomDistribution AtomDistribution::from_mixture(
    const MixtureDistribution& mixture) {
  if (mixture.k() > 24) {
    throw Error(Errc::capacity, "explicit atom table limited to k <= 24");
  }
  AtomDistribution out{mixture.k(), {}};
  for (std::size_t l = 0; l < mixture.slices().size(); ++l) {
    const auto& slice = mixture.slices()[l];
    const Rational p =
        mixture.weights()[l] / Rational(BigInt(slice.cardinality()));
    for_each_slice_member(slice, [&](const SignVector& z) {
      out.atoms.emplace(z.code(), p);
    });
  }
  return out;
}

namespace {

PairwiseReport make_report(const Rational& gamma, const Rational& deviation) {
  PairwiseReport report;
  report.max_deviation = deviation;
  report.pairwise_independent = deviation == 0 && gamma > 0 && gamma < 1;
  if (report.pairwise_independent) {
    report.bias = gamma;
    report.balanced = gamma == Rational(1, 2);
  }
  return report;
}

Rational abs_diff(const Rational& x, const Rational& y) {
  return x > y ? Rational(x - y) : Rational(y - x);
}

}  // namespace

PairwiseReport check_pairwise_independence(const MixtureDistribution& dist) {
  const Rational gamma = dist.marginal();
  const Rational deviation =
      dist.k() >= 2 ? abs_diff(dist.pair_joint(), gamma * gamma) : Rational(0);
  return make_report(gamma, deviation);
}

PairwiseReport check_pairwise_independence(const AtomDistribution& dist) {
  const int k = dist.k;
  if (k <= 0 || k > 20) {
    throw Error(Errc::capacity, "explicit distributions are limited to k <= 20");
  }
  Rational total = 0;
  std::vector<Rational> marginal(k);
  std::vector<Rational> pair(static_cast<std::size_t>(k) * k);
  for (const auto& [code, p] : dist.atoms) {
    if (p < 0 || (code & ~arity_mask(k)) != 0) {
      throw Error(Errc::invalid_distribution, "invalid atom in distribution");
    }
    total += p;
    if (p == 0) continue;
    for (int i = 0; i < k; ++i) {
      if ((code >> i) & 1U) continue;
      marginal[i] += p;
      for (int j = i + 1; j < k; ++j) {
        if (!((code >> j) & 1U)) pair[i * k + j] += p;
      }
    }
  }
  if (total != 1) {
    throw Error(Errc::invalid_distribution,
                "probabilities sum to " + to_string(total) + ", not 1");
  }
  Rational gamma = 0;
  for (const auto& m : marginal) gamma += m;
  gamma /= k;
  Rational deviation = 0;
  for (int i = 0; i < k; ++i) {
    deviation = std::max(deviation, abs_diff(marginal[i], gamma));
    for (int j = i + 1; j < k; ++j) {
      deviation = std::max(deviation, abs_diff(pair[i * k + j], gamma * gamma));
    }
  }
  return make_report(gamma, deviation);
}

TestMoments test_moments_from_alpha(const Rational& alpha) {
  const Rational quarter(1, 4);
  auto solution = solve_linear_system(
      {{1, 3, 3, 1}, {1, -3, 3, -1}, {1, 1, 0, 0}, {0, 0, 1, 1}},
      {1, alpha, quarter, quarter});
  // The matrix is fixed and nonsingular.
  return TestMoments{(*solution)[0], (*solution)[1], (*solution)[2],
                     (*solution)[3], alpha};
}

TestMoments test_moments(const MixtureDistribution& dist) {
  if (dist.k() < 3) {
    throw Error(Errc::precondition, "test moments need k >= 3");
  }
  const PairwiseReport report = check_pairwise_independence(dist);
  if (!report.balanced) {
    throw Error(Errc::precondition,
                "test moments require a balanced pairwise independent mixture");
  }
  return test_moments_from_alpha(dist.third_signed_moment());
}

Rational approximate_alpha(const BiasProfile& profile) {
  const auto& rho = profile.rho();
  return 8 * rho[0] * (Rational(1, 4) - rho[1] * rho[1]) /
         (profile.k() * profile.root_k());
}

Rational cubic_driver(const Rational& rho) {
  return rho * (Rational(4, 3) * rho * rho - 1);
}

Rational profile_score(const RationalTriple& rho) {
  Rational score = cubic_driver(rho[0]) * cubic_driver(rho[1]) *
                   cubic_driver(rho[2]);
  return score < 0 ? Rational(-score) : score;
}

std::vector<BiasProfile> search_bias_profiles(
    int k, const SearchConstraints& constraints) {
  const int root = exact_sqrt(k);
  if (k <= 0 || k > SignVector::kMaxArity || root < 0) {
    throw Error(Errc::invalid_request,
                "profile search needs a perfect-square k in 1..64");
  }
  if (constraints.delta < 0) {
    throw Error(Errc::invalid_request, "delta must be nonnegative");
  }
  const Rational half_k(k, 2);
  const Rational quarter(1, 4);
  auto rho_of = [&](int m) { return Rational(Rational(m) - half_k) / root; };

  struct Candidate {
    Rational score;
    RationalTriple rho;
  };
  std::vector<Candidate> found;
  for (int m2 = 0; m2 <= k; ++m2) {
    const Rational rho2 = -rho_of(m2);
    const Rational sq = rho2 * rho2;
    if (rho2 <= 0 || !(sq > Rational(1, 2) && sq < Rational(3, 4))) continue;
    for (int m3 = 0; m3 <= k; ++m3) {
      const Rational rho3 = rho_of(m3);
      if (rho3 <= 0) continue;
      const Rational gap = rho2 > rho3 ? Rational(rho2 - rho3) : Rational(rho3 - rho2);
      if (gap > constraints.delta || !(rho2 * rho3 > quarter)) continue;
      for (int m1 = 0; m1 <= k; ++m1) {
        const Rational rho1 = rho_of(m1);
        if (rho1 <= 0 || !(rho1 < rho3) || !(rho1 * rho2 < quarter)) continue;
        const RationalTriple rho = {rho1, rho2, rho3};
        try {
          (void)BiasProfile::create(k, rho);
          (void)solve_disguise(rho);
        } catch (const Error&) {
          continue;
        }
        found.push_back({profile_score(rho), rho});
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.rho < y.rho;
  });
  std::vector<BiasProfile> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back(BiasProfile::create(k, c.rho));
  return out;
}

}  // namespace kcsp
