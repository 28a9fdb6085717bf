#pragma once

#include "kcsp/fourier.hpp"
#include "kcsp/predicates.hpp"
#include "kcsp/rational.hpp"
#include "kcsp/sign_vector.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kcsp {

// Applies the predicate to (signs_j * x_{vars_j})_j.
struct Constraint {
  std::vector<int> vars;
  SignVector signs;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct InstanceMetadata {
  std::optional<std::uint64_t> seed;
  std::string regime;  // "planted", "uniform" or empty
  std::optional<double> noise;
};

class CspInstance {
 public:
  // Throws malformed_instance on any invariant violation. Weights, when
  // given, must be nonnegative and sum to one.
  CspInstance(int n, PredicateSet predicate, std::vector<Constraint> constraints,
              std::optional<std::vector<Rational>> weights = std::nullopt);

  int num_variables() const { return n_; }
  int arity() const { return predicate_.arity(); }
  const PredicateSet& predicate() const { return predicate_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }

  bool has_weights() const { return weights_.has_value(); }
  Rational weight(std::size_t i) const;
  const std::optional<std::vector<Rational>>& weights() const { return weights_; }

  InstanceMetadata metadata;

  // The literal tuple seen by constraint i under x.
  SignVector literal_tuple(std::size_t i, std::span<const Sign> x) const;

 private:
  int n_;
  PredicateSet predicate_;
  std::vector<Constraint> constraints_;
  std::optional<std::vector<Rational>> weights_;
};

// Weighted fraction of satisfied constraints.
Rational value(const CspInstance& inst, std::span<const Sign> x);

// Integer bookkeeping for flip-based search: weights are scaled to
// integers over a common denominator, each constraint tracks how many of
// its literals are +1.
class ValueTracker {
 public:
  ValueTracker(const CspInstance& inst, std::span<const Sign> x);

  std::int64_t score() const { return score_; }
  std::int64_t scale() const { return scale_; }
  Rational value() const { return Rational(score_, scale_); }
  const Assignment& assignment() const { return x_; }
  // Integer weight of each constraint; value = score / scale.
  std::span<const std::int64_t> weights() const { return weight_; }

  void flip(int var);
  // Score change if var were flipped; leaves state untouched.
  std::int64_t flip_delta(int var) const;

 private:
  struct Occurrence {
    int constraint;
    Sign sign;
  };

  const CspInstance* inst_;
  Assignment x_;
  std::vector<std::int64_t> weight_;
  std::vector<int> plus_count_;
  std::vector<std::vector<Occurrence>> occurrences_;
  std::int64_t score_ = 0;
  std::int64_t scale_ = 1;
};

// Repeated first-improvement single flips until no flip helps.
Assignment local_improve(const CspInstance& inst, Assignment x);

struct PlantedInstance {
  CspInstance instance;
  Assignment planted;
};

// Each constraint: k distinct uniform variables; z drawn from the mixture
// with probability 1 - noise, uniform over {+1,-1}^k otherwise; signs set
// so the planted literal tuple equals z.
PlantedInstance gen_planted(const MixtureDistribution& mixture, int n,
                            int num_constraints, double noise,
                            std::uint64_t seed);

CspInstance gen_uniform(const PredicateSet& predicate, int n,
                        int num_constraints, std::uint64_t seed);

// Multilinear polynomial over x_0..x_{n-1}, grouped by degree. Keys are
// strictly increasing variable tuples.
struct MultilinearPolynomial {
  int n = 0;
  std::vector<std::map<std::vector<int>, Rational>> by_degree;

  Rational evaluate(std::span<const Sign> x) const;
  Rational evaluate_degree(int degree, std::span<const Sign> x) const;
};

// Expands the objective E_c[1{literal tuple in C}] up to max_degree (pass
// k for the full, exact expansion). Throws capacity when the expansion
// would exceed term_limit per-constraint terms.
MultilinearPolynomial objective_spectrum(const CspInstance& inst,
                                         int max_degree = 3,
                                         std::size_t term_limit = 50'000'000);

struct TrilinearTerm {
  int i1 = 0;
  int i2 = 0;
  int i3 = 0;
  double coefficient = 0;
};

// Sum of a * x1[i1] x2[i2] x3[i3] over three disjoint groups of variable
// copies. Terms are sorted by (i1, i2, i3) with no duplicates.
struct TrilinearForm {
  std::array<int, 3> group_size{};
  std::vector<TrilinearTerm> terms;

  double evaluate(std::span<const Sign> x1, std::span<const Sign> x2,
                  std::span<const Sign> x3) const;
  // Indices of a group that carry at least one term.
  std::vector<char> referenced(int group) const;
  int total_variables() const {
    return group_size[0] + group_size[1] + group_size[2];
  }
};

struct BilinearTerm {
  int left = 0;
  int right = 0;
  double coefficient = 0;
};

struct BilinearForm {
  int left_size = 0;
  int right_size = 0;
  std::vector<BilinearTerm> terms;
  // For merged forms: right index p stands for x2[pairs[p].first] *
  // x3[pairs[p].second]. Empty otherwise.
  std::vector<std::pair<int, int>> merged_pairs;

  double evaluate(std::span<const Sign> left, std::span<const Sign> right) const;
};

// Collects the tri-linear terms whose three variables sit at constraint
// positions p1, p2, p3 (0-based); position j feeds copy group j.
TrilinearForm extract_trilinear(const CspInstance& inst,
                                const std::array<int, 3>& positions);

// Replaces x2[i2] x3[i3] by a fresh variable per distinct (i2, i3); pair
// ids follow the sorted order of pairs.
BilinearForm merge_to_bilinear(const TrilinearForm& form);

enum class CollapseRule { first_copy, majority };

// Reads one assignment over n variables from the three copies. first_copy
// takes the earliest group that references the variable; majority votes
// over referencing groups with ties going to the earliest. Unreferenced
// variables get +1.
Assignment collapse_copies(const TrilinearForm& form, std::span<const Sign> x1,
                           std::span<const Sign> x2, std::span<const Sign> x3,
                           CollapseRule rule = CollapseRule::first_copy);

}  // namespace kcsp
