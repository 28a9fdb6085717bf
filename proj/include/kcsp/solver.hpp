#pragma once

#include "kcsp/csp.hpp"
#include "kcsp/rng.hpp"
#include "kcsp/sign_vector.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kcsp {

// objective(x) = sum_{i<j} 2 a_ij x_i x_j, i.e. x^T A x with zero diagonal.
class QuadraticForm {
 public:
  explicit QuadraticForm(int n = 0);

  int size() const { return n_; }
  // Accumulates into a_ij (order of i, j irrelevant; i != j).
  void add(int i, int j, double a);
  const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

  double objective(std::span<const Sign> x) const;
  // Relaxed objective over row-major n x rank unit vectors.
  double relaxed_objective(std::span<const double> vectors, int rank) const;

  struct Neighbor {
    int index;
    double weight;
  };
  // Symmetric adjacency lists, rebuilt on each call.
  std::vector<std::vector<Neighbor>> adjacency() const;

 private:
  int n_;
  std::map<std::pair<int, int>, double> entries_;
};

// Left variables first, then right: a_{i, L + p} = c / 2 so the quadratic
// objective equals the bilinear value.
QuadraticForm to_quadratic(const BilinearForm& form);

struct RelaxationOptions {
  int rank = 0;          // 0 selects ceil(sqrt(2n))
  int restarts = 4;      // random initialisations besides the warm start
  int max_sweeps = 2000;
  double tolerance = 1e-12;
  std::uint64_t seed = 0;
};

struct GramVectors {
  int n = 0;
  int rank = 0;
  std::vector<double> data;  // row-major n x rank
  double relaxation_value = 0;
  bool converged = true;

  std::span<const double> vector(int i) const {
    return std::span<const double>(data).subspan(static_cast<std::size_t>(i) * rank, rank);
  }
};

// Single-flip hill climbing from all +1.
Assignment greedy_warm_start(const QuadraticForm& form);

// Low-rank block-coordinate ascent (each unit vector is replaced by the
// normalised sum of its weighted neighbours) from an embedded greedy
// integral point and from random starts. The returned value is never below
// the warm start's objective. Budget exhaustion sets converged = false.
GramVectors solve_relaxation(const QuadraticForm& form,
                             const RelaxationOptions& options = {});

struct RoundingConfig {
  double truncation = 0;  // 0 selects sqrt(2 ln max(n, 2))
  int repetitions = 64;
  std::uint64_t seed = 0;
};

double default_truncation(int n);

// +1 with probability (1 + y) / 2, so E[x] = y for y in [-1, 1].
Sign randomized_sign(double y, Rng& rng);

struct RoundingResult {
  Assignment x;
  double objective = 0;
  int best_repetition = 0;
};

// Gaussian projection, clamp(<v_i, g> / T, -1, 1), independent randomized
// signs; best of R repetitions, ties to the lexicographically smallest.
// Repetition r draws from its own stream derive_seed(seed, r).
RoundingResult cw_round(const GramVectors& vectors, const QuadraticForm& form,
                        const RoundingConfig& config);

// Fixes the copies of one group (0, 1 or 2) and returns the bilinear form
// over the other two, lower group on the left. Throws
// incomplete_substitution when a referenced index lacks a +-1 value.
BilinearForm substitute_group(const TrilinearForm& form, int group,
                              std::span<const Sign> values);

struct BiLinConfig {
  RoundingConfig rounding;
  RelaxationOptions relaxation;
  CollapseRule collapse = CollapseRule::first_copy;
};

// Rounds one tri-linear form in two rounds without reference to an
// instance.
struct TwoRoundResult {
  std::array<Assignment, 3> copies;  // x^(1), x^(2), x^(3)
  Assignment pair_values;            // round-1 values of merged pairs
  double relaxation1 = 0;
  double bilinear1 = 0;  // merged form at round-1 assignment
  double relaxation2 = 0;
  double bilinear2 = 0;  // substituted form at round-2 assignment
  double trilinear = 0;  // form at the combined copies
  bool converged = true;
};

TwoRoundResult two_round_trilinear(const TrilinearForm& form,
                                   const BiLinConfig& config);

struct StageValues {
  double relaxation1 = 0;
  double bilinear1 = 0;
  double relaxation2 = 0;
  double bilinear2 = 0;
  double trilinear = 0;
  Rational collapsed;  // instance value of the collapsed copies
  Rational final_value;
};

struct BiLinResult {
  Assignment assignment;
  std::array<Assignment, 3> copies;
  std::array<int, 3> positions{};
  StageValues stages;
  Rational baseline;   // |C| / 2^k
  Rational advantage;  // final_value - baseline
  std::string selected;  // which pool member won
  bool degenerate = false;
  bool converged = true;
};

// Steps 1-3 over I^(2) and I^(3); the final assignment is the best of
// {collapsed copies, their negation, a fresh uniform assignment, the
// local improvement of the collapsed copies}. An empty tri-linear form
// returns the best of four uniform assignments, flagged degenerate.
BiLinResult bilin_two_round(const CspInstance& inst,
                            const std::array<int, 3>& positions,
                            const BiLinConfig& config);

// Runs every position triple with its own derived seed and keeps the best
// final value (earliest triple on ties).
BiLinResult bilin_best_of_positions(
    const CspInstance& inst, std::span<const std::array<int, 3>> triples,
    const BiLinConfig& config);

}  // namespace kcsp
