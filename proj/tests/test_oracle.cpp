#include "kcsp/error.hpp"
#include "kcsp/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace kcsp {
namespace {

Assignment from_code(int n, std::uint64_t code) {
  Assignment x(n);
  for (int i = 0; i < n; ++i) x[i] = ((code >> i) & 1U) ? Sign{-1} : Sign{1};
  return x;
}

Rational naive_max(const CspInstance& inst) {
  Rational best = -1;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << inst.num_variables()); ++code) {
    best = std::max(best, value(inst, from_code(inst.num_variables(), code)));
  }
  return best;
}

TEST(BruteCsp, MatchesNaiveEnumeration) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const CspInstance inst = gen_uniform(PredicateSet(4, {1, 3}), 9, 30, seed);
    const OracleReport r = brute_max_csp(inst, 26, 1);
    EXPECT_EQ(r.optimum, naive_max(inst));
    EXPECT_EQ(value(inst, r.assignment), r.optimum);
    EXPECT_EQ(r.evaluations, 512U);
  }
}

TEST(BruteCsp, LexFirstOptimum) {
  // Everything satisfied: the all-(+1) assignment must be reported.
  const CspInstance inst(4, PredicateSet::everything(3), {{{0, 1, 2}, SignVector(3, 5)}});
  const OracleReport r = brute_max_csp(inst);
  EXPECT_EQ(r.optimum, 1);
  EXPECT_EQ(r.assignment, Assignment(4, 1));
}

TEST(BruteCsp, ThreadCountDoesNotMatter) {
  const CspInstance inst = gen_uniform(PredicateSet(5, {0, 2, 5}), 12, 60, 4);
  const OracleReport one = brute_max_csp(inst, 26, 1);
  const OracleReport four = brute_max_csp(inst, 26, 4);
  EXPECT_EQ(one.optimum, four.optimum);
  EXPECT_EQ(one.assignment, four.assignment);
}

TEST(BruteCsp, WeightedInstance) {
  const CspInstance inst(3, PredicateSet(3, {3}),
                         {{{0, 1, 2}, SignVector(3, 0)}, {{0, 1, 2}, SignVector(3, 7)}},
                         std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
  EXPECT_EQ(brute_max_csp(inst).optimum, Rational(2, 3));
}

TEST(BruteCsp, InvariantUnderVariablePermutation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CspInstance inst = gen_uniform(PredicateSet(4, {0, 1, 4}), 10, 40, seed);
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Constraint> moved;
    for (const auto& con : inst.constraints()) {
      Constraint c = con;
      for (int& v : c.vars) v = perm[v];
      moved.push_back(c);
    }
    const CspInstance permuted(10, inst.predicate(), moved);
    EXPECT_EQ(brute_max_csp(inst).optimum, brute_max_csp(permuted).optimum);
  }
}

TEST(BruteCsp, Ceiling) {
  const CspInstance inst = gen_uniform(PredicateSet(3, {1}), 12, 5, 1);
  try {
    brute_max_csp(inst, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::capacity);
  }
}

TEST(BruteForm, TrilinearUsesReferencedOnly) {
  TrilinearForm f;
  f.group_size = {30, 30, 30};
  f.terms = {{3, 7, 9, 1.5}, {3, 8, 9, -0.5}};
  const FormOracleReport r = brute_max_form(f, 10);
  EXPECT_DOUBLE_EQ(r.optimum, 2.0);
}

TEST(BruteForm, QuadraticSmall) {
  QuadraticForm q(3);
  q.add(0, 1, 1.0);
  q.add(1, 2, -2.0);
  // Best: x0 = x1, x1 = -x2 -> 2*1 + 2*2 = 6.
  EXPECT_DOUBLE_EQ(brute_max_form(q).optimum, 6.0);
}

TEST(Moments, AtomRouteMatchesMixture) {
  const MixtureDistribution mix({{8, 2}, {8, 5}}, {Rational(1, 3), Rational(2, 3)});
  const MomentTables a = enumerate_moments(mix);
  const MomentTables b = enumerate_moments(AtomDistribution::from_mixture(mix));
  EXPECT_EQ(a.marginal, b.marginal);
  EXPECT_EQ(a.pair, b.pair);
  EXPECT_EQ(a.triple_patterns, b.triple_patterns);
  EXPECT_EQ(a.marginal[0], mix.marginal());
  EXPECT_EQ(a.pair_at(3, 1), mix.pair_joint());
  EXPECT_EQ(a.triple_patterns[0][0], mix.triple_joint());
}

}  // namespace
}  // namespace kcsp
