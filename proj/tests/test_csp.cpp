#include "kcsp/csp.hpp"
#include "kcsp/error.hpp"
#include "kcsp/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace kcsp {
namespace {

const RationalTriple kProfile{Rational(1, 4), Rational(3, 4), Rational(3, 4)};

MixtureDistribution paper_mixture() {
  return build_mixture(BiasProfile::create(16, kProfile));
}

Assignment from_code(int n, std::uint64_t code) {
  Assignment x(n);
  for (int i = 0; i < n; ++i) x[i] = ((code >> i) & 1U) ? Sign{-1} : Sign{1};
  return x;
}

CspInstance small_instance(std::uint64_t seed, int k = 4, int n = 7, int m = 12) {
  return gen_uniform(PredicateSet(k, {1, 3}), n, m, seed);
}

TEST(Instance, ValueCountsSatisfiedTuples) {
  // x0 x1 x2 with even parity on literal tuples.
  const PredicateSet parity(3, {1, 3});
  CspInstance inst(3, parity,
                   {{{0, 1, 2}, SignVector(3, 0)}, {{0, 1, 2}, SignVector(3, 0b001)}});
  EXPECT_EQ(value(inst, Assignment{1, 1, 1}), Rational(1, 2));
  EXPECT_EQ(value(inst, Assignment{-1, 1, 1}), Rational(1, 2));
  EXPECT_EQ(inst.literal_tuple(1, Assignment{1, 1, 1}), SignVector(3, 0b001));
}

TEST(Instance, Validation) {
  const PredicateSet c(3, {1, 3});
  auto code_of = [&](auto&& make) {
    try {
      make();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::incomplete_substitution;
  };
  EXPECT_EQ(code_of([&] { CspInstance(3, c, {{{0, 0, 1}, SignVector(3, 0)}}); }),
            Errc::malformed_instance);
  EXPECT_EQ(code_of([&] { CspInstance(3, c, {{{0, 1, 3}, SignVector(3, 0)}}); }),
            Errc::malformed_instance);
  EXPECT_EQ(code_of([&] { CspInstance(3, c, {{{0, 1}, SignVector(2, 0)}}); }),
            Errc::malformed_instance);
  EXPECT_EQ(code_of([&] {
              CspInstance(3, c, {{{0, 1, 2}, SignVector(3, 0)}}, std::vector<Rational>{Rational(1, 2)});
            }),
            Errc::malformed_instance);
  const CspInstance ok(3, c, {{{0, 1, 2}, SignVector(3, 0)}});
  EXPECT_THROW(value(ok, Assignment{1, 1}), Error);
}

TEST(Instance, WeightedValue) {
  const PredicateSet c(3, {3});
  const CspInstance inst(3, c, {{{0, 1, 2}, SignVector(3, 0)}, {{2, 1, 0}, SignVector(3, 0b111)}},
                         std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
  EXPECT_EQ(value(inst, Assignment{1, 1, 1}), Rational(1, 3));
  EXPECT_EQ(value(inst, Assignment{-1, -1, -1}), Rational(2, 3));
}

TEST(Tracker, MatchesValueAlongRandomFlips) {
  const CspInstance inst = small_instance(3, 5, 9, 40);
  Rng rng(8);
  Assignment x(9, 1);
  ValueTracker tracker(inst, x);
  for (int step = 0; step < 300; ++step) {
    const int v = static_cast<int>(rng() % 9);
    const std::int64_t predicted = tracker.flip_delta(v);
    const std::int64_t before = tracker.score();
    tracker.flip(v);
    x[v] = static_cast<Sign>(-x[v]);
    EXPECT_EQ(tracker.score() - before, predicted);
    EXPECT_EQ(tracker.value(), value(inst, x));
  }
}

TEST(Tracker, LocalImproveNeverWorse) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CspInstance inst = small_instance(seed, 4, 10, 30);
    const Assignment start(10, 1);
    const Assignment better = local_improve(inst, start);
    EXPECT_GE(value(inst, better), value(inst, start));
    ValueTracker t(inst, better);
    for (int v = 0; v < 10; ++v) EXPECT_LE(t.flip_delta(v), 0);
  }
}

TEST(Generators, Deterministic) {
  const auto a = gen_planted(paper_mixture(), 30, 50, 0.05, 42);
  const auto b = gen_planted(paper_mixture(), 30, 50, 0.05, 42);
  EXPECT_EQ(a.instance.constraints(), b.instance.constraints());
  EXPECT_EQ(a.planted, b.planted);
  const auto c = gen_planted(paper_mixture(), 30, 50, 0.05, 43);
  EXPECT_NE(a.instance.constraints(), c.instance.constraints());
  const PredicateSet pred = PredicateSet::from_mixture(paper_mixture());
  EXPECT_EQ(gen_uniform(pred, 30, 50, 1).constraints(), gen_uniform(pred, 30, 50, 1).constraints());
}

TEST(Generators, Rejections) {
  EXPECT_THROW(gen_planted(paper_mixture(), 10, 5, 0.0, 1), Error);
  EXPECT_THROW(gen_planted(paper_mixture(), 20, 0, 0.0, 1), Error);
  EXPECT_THROW(gen_planted(paper_mixture(), 20, 5, 1.0, 1), Error);
}

TEST(Generators, NoiselessPlantedSatisfiesEverything) {
  const auto p = gen_planted(paper_mixture(), 20, 500, 0.0, 9);
  EXPECT_EQ(value(p.instance, p.planted), 1);
}

TEST(Generators, PlantedLiteralMarginals) {
  // Literal tuples under the planted assignment are mixture draws, so
  // each coordinate is +1 with probability 1/2 and pairs with 1/4.
  const int m = 100000;
  const auto p = gen_planted(paper_mixture(), 20, m, 0.0, 77);
  std::array<long, 16> plus{};
  long pair01 = 0;
  long triple = 0;
  for (std::size_t c = 0; c < p.instance.size(); ++c) {
    const SignVector z = p.instance.literal_tuple(c, p.planted);
    for (int i = 0; i < 16; ++i) plus[i] += z[i] == 1;
    pair01 += (z[0] == 1 && z[1] == 1);
    triple += z[0] * z[1] * z[2];
  }
  const double se1 = 0.5 / std::sqrt(m);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(plus[i] / double(m), 0.5, 5 * se1);
  EXPECT_NEAR(pair01 / double(m), 0.25, 5 * std::sqrt(0.25 * 0.75 / m));
  EXPECT_NEAR(triple / double(m), -1.0 / 84.0, 5 / std::sqrt(m));
}

TEST(Generators, UniformSignsAreBalanced) {
  const int m = 100000;
  const auto inst = gen_uniform(PredicateSet(16, {5, 9, 11}), 20, m, 5);
  long plus = 0;
  for (const auto& con : inst.constraints()) plus += con.signs.count_plus();
  EXPECT_NEAR(plus / (16.0 * m), 0.5, 5 * 0.5 / std::sqrt(16.0 * m));
}

TEST(ObjectiveSpectrum, FullExpansionIsExact) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CspInstance inst = small_instance(seed, 4, 6, 10);
    const MultilinearPolynomial poly = objective_spectrum(inst, 4);
    for (std::uint64_t code = 0; code < 64; ++code) {
      const Assignment x = from_code(6, code);
      EXPECT_EQ(poly.evaluate(x), value(inst, x));
    }
  }
}

TEST(ObjectiveSpectrum, TermLimit) {
  const CspInstance inst = small_instance(1, 4, 6, 10);
  EXPECT_THROW(objective_spectrum(inst, 4, 5), Error);
}

TEST(Trilinear, EvenParitySingleTerm) {
  const CspInstance inst(3, PredicateSet(3, {1, 3}), {{{0, 1, 2}, SignVector(3, 0b010)}});
  const TrilinearForm f = extract_trilinear(inst, {0, 1, 2});
  ASSERT_EQ(f.terms.size(), 1U);
  EXPECT_EQ(f.terms[0].i1, 0);
  EXPECT_EQ(f.terms[0].i2, 1);
  EXPECT_EQ(f.terms[0].i3, 2);
  EXPECT_DOUBLE_EQ(f.terms[0].coefficient, -0.5);
  EXPECT_THROW(extract_trilinear(inst, {0, 0, 2}), Error);
}

TEST(Trilinear, ReplicatedEvaluationMatchesPositionalDegree3) {
  const CspInstance inst = small_instance(6, 5, 8, 25);
  const TrilinearForm f = extract_trilinear(inst, {0, 2, 4});
  const Rational a = trilinear_coefficient(inst.predicate(), 0, 2, 4);
  for (std::uint64_t code = 0; code < 256; code += 5) {
    const Assignment x = from_code(8, code);
    Rational expected = 0;
    for (std::size_t c = 0; c < inst.size(); ++c) {
      const SignVector t = inst.literal_tuple(c, x);
      expected += a * inst.weight(c) * (t[0] * t[2] * t[4]);
    }
    EXPECT_NEAR(f.evaluate(x, x, x), to_double(expected), 1e-12);
  }
}

TEST(Trilinear, CoincidingTriplesAccumulate) {
  const PredicateSet parity(3, {1, 3});
  const CspInstance inst(3, parity,
                         {{{0, 1, 2}, SignVector(3, 0)}, {{0, 1, 2}, SignVector(3, 0)},
                          {{0, 1, 2}, SignVector(3, 0b011)}, {{0, 1, 2}, SignVector(3, 0b001)}});
  // Two +, one + (two flips), one -: net 2 of 4 constraints.
  const TrilinearForm f = extract_trilinear(inst, {0, 1, 2});
  ASSERT_EQ(f.terms.size(), 1U);
  EXPECT_DOUBLE_EQ(f.terms[0].coefficient, 0.5 * 2.0 / 4.0);
}

TEST(Merge, PairsInSortedOrder) {
  TrilinearForm f;
  f.group_size = {2, 3, 3};
  f.terms = {{0, 2, 1, 1.0}, {1, 0, 2, -2.0}, {1, 2, 1, 0.5}};
  const BilinearForm b = merge_to_bilinear(f);
  ASSERT_EQ(b.merged_pairs.size(), 2U);
  EXPECT_EQ(b.merged_pairs[0], std::make_pair(0, 2));
  EXPECT_EQ(b.merged_pairs[1], std::make_pair(2, 1));
  const Assignment x1{1, -1}, x2{-1, 1, 1}, x3{1, -1, 1};
  Assignment pairs;
  for (auto [i, j] : b.merged_pairs) pairs.push_back(static_cast<Sign>(x2[i] * x3[j]));
  EXPECT_DOUBLE_EQ(b.evaluate(x1, pairs), f.evaluate(x1, x2, x3));
}

TEST(Collapse, Rules) {
  TrilinearForm f;
  f.group_size = {4, 4, 4};
  f.terms = {{0, 1, 1, 1.0}, {2, 1, 0, 1.0}};
  const Assignment x1{-1, 1, 1, 1}, x2{1, -1, 1, 1}, x3{1, 1, 1, 1};
  // var0: groups 1,3 ; var1: groups 2,3 ; var2: group 1 ; var3: none.
  const Assignment first = collapse_copies(f, x1, x2, x3, CollapseRule::first_copy);
  EXPECT_EQ(first, (Assignment{-1, -1, 1, 1}));
  const Assignment major = collapse_copies(f, x1, x2, x3, CollapseRule::majority);
  EXPECT_EQ(major, (Assignment{-1, -1, 1, 1}));
  const Assignment x3b{1, 1, 1, 1};
  const Assignment x2b{1, 1, 1, 1};
  const Assignment x1b{-1, 1, 1, 1};
  EXPECT_EQ(collapse_copies(f, x1b, x2b, x3b, CollapseRule::majority)[0], -1);
  EXPECT_THROW(collapse_copies(f, Assignment{1}, x2, x3), Error);
}

}  // namespace
}  // namespace kcsp
