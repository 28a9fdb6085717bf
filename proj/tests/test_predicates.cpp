#include "kcsp/error.hpp"
#include "kcsp/oracle.hpp"
#include "kcsp/predicates.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace kcsp {
namespace {

const RationalTriple kProfile{Rational(1, 4), Rational(3, 4), Rational(3, 4)};

// Direct count over the slice: fraction of members with the first
// `order` coordinates equal to +1.
Rational counted_moment(int k, int m, int order) {
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
    const SignVector z(k, code);
    if (z.count_plus() != m) continue;
    ++total;
    bool all = true;
    for (int i = 0; i < order; ++i) all = all && z[i] == 1;
    if (all) ++hits;
  }
  return Rational(hits, total);
}

TEST(SliceMoments, MatchEnumeration) {
  for (int k = 3; k <= 14; ++k) {
    for (int m = 0; m <= k; ++m) {
      for (int order = 1; order <= 3; ++order) {
        EXPECT_EQ(slice_moments({k, m}, order), counted_moment(k, m, order))
            << "k=" << k << " m=" << m << " order=" << order;
      }
    }
  }
}

TEST(SliceMoments, KnownValues) {
  EXPECT_EQ(slice_moments({16, 9}, 1), Rational(9, 16));
  EXPECT_EQ(slice_moments({16, 9}, 2), Rational(3, 10));
  EXPECT_EQ(slice_moments({16, 9}, 3), Rational(3, 20));
  EXPECT_THROW(slice_moments({2, 1}, 3), Error);
  EXPECT_THROW(slice_moments({16, 9}, 4), Error);
}

TEST(SliceMembers, GosperVisitsEveryMemberOnce) {
  std::uint64_t count = 0;
  std::uint64_t last = 0;
  bool ordered = true;
  for_each_slice_member({12, 5}, [&](const SignVector& z) {
    EXPECT_EQ(z.count_plus(), 5);
    if (count > 0 && z.code() <= last) ordered = false;
    last = z.code();
    ++count;
  });
  EXPECT_EQ(count, binomial(12, 5));
  EXPECT_TRUE(ordered);
}

TEST(BiasProfile, SliceWeights) {
  EXPECT_EQ(BiasProfile::create(16, kProfile).slice_weights(), (std::array<int, 3>{9, 5, 11}));
  EXPECT_EQ(BiasProfile::create(64, kProfile).slice_weights(), (std::array<int, 3>{34, 26, 38}));
}

TEST(BiasProfile, Rejections) {
  auto code_of = [](int k, RationalTriple rho) {
    try {
      BiasProfile::create(k, rho);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::incomplete_substitution;
  };
  EXPECT_EQ(code_of(15, kProfile), Errc::invalid_request);
  EXPECT_EQ(code_of(16, {Rational(3, 4), Rational(3, 4), Rational(1, 4)}), Errc::invalid_request);
  EXPECT_EQ(code_of(16, {Rational(1, 3), Rational(3, 4), Rational(3, 4)}), Errc::integrality);
  EXPECT_EQ(code_of(16, {Rational(1, 4), Rational(3, 4), Rational(9, 4)}), Errc::integrality);
  EXPECT_EQ(code_of(16, {Rational(1, 4), Rational(3, 4), Rational(1, 4)}), Errc::invalid_request);
}

TEST(Disguise, PaperProfile) {
  const DisguiseWeights w = solve_disguise(kProfile);
  EXPECT_EQ(w.psi[0], Rational(5, 8));
  EXPECT_EQ(w.psi[1], Rational(7, 24));
  EXPECT_EQ(w.psi[2], Rational(1, 12));
  const auto& r = kProfile;
  EXPECT_EQ(w.psi[0] + w.psi[1] + w.psi[2], 1);
  EXPECT_EQ(r[0] * w.psi[0] - r[1] * w.psi[1] + r[2] * w.psi[2], 0);
  EXPECT_EQ(r[0] * r[0] * w.psi[0] + r[1] * r[1] * w.psi[1] + r[2] * r[2] * w.psi[2],
            Rational(1, 4));
}

TEST(Disguise, InfeasibleNamesCondition) {
  try {
    solve_disguise({Rational(1, 2), Rational(3, 4), Rational(3, 4)});
    FAIL() << "expected infeasible_bias";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::infeasible_bias);
    EXPECT_NE(std::string(e.what()).find("rho1"), std::string::npos);
  }
  try {
    solve_disguise({Rational(1, 4), Rational(1, 4), Rational(3, 4)});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::infeasible_bias || e.code() == Errc::degenerate_profile);
  }
}

TEST(Disguise, SingularSystem) {
  EXPECT_FALSE(solve_linear_system({{1, 2}, {2, 4}}, {1, 2}).has_value());
  const auto x = solve_linear_system({{2, 1}, {1, 3}}, {3, 5});
  ASSERT_TRUE(x.has_value());
  EXPECT_EQ((*x)[0], Rational(4, 5));
  EXPECT_EQ((*x)[1], Rational(7, 5));
}

TEST(Mixture, PairwiseIndependentAtK16) {
  const auto mix = build_mixture(BiasProfile::create(16, kProfile));
  EXPECT_EQ(mix.marginal(), Rational(1, 2));
  EXPECT_EQ(mix.pair_joint(), Rational(1, 4));
  const PairwiseReport r = check_pairwise_independence(mix);
  EXPECT_TRUE(r.pairwise_independent);
  EXPECT_TRUE(r.balanced);
  ASSERT_TRUE(r.bias.has_value());
  EXPECT_EQ(*r.bias, Rational(1, 2));
  EXPECT_EQ(r.max_deviation, 0);

  // Independent route: full table of all marginals and pair joints.
  const MomentTables t = enumerate_moments(mix);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(t.marginal[i], Rational(1, 2));
    for (int j = i + 1; j < 16; ++j) EXPECT_EQ(t.pair_at(i, j), Rational(1, 4));
  }
}

TEST(Mixture, ProbabilitiesSumToOne) {
  const auto mix = build_mixture(BiasProfile::create(16, kProfile));
  Rational total = 0;
  for (std::uint64_t code = 0; code < (1U << 16); ++code) total += mix.probability(SignVector(16, code));
  EXPECT_EQ(total, 1);
}

TEST(Mixture, AtomRouteAgrees) {
  const auto mix = build_mixture(BiasProfile::create(16, kProfile));
  const PairwiseReport r = check_pairwise_independence(AtomDistribution::from_mixture(mix));
  EXPECT_TRUE(r.pairwise_independent);
  EXPECT_TRUE(r.balanced);
}

TEST(Mixture, AtomRejectsBadTotals) {
  AtomDistribution d{3, {{0, Rational(1, 2)}}};
  EXPECT_THROW(check_pairwise_independence(d), Error);
  d.atoms[1] = Rational(-1, 2);
  d.atoms[2] = Rational(1);
  EXPECT_THROW(check_pairwise_independence(d), Error);
}

TEST(Mixture, UniformOnEvenParityIsPairwiseIndependent) {
  std::vector<SignVector> support;
  for (std::uint64_t code = 0; code < 8; ++code) {
    if (SignVector(3, code).count_minus() % 2 == 0) support.emplace_back(3, code);
  }
  const PairwiseReport r = check_pairwise_independence(AtomDistribution::uniform(3, support));
  EXPECT_TRUE(r.pairwise_independent);
  EXPECT_TRUE(r.balanced);
}

TEST(Mixture, SingleBiasedSliceIsNotIndependent) {
  const MixtureDistribution single({{16, 9}}, {Rational(1)});
  const PairwiseReport r = check_pairwise_independence(single);
  EXPECT_FALSE(r.pairwise_independent);
  EXPECT_GT(r.max_deviation, 0);
}

TEST(Mixture, ConstructorValidation) {
  EXPECT_THROW(MixtureDistribution({{16, 9}, {16, 9}}, {Rational(1, 2), Rational(1, 2)}), Error);
  EXPECT_THROW(MixtureDistribution({{16, 9}}, {Rational(1, 2)}), Error);
  EXPECT_THROW(MixtureDistribution({{16, 9}, {9, 5}}, {Rational(1, 2), Rational(1, 2)}), Error);
}

TEST(TestMoments, ExactAlphaAtK16) {
  const auto mix = build_mixture(BiasProfile::create(16, kProfile));
  const TestMoments tm = test_moments(mix);
  EXPECT_EQ(tm.alpha, Rational(-1, 84));
  EXPECT_EQ(tm.alpha, mix.third_signed_moment());
  EXPECT_EQ(tm.a + 3 * tm.b + 3 * tm.c + tm.d, 1);
  EXPECT_EQ(tm.a - 3 * tm.b + 3 * tm.c - tm.d, tm.alpha);
  EXPECT_EQ(tm.a + tm.b, Rational(1, 4));
  EXPECT_EQ(tm.c + tm.d, Rational(1, 4));

  // Pattern probabilities counted over the full table agree.
  const MomentTables t = enumerate_moments(mix);
  ASSERT_FALSE(t.triples.empty());
  const auto& p = t.triple_patterns.front();
  EXPECT_EQ(p[0], tm.a);
  EXPECT_EQ(p[1], tm.b);
  EXPECT_EQ(p[3], tm.c);
  EXPECT_EQ(p[7], tm.d);
}

TEST(TestMoments, ApproximationSignAndBand) {
  const BiasProfile profile = BiasProfile::create(16, kProfile);
  const Rational approx = approximate_alpha(profile);
  EXPECT_EQ(approx, Rational(-5, 512));
  const Rational exact = test_moments(build_mixture(profile)).alpha;
  EXPECT_GT(exact * approx, 0);
  EXPECT_LE(abs(exact - approx), abs(approx));
}

TEST(TestMoments, RequiresPairwiseIndependence) {
  const MixtureDistribution single({{16, 9}}, {Rational(1)});
  EXPECT_THROW(test_moments(single), Error);
}

TEST(Search, K64IncludesKnownProfiles) {
  const auto found = search_bias_profiles(64);
  auto has = [&](const RationalTriple& rho) {
    return std::any_of(found.begin(), found.end(), [&](const BiasProfile& p) { return p.rho() == rho; });
  };
  EXPECT_TRUE(has({Rational(1, 8), Rational(3, 4), Rational(3, 4)}));
  EXPECT_TRUE(has({Rational(1, 4), Rational(3, 4), Rational(3, 4)}));
  for (std::size_t i = 1; i < found.size(); ++i) {
    EXPECT_GE(profile_score(found[i - 1].rho()), profile_score(found[i].rho()));
  }
  for (const auto& p : found) {
    const auto& r = p.rho();
    EXPECT_LT(r[0] * r[1], Rational(1, 4));
    EXPECT_GT(r[1] * r[2], Rational(1, 4));
    EXPECT_NO_THROW(build_mixture(p));
  }
}

TEST(Search, TinyArityHasNoProfile) {
  EXPECT_TRUE(search_bias_profiles(4).empty());
}

}  // namespace
}  // namespace kcsp
