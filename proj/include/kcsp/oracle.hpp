#pragma once

#include "kcsp/csp.hpp"
#include "kcsp/predicates.hpp"
#include "kcsp/solver.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace kcsp {

inline constexpr int kOracleCeiling = 26;

struct OracleReport {
  Rational optimum;
  Assignment assignment;  // lexicographically first optimum
  std::uint64_t evaluations = 0;
};

struct FormOracleReport {
  double optimum = 0;
  Assignment assignment;  // for trilinear forms: groups concatenated
  std::uint64_t evaluations = 0;
};

// Exhaustive Gray-code search. The space is split on the top variables
// across `threads` workers (0 = hardware concurrency); the reduction is
// deterministic.
OracleReport brute_max_csp(const CspInstance& inst, int ceiling = kOracleCeiling,
                           unsigned threads = 0);

FormOracleReport brute_max_form(const QuadraticForm& form,
                                int ceiling = kOracleCeiling);
// Enumerates referenced copies only; unreferenced copies are reported +1.
FormOracleReport brute_max_form(const TrilinearForm& form,
                                int ceiling = kOracleCeiling);

struct MomentTables {
  int k = 0;
  std::vector<Rational> marginal;  // P[z_i = +1]
  std::vector<Rational> pair;      // P[z_i = z_j = +1] at i * k + j, i < j
  std::vector<std::array<int, 3>> triples;
  // For each triple, P over the 8 sign patterns; bit b of the pattern index
  // set means the b-th coordinate of the triple is -1.
  std::vector<std::array<Rational, 8>> triple_patterns;

  const Rational& pair_at(int i, int j) const {
    return i < j ? pair[i * k + j] : pair[j * k + i];
  }
};

// Arbitrary tables up to k = 14.
MomentTables enumerate_moments(const AtomDistribution& dist);
// Slice-structured enumeration up to k = 20.
MomentTables enumerate_moments(const MixtureDistribution& dist);

}  // namespace kcsp
