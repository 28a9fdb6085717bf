#include "kcsp/oracle.hpp"

#include "kcsp/error.hpp"

#include <algorithm>
#include <bit>
#include <thread>

namespace kcsp {

namespace {

struct ChunkBest {
  std::int64_t score = -1;
  Assignment x;
};

void merge_best(ChunkBest& into, const ChunkBest& other) {
  if (other.score > into.score ||
      (other.score == into.score && !other.x.empty() && lex_less(other.x, into.x))) {
    into = other;
  }
}

// Flattened occurrence lists and an acceptance table keep the Gray-code
// inner loop free of indirection.
struct FlatInstance {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> constraint;
  std::vector<std::int8_t> sign;
  std::vector<std::int64_t> weight;
  std::vector<std::uint8_t> accepts;
};

FlatInstance flatten(const CspInstance& inst, std::span<const std::int64_t> weights) {
  const int n = inst.num_variables();
  const int k = inst.arity();
  FlatInstance flat;
  flat.offsets.assign(n + 1, 0);
  for (const auto& con : inst.constraints()) {
    for (int v : con.vars) ++flat.offsets[v + 1];
  }
  for (int v = 0; v < n; ++v) flat.offsets[v + 1] += flat.offsets[v];
  flat.constraint.resize(flat.offsets[n]);
  flat.sign.resize(flat.offsets[n]);
  std::vector<std::uint32_t> fill(flat.offsets.begin(), flat.offsets.end() - 1);
  for (std::size_t c = 0; c < inst.size(); ++c) {
    const auto& con = inst.constraints()[c];
    for (std::size_t j = 0; j < con.vars.size(); ++j) {
      const std::uint32_t at = fill[con.vars[j]]++;
      flat.constraint[at] = static_cast<std::uint32_t>(c);
      flat.sign[at] = static_cast<std::int8_t>(con.signs[static_cast<int>(j)]);
    }
  }
  flat.weight.assign(weights.begin(), weights.end());
  flat.accepts.resize(k + 1);
  for (int p = 0; p <= k; ++p) flat.accepts[p] = inst.predicate().accepts_plus_count(p) ? 1 : 0;
  return flat;
}

ChunkBest search_chunk(const CspInstance& inst, const FlatInstance& flat,
                       int low_bits, std::uint64_t prefix) {
  const int n = inst.num_variables();
  Assignment x(n, 1);
  for (int v = low_bits; v < n; ++v) {
    if ((prefix >> (v - low_bits)) & 1U) x[v] = -1;
  }
  std::vector<std::uint8_t> count(inst.size(), 0);
  for (int v = 0; v < n; ++v) {
    for (std::uint32_t o = flat.offsets[v]; o < flat.offsets[v + 1]; ++o) {
      if (flat.sign[o] * x[v] > 0) ++count[flat.constraint[o]];
    }
  }
  std::int64_t score = 0;
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (flat.accepts[count[c]]) score += flat.weight[c];
  }
  ChunkBest best{score, x};
  const std::uint64_t steps = std::uint64_t{1} << low_bits;
  for (std::uint64_t s = 1; s < steps; ++s) {
    const int var = std::countr_zero(s);
    const std::int8_t xv = x[var];
    for (std::uint32_t o = flat.offsets[var]; o < flat.offsets[var + 1]; ++o) {
      const std::uint32_t c = flat.constraint[o];
      const int before = flat.accepts[count[c]];
      count[c] = static_cast<std::uint8_t>(count[c] + (flat.sign[o] * xv > 0 ? -1 : 1));
      const int after = flat.accepts[count[c]];
      score += (after - before) * flat.weight[c];
    }
    x[var] = static_cast<Sign>(-xv);
    if (score > best.score || (score == best.score && lex_less(x, best.x))) {
      best.score = score;
      best.x = x;
    }
  }
  return best;
}

}  // namespace

OracleReport brute_max_csp(const CspInstance& inst, int ceiling, unsigned threads) {
  const int n = inst.num_variables();
  if (n > ceiling || n > 40) {
    throw Error(Errc::capacity, "brute force limited to n <= " +
                                    std::to_string(std::min(ceiling, 40)));
  }
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  int prefix_bits = 0;
  while ((1U << prefix_bits) < threads && prefix_bits < n && prefix_bits < 8) ++prefix_bits;
  const int low_bits = n - prefix_bits;
  const std::uint64_t chunks = std::uint64_t{1} << prefix_bits;

  const ValueTracker scaled(inst, Assignment(n, 1));
  const FlatInstance flat = flatten(inst, scaled.weights());
  std::vector<ChunkBest> results(chunks);
  if (chunks == 1) {
    results[0] = search_chunk(inst, flat, low_bits, 0);
  } else {
    std::vector<std::jthread> workers;
    const unsigned pool = std::min<unsigned>(threads, static_cast<unsigned>(chunks));
    for (unsigned w = 0; w < pool; ++w) {
      workers.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += pool) {
          results[c] = search_chunk(inst, flat, low_bits, c);
        }
      });
    }
  }
  ChunkBest best;
  for (const auto& r : results) merge_best(best, r);
  return {Rational(best.score, scaled.scale()), best.x, std::uint64_t{1} << n};
}

FormOracleReport brute_max_form(const QuadraticForm& form, int ceiling) {
  const int n = form.size();
  if (n > ceiling) {
    throw Error(Errc::capacity, "form brute force limited to " +
                                    std::to_string(ceiling) + " variables");
  }
  Assignment x(n, 1);
  FormOracleReport report{form.objective(x), x, 1};
  const std::uint64_t steps = std::uint64_t{1} << n;
  for (std::uint64_t s = 1; s < steps; ++s) {
    const int bit = std::countr_zero(s);
    x[bit] = static_cast<Sign>(-x[bit]);
    const double v = form.objective(x);
    ++report.evaluations;
    if (v > report.optimum || (v == report.optimum && lex_less(x, report.assignment))) {
      report.optimum = v;
      report.assignment = x;
    }
  }
  return report;
}

FormOracleReport brute_max_form(const TrilinearForm& form, int ceiling) {
  // Compress each group to its referenced indices.
  std::array<std::vector<int>, 3> used;
  for (int g = 0; g < 3; ++g) {
    const auto refs = form.referenced(g);
    for (int i = 0; i < form.group_size[g]; ++i) {
      if (refs[i]) used[g].push_back(i);
    }
  }
  const int total = static_cast<int>(used[0].size() + used[1].size() + used[2].size());
  if (total > ceiling) {
    throw Error(Errc::capacity, "form brute force limited to " +
                                    std::to_string(ceiling) + " variables");
  }
  std::array<Assignment, 3> x;
  for (int g = 0; g < 3; ++g) x[g].assign(form.group_size[g], 1);
  auto concat = [&] {
    Assignment out;
    for (const auto& part : x) out.insert(out.end(), part.begin(), part.end());
    return out;
  };
  FormOracleReport report{form.evaluate(x[0], x[1], x[2]), concat(), 1};
  const std::uint64_t steps = std::uint64_t{1} << total;
  for (std::uint64_t s = 1; s < steps; ++s) {
    int bit = std::countr_zero(s);
    int g = 0;
    while (bit >= static_cast<int>(used[g].size())) {
      bit -= static_cast<int>(used[g].size());
      ++g;
    }
    Sign& slot = x[g][used[g][bit]];
    slot = static_cast<Sign>(-slot);
    const double v = form.evaluate(x[0], x[1], x[2]);
    ++report.evaluations;
    if (v > report.optimum) {
      report.optimum = v;
      report.assignment = concat();
    } else if (v == report.optimum) {
      Assignment candidate = concat();
      if (lex_less(candidate, report.assignment)) report.assignment = std::move(candidate);
    }
  }
  return report;
}

namespace {

MomentTables empty_tables(int k) {
  MomentTables t;
  t.k = k;
  t.marginal.assign(k, 0);
  t.pair.assign(static_cast<std::size_t>(k) * k, 0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      for (int l = j + 1; l < k; ++l) t.triples.push_back({i, j, l});
    }
  }
  t.triple_patterns.assign(t.triples.size(), {});
  return t;
}

// Adds integer counts of one code, weighted by `add`, into count tables.
template <class Int>
void accumulate(int k, std::uint64_t code, const Int& weight,
                const std::vector<std::array<int, 3>>& triples,
                std::vector<Int>& marginal, std::vector<Int>& pair,
                std::vector<Int>& patterns) {
  for (int i = 0; i < k; ++i) {
    if ((code >> i) & 1U) continue;
    marginal[i] += weight;
    for (int j = i + 1; j < k; ++j) {
      if (!((code >> j) & 1U)) pair[i * k + j] += weight;
    }
  }
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const auto& [i, j, l] = triples[t];
    const unsigned pattern = ((code >> i) & 1U) | (((code >> j) & 1U) << 1) |
                             (((code >> l) & 1U) << 2);
    patterns[t * 8 + pattern] += weight;
  }
}

}  // namespace

MomentTables enumerate_moments(const AtomDistribution& dist) {
  const int k = dist.k;
  if (k < 1 || k > 14) {
    throw Error(Errc::capacity, "explicit moment enumeration limited to k <= 14");
  }
  // Integer numerators over a common denominator keep the sums exact.
  BigInt lcd = 1;
  Rational total = 0;
  for (const auto& [code, p] : dist.atoms) {
    if (p < 0 || (code & ~arity_mask(k)) != 0) {
      throw Error(Errc::invalid_distribution, "invalid atom in distribution");
    }
    lcd = boost::multiprecision::lcm(lcd, boost::multiprecision::denominator(p));
    total += p;
  }
  if (total != 1) {
    throw Error(Errc::invalid_distribution, "probabilities do not sum to 1");
  }
  MomentTables t = empty_tables(k);
  std::vector<BigInt> marginal(k), pair(static_cast<std::size_t>(k) * k),
      patterns(t.triples.size() * 8);
  for (const auto& [code, p] : dist.atoms) {
    if (p == 0) continue;
    const BigInt w = boost::multiprecision::numerator(p * Rational(lcd));
    accumulate(k, code, w, t.triples, marginal, pair, patterns);
  }
  for (int i = 0; i < k; ++i) t.marginal[i] = Rational(marginal[i], lcd);
  for (std::size_t i = 0; i < pair.size(); ++i) t.pair[i] = Rational(pair[i], lcd);
  for (std::size_t i = 0; i < t.triples.size(); ++i) {
    for (int p = 0; p < 8; ++p) t.triple_patterns[i][p] = Rational(patterns[i * 8 + p], lcd);
  }
  return t;
}

MomentTables enumerate_moments(const MixtureDistribution& dist) {
  const int k = dist.k();
  if (k > 20) {
    throw Error(Errc::capacity, "mixture moment enumeration limited to k <= 20");
  }
  MomentTables t = empty_tables(k);
  for (std::size_t l = 0; l < dist.slices().size(); ++l) {
    const auto& slice = dist.slices()[l];
    std::vector<std::int64_t> marginal(k, 0), pair(static_cast<std::size_t>(k) * k, 0),
        patterns(t.triples.size() * 8, 0);
    for_each_slice_member(slice, [&](const SignVector& z) {
      accumulate<std::int64_t>(k, z.code(), 1, t.triples, marginal, pair, patterns);
    });
    const Rational scale = dist.weights()[l] / Rational(BigInt(slice.cardinality()));
    for (int i = 0; i < k; ++i) t.marginal[i] += scale * marginal[i];
    for (std::size_t i = 0; i < pair.size(); ++i) {
      if (pair[i] != 0) t.pair[i] += scale * pair[i];
    }
    for (std::size_t i = 0; i < t.triples.size(); ++i) {
      for (int p = 0; p < 8; ++p) {
        if (patterns[i * 8 + p] != 0) t.triple_patterns[i][p] += scale * patterns[i * 8 + p];
      }
    }
  }
  return t;
}

}  // namespace kcsp
