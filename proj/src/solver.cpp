#include "kcsp/solver.hpp"

#include "kcsp/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kcsp {

QuadraticForm::QuadraticForm(int n) : n_(n) {
  if (n < 0) throw Error(Errc::invalid_request, "negative form size");
}

void QuadraticForm::add(int i, int j, double a) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw Error(Errc::invalid_request, "quadratic form index out of range");
  }
  if (i == j) {
    throw Error(Errc::invalid_request, "quadratic form has no diagonal");
  }
  if (i > j) std::swap(i, j);
  entries_[{i, j}] += a;
}

double QuadraticForm::objective(std::span<const Sign> x) const {
  if (static_cast<int>(x.size()) != n_) {
    throw Error(Errc::invalid_request, "assignment size differs from form size");
  }
  double total = 0;
  for (const auto& [ij, a] : entries_) total += 2 * a * (x[ij.first] * x[ij.second]);
  return total;
}

double QuadraticForm::relaxed_objective(std::span<const double> vectors,
                                        int rank) const {
  double total = 0;
  for (const auto& [ij, a] : entries_) {
    const double* vi = vectors.data() + static_cast<std::size_t>(ij.first) * rank;
    const double* vj = vectors.data() + static_cast<std::size_t>(ij.second) * rank;
    double dot = 0;
    for (int r = 0; r < rank; ++r) dot += vi[r] * vj[r];
    total += 2 * a * dot;
  }
  return total;
}

std::vector<std::vector<QuadraticForm::Neighbor>> QuadraticForm::adjacency() const {
  std::vector<std::vector<Neighbor>> adj(n_);
  for (const auto& [ij, a] : entries_) {
    if (a == 0) continue;
    adj[ij.first].push_back({ij.second, a});
    adj[ij.second].push_back({ij.first, a});
  }
  return adj;
}

QuadraticForm to_quadratic(const BilinearForm& form) {
  QuadraticForm q(form.left_size + form.right_size);
  for (const auto& t : form.terms) {
    q.add(t.left, form.left_size + t.right, t.coefficient / 2);
  }
  return q;
}

Assignment greedy_warm_start(const QuadraticForm& form) {
  const int n = form.size();
  const auto adj = form.adjacency();
  Assignment x(n, 1);
  // Flipping x_i changes the objective by -4 x_i sum_j a_ij x_j.
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n; ++i) {
      double field = 0;
      for (const auto& nb : adj[i]) field += nb.weight * x[nb.index];
      if (x[i] * field < 0) {
        x[i] = static_cast<Sign>(-x[i]);
        improved = true;
      }
    }
  }
  return x;
}

namespace {

struct AscentRun {
  std::vector<double> data;
  double value = 0;
  bool converged = false;
};

void normalize(double* v, int rank) {
  double norm = 0;
  for (int r = 0; r < rank; ++r) norm += v[r] * v[r];
  norm = std::sqrt(norm);
  if (norm == 0) {
    v[0] = 1;
    return;
  }
  for (int r = 0; r < rank; ++r) v[r] /= norm;
}

AscentRun ascend(const QuadraticForm& form,
                 const std::vector<std::vector<QuadraticForm::Neighbor>>& adj,
                 std::vector<double> data, int rank,
                 const RelaxationOptions& options) {
  const int n = form.size();
  AscentRun run;
  double value = form.relaxed_objective(data, rank);
  std::vector<double> field(rank);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      if (adj[i].empty()) continue;
      std::fill(field.begin(), field.end(), 0.0);
      for (const auto& nb : adj[i]) {
        const double* vj = data.data() + static_cast<std::size_t>(nb.index) * rank;
        for (int r = 0; r < rank; ++r) field[r] += nb.weight * vj[r];
      }
      double norm = 0;
      for (double f : field) norm += f * f;
      if (norm <= 0) continue;
      norm = std::sqrt(norm);
      double* vi = data.data() + static_cast<std::size_t>(i) * rank;
      for (int r = 0; r < rank; ++r) vi[r] = field[r] / norm;
    }
    const double next = form.relaxed_objective(data, rank);
    const bool done =
        next - value <= options.tolerance * std::max(1.0, std::abs(next));
    value = std::max(value, next);
    if (done) {
      run.converged = true;
      break;
    }
  }
  run.value = form.relaxed_objective(data, rank);
  run.data = std::move(data);
  return run;
}

}  // namespace

GramVectors solve_relaxation(const QuadraticForm& form,
                             const RelaxationOptions& options) {
  const int n = form.size();
  if (n < 1) throw Error(Errc::invalid_request, "relaxation needs n >= 1");
  int rank = options.rank > 0
                 ? options.rank
                 : static_cast<int>(std::ceil(std::sqrt(2.0 * n)));
  rank = std::max(1, rank);
  const auto adj = form.adjacency();
  Rng rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Rank-1 embedding of the greedy point: its value is exactly the greedy
  // objective, and ascent from there cannot go below it.
  const Assignment warm = greedy_warm_start(form);
  std::vector<double> embedded(static_cast<std::size_t>(n) * rank, 0.0);
  for (int i = 0; i < n; ++i) embedded[static_cast<std::size_t>(i) * rank] = warm[i];

  std::vector<std::vector<double>> starts;
  starts.push_back(embedded);
  std::vector<double> perturbed = embedded;
  for (auto& e : perturbed) e += 0.1 * gauss(rng);
  for (int i = 0; i < n; ++i) normalize(perturbed.data() + static_cast<std::size_t>(i) * rank, rank);
  starts.push_back(std::move(perturbed));
  for (int s = 0; s < options.restarts; ++s) {
    std::vector<double> random(static_cast<std::size_t>(n) * rank);
    for (auto& e : random) e = gauss(rng);
    for (int i = 0; i < n; ++i) normalize(random.data() + static_cast<std::size_t>(i) * rank, rank);
    starts.push_back(std::move(random));
  }

  GramVectors best;
  best.n = n;
  best.rank = rank;
  bool have = false;
  bool all_converged = true;
  for (auto& start : starts) {
    AscentRun run = ascend(form, adj, std::move(start), rank, options);
    all_converged = all_converged && run.converged;
    if (!have || run.value > best.relaxation_value) {
      best.data = std::move(run.data);
      best.relaxation_value = run.value;
      have = true;
    }
  }
  best.converged = all_converged;
  return best;
}

double default_truncation(int n) {
  return std::sqrt(2.0 * std::log(static_cast<double>(std::max(n, 2))));
}

Sign randomized_sign(double y, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < (1.0 + y) / 2.0 ? Sign{1} : Sign{-1};
}

RoundingResult cw_round(const GramVectors& vectors, const QuadraticForm& form,
                        const RoundingConfig& config) {
  if (vectors.n != form.size()) {
    throw Error(Errc::invalid_request, "vectors and form differ in size");
  }
  if (config.repetitions < 1) {
    throw Error(Errc::invalid_request, "rounding needs at least one repetition");
  }
  if (config.truncation < 0) {
    throw Error(Errc::invalid_request, "truncation must be positive");
  }
  const int n = vectors.n;
  const int rank = vectors.rank;
  const double t = config.truncation > 0 ? config.truncation : default_truncation(n);
  RoundingResult best;
  std::vector<double> g(rank);
  Assignment x(n);
  for (int rep = 0; rep < config.repetitions; ++rep) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(rep)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& e : g) e = gauss(rng);
    for (int i = 0; i < n; ++i) {
      const auto v = vectors.vector(i);
      double proj = 0;
      for (int r = 0; r < rank; ++r) proj += v[r] * g[r];
      x[i] = randomized_sign(std::clamp(proj / t, -1.0, 1.0), rng);
    }
    const double obj = form.objective(x);
    if (rep == 0 || obj > best.objective ||
        (obj == best.objective && lex_less(x, best.x))) {
      best.x = x;
      best.objective = obj;
      best.best_repetition = rep;
    }
  }
  return best;
}

BilinearForm substitute_group(const TrilinearForm& form, int group,
                              std::span<const Sign> values) {
  if (group < 0 || group > 2) {
    throw Error(Errc::invalid_request, "group must be 0, 1 or 2");
  }
  const int left_group = group == 0 ? 1 : 0;
  const int right_group = group == 2 ? 1 : 2;
  std::map<std::pair<int, int>, double> acc;
  for (const auto& t : form.terms) {
    const std::array<int, 3> idx = {t.i1, t.i2, t.i3};
    const int fixed = idx[group];
    if (fixed >= static_cast<int>(values.size()) ||
        (values[fixed] != 1 && values[fixed] != -1)) {
      throw Error(Errc::incomplete_substitution,
                  "no +-1 value for index " + std::to_string(fixed) +
                      " of group " + std::to_string(group));
    }
    acc[{idx[left_group], idx[right_group]}] += values[fixed] * t.coefficient;
  }
  BilinearForm out;
  out.left_size = form.group_size[left_group];
  out.right_size = form.group_size[right_group];
  for (const auto& [key, c] : acc) {
    if (c != 0) out.terms.push_back({key.first, key.second, c});
  }
  return out;
}

namespace {

enum SeedTag : std::uint64_t {
  kRelax1 = 1,
  kRound1 = 2,
  kRelax2 = 3,
  kRound2 = 4,
  kRandomCandidate = 5,
  kBaseline = 6,
  kPositions = 1000,
};

RelaxationOptions with_seed(RelaxationOptions options, std::uint64_t seed) {
  options.seed = seed;
  return options;
}

RoundingConfig with_seed(RoundingConfig config, std::uint64_t seed) {
  config.seed = seed;
  return config;
}

Assignment uniform_assignment(int n, std::uint64_t seed) {
  Rng rng(seed);
  Assignment x(n);
  for (auto& v : x) v = (rng() & 1U) ? Sign{-1} : Sign{1};
  return x;
}

}  // namespace

TwoRoundResult two_round_trilinear(const TrilinearForm& form,
                                   const BiLinConfig& config) {
  TwoRoundResult out;
  for (int g = 0; g < 3; ++g) out.copies[g].assign(form.group_size[g], 1);
  if (form.terms.empty()) return out;
  const std::uint64_t master = config.rounding.seed;

  // Round 1: I^(2) over group-1 copies and merged pair variables.
  const BilinearForm merged = merge_to_bilinear(form);
  const QuadraticForm q1 = to_quadratic(merged);
  const GramVectors v1 =
      solve_relaxation(q1, with_seed(config.relaxation, derive_seed(master, kRelax1)));
  const RoundingResult r1 =
      cw_round(v1, q1, with_seed(config.rounding, derive_seed(master, kRound1)));
  const auto split1 = r1.x.begin() + merged.left_size;
  out.copies[0].assign(r1.x.begin(), split1);
  out.pair_values.assign(split1, r1.x.end());
  out.relaxation1 = v1.relaxation_value;
  out.bilinear1 = merged.evaluate(out.copies[0], out.pair_values);

  // Round 2: I^(3) with group 1 fixed; pair values are discarded.
  const BilinearForm reduced = substitute_group(form, 0, out.copies[0]);
  const QuadraticForm q2 = to_quadratic(reduced);
  const GramVectors v2 =
      solve_relaxation(q2, with_seed(config.relaxation, derive_seed(master, kRelax2)));
  const RoundingResult r2 =
      cw_round(v2, q2, with_seed(config.rounding, derive_seed(master, kRound2)));
  const auto split2 = r2.x.begin() + reduced.left_size;
  out.copies[1].assign(r2.x.begin(), split2);
  out.copies[2].assign(split2, r2.x.end());
  out.relaxation2 = v2.relaxation_value;
  out.bilinear2 = reduced.evaluate(out.copies[1], out.copies[2]);
  out.trilinear = form.evaluate(out.copies[0], out.copies[1], out.copies[2]);
  out.converged = v1.converged && v2.converged;
  return out;
}

namespace {

struct Candidate {
  const char* name;
  Assignment x;
};

void select_best(const CspInstance& inst, std::vector<Candidate> pool,
                 BiLinResult& result) {
  bool have = false;
  for (auto& c : pool) {
    const Rational v = value(inst, c.x);
    if (!have || v > result.stages.final_value ||
        (v == result.stages.final_value && lex_less(c.x, result.assignment))) {
      result.stages.final_value = v;
      result.assignment = std::move(c.x);
      result.selected = c.name;
      have = true;
    }
  }
  result.advantage = result.stages.final_value - result.baseline;
}

}  // namespace

BiLinResult bilin_two_round(const CspInstance& inst,
                            const std::array<int, 3>& positions,
                            const BiLinConfig& config) {
  const std::uint64_t master = config.rounding.seed;
  const int n = inst.num_variables();
  const TrilinearForm form = extract_trilinear(inst, positions);

  BiLinResult result;
  result.positions = positions;
  result.baseline = inst.predicate().density();

  if (form.terms.empty()) {
    result.degenerate = true;
    std::vector<Candidate> pool;
    for (std::uint64_t i = 0; i < 4; ++i) {
      pool.push_back({"random-baseline",
                      uniform_assignment(n, derive_seed(derive_seed(master, kBaseline), i))});
    }
    for (auto& copy : result.copies) copy.assign(n, 1);
    select_best(inst, std::move(pool), result);
    result.stages.collapsed = result.stages.final_value;
    return result;
  }

  TwoRoundResult rounds = two_round_trilinear(form, config);
  result.stages.relaxation1 = rounds.relaxation1;
  result.stages.bilinear1 = rounds.bilinear1;
  result.stages.relaxation2 = rounds.relaxation2;
  result.stages.bilinear2 = rounds.bilinear2;
  result.stages.trilinear = rounds.trilinear;
  result.converged = rounds.converged;

  Assignment collapsed = collapse_copies(form, rounds.copies[0], rounds.copies[1],
                                         rounds.copies[2], config.collapse);
  result.stages.collapsed = value(inst, collapsed);
  Assignment negated = collapsed;
  for (auto& v : negated) v = static_cast<Sign>(-v);
  Assignment improved = local_improve(inst, collapsed);
  result.copies = std::move(rounds.copies);

  select_best(inst,
              {{"collapsed", std::move(collapsed)},
               {"negated", std::move(negated)},
               {"random", uniform_assignment(n, derive_seed(master, kRandomCandidate))},
               {"local-search", std::move(improved)}},
              result);
  return result;
}

BiLinResult bilin_best_of_positions(
    const CspInstance& inst, std::span<const std::array<int, 3>> triples,
    const BiLinConfig& config) {
  if (triples.empty()) {
    throw Error(Errc::invalid_request, "no position triples given");
  }
  BiLinResult best;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    BiLinConfig local = config;
    local.rounding.seed = derive_seed(config.rounding.seed, kPositions + t);
    BiLinResult r = bilin_two_round(inst, triples[t], local);
    if (t == 0 || r.stages.final_value > best.stages.final_value) best = std::move(r);
  }
  return best;
}

}  // namespace kcsp
