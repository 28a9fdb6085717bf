#include "kcsp/csp.hpp"

#include "kcsp/error.hpp"
#include "kcsp/rng.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace kcsp {

CspInstance::CspInstance(int n, PredicateSet predicate,
                         std::vector<Constraint> constraints,
                         std::optional<std::vector<Rational>> weights)
    : n_(n),
      predicate_(std::move(predicate)),
      constraints_(std::move(constraints)),
      weights_(std::move(weights)) {
  const int k = predicate_.arity();
  if (n_ <= 0) throw Error(Errc::malformed_instance, "instance needs n >= 1");
  if (constraints_.empty()) {
    throw Error(Errc::malformed_instance, "instance has no constraints");
  }
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const auto& con = constraints_[c];
    const std::string where = "constraint " + std::to_string(c) + ": ";
    if (static_cast<int>(con.vars.size()) != k || con.signs.arity() != k) {
      throw Error(Errc::malformed_instance, where + "arity differs from k");
    }
    std::vector<int> sorted = con.vars;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0 || sorted.back() >= n_) {
      throw Error(Errc::malformed_instance, where + "variable index out of range");
    }
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(Errc::malformed_instance, where + "repeated variable");
    }
  }
  if (weights_) {
    if (weights_->size() != constraints_.size()) {
      throw Error(Errc::malformed_instance, "one weight per constraint required");
    }
    Rational total = 0;
    for (const auto& w : *weights_) {
      if (w < 0) throw Error(Errc::malformed_instance, "negative weight");
      total += w;
    }
    if (total != 1) {
      throw Error(Errc::malformed_instance, "weights must sum to one");
    }
  }
}

Rational CspInstance::weight(std::size_t i) const {
  if (weights_) return weights_->at(i);
  return Rational(1, static_cast<long long>(constraints_.size()));
}

SignVector CspInstance::literal_tuple(std::size_t i,
                                      std::span<const Sign> x) const {
  const auto& con = constraints_.at(i);
  std::uint64_t code = 0;
  for (std::size_t j = 0; j < con.vars.size(); ++j) {
    const int literal = con.signs[static_cast<int>(j)] * x[con.vars[j]];
    if (literal < 0) code |= std::uint64_t{1} << j;
  }
  return SignVector(static_cast<int>(con.vars.size()), code);
}

namespace {

void require_assignment(const CspInstance& inst, std::span<const Sign> x) {
  if (static_cast<int>(x.size()) != inst.num_variables()) {
    throw Error(Errc::malformed_instance, "assignment length differs from n");
  }
  if (!is_sign_assignment(x)) {
    throw Error(Errc::malformed_instance, "assignment entries must be +1 or -1");
  }
}

}  // namespace

Rational value(const CspInstance& inst, std::span<const Sign> x) {
  require_assignment(inst, x);
  if (!inst.has_weights()) {
    long long satisfied = 0;
    for (std::size_t c = 0; c < inst.size(); ++c) {
      satisfied += inst.predicate().contains(inst.literal_tuple(c, x)) ? 1 : 0;
    }
    return Rational(satisfied, static_cast<long long>(inst.size()));
  }
  Rational total = 0;
  for (std::size_t c = 0; c < inst.size(); ++c) {
    if (inst.predicate().contains(inst.literal_tuple(c, x))) {
      total += inst.weight(c);
    }
  }
  return total;
}

ValueTracker::ValueTracker(const CspInstance& inst, std::span<const Sign> x)
    : inst_(&inst), x_(x.begin(), x.end()) {
  require_assignment(inst, x);
  const std::size_t m = inst.size();
  weight_.assign(m, 1);
  scale_ = static_cast<std::int64_t>(m);
  if (inst.has_weights()) {
    BigInt lcm = 1;
    for (const auto& w : *inst.weights()) {
      lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(w));
    }
    if (lcm > BigInt(std::int64_t{1} << 62)) {
      throw Error(Errc::capacity, "weight denominators too large for search");
    }
    scale_ = lcm.convert_to<std::int64_t>();
    for (std::size_t c = 0; c < m; ++c) {
      const Rational scaled = (*inst.weights())[c] * Rational(lcm);
      weight_[c] = boost::multiprecision::numerator(scaled).convert_to<std::int64_t>();
    }
  }
  plus_count_.assign(m, 0);
  occurrences_.assign(inst.num_variables(), {});
  for (std::size_t c = 0; c < m; ++c) {
    const auto& con = inst.constraints()[c];
    for (std::size_t j = 0; j < con.vars.size(); ++j) {
      const Sign s = static_cast<Sign>(con.signs[static_cast<int>(j)]);
      occurrences_[con.vars[j]].push_back({static_cast<int>(c), s});
      if (s * x_[con.vars[j]] > 0) ++plus_count_[c];
    }
    if (inst.predicate().accepts_plus_count(plus_count_[c])) score_ += weight_[c];
  }
}

void ValueTracker::flip(int var) {
  const auto& pred = inst_->predicate();
  for (const auto& occ : occurrences_[var]) {
    int& count = plus_count_[occ.constraint];
    const bool before = pred.accepts_plus_count(count);
    count += (occ.sign * x_[var] > 0) ? -1 : 1;
    const bool after = pred.accepts_plus_count(count);
    if (before != after) score_ += after ? weight_[occ.constraint] : -weight_[occ.constraint];
  }
  x_[var] = static_cast<Sign>(-x_[var]);
}

std::int64_t ValueTracker::flip_delta(int var) const {
  const auto& pred = inst_->predicate();
  std::int64_t delta = 0;
  for (const auto& occ : occurrences_[var]) {
    const int count = plus_count_[occ.constraint];
    const int next = count + ((occ.sign * x_[var] > 0) ? -1 : 1);
    const bool before = pred.accepts_plus_count(count);
    const bool after = pred.accepts_plus_count(next);
    if (before != after) delta += after ? weight_[occ.constraint] : -weight_[occ.constraint];
  }
  return delta;
}

Assignment local_improve(const CspInstance& inst, Assignment x) {
  ValueTracker tracker(inst, x);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int v = 0; v < inst.num_variables(); ++v) {
      if (tracker.flip_delta(v) > 0) {
        tracker.flip(v);
        improved = true;
      }
    }
  }
  return tracker.assignment();
}

namespace {

void require_generator_args(int n, int k, int num_constraints) {
  if (n < k) {
    throw Error(Errc::invalid_request, "generator needs n >= k");
  }
  if (num_constraints < 1) {
    throw Error(Errc::invalid_request, "generator needs at least one constraint");
  }
}

std::vector<int> sample_variables(int n, int k, Rng& rng) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < k; ++j) {
    std::uniform_int_distribution<int> pick(j, n - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

std::uint64_t uniform_code(int k, Rng& rng) {
  return rng() & arity_mask(k);
}

// Uniform member of G_m.
std::uint64_t slice_member(int k, int m, Rng& rng) {
  std::vector<int> positions(k);
  std::iota(positions.begin(), positions.end(), 0);
  std::shuffle(positions.begin(), positions.end(), rng);
  std::uint64_t code = 0;
  for (int j = m; j < k; ++j) code |= std::uint64_t{1} << positions[j];
  return code;
}

}  // namespace

PlantedInstance gen_planted(const MixtureDistribution& mixture, int n,
                            int num_constraints, double noise,
                            std::uint64_t seed) {
  const int k = mixture.k();
  require_generator_args(n, k, num_constraints);
  if (!(noise >= 0.0 && noise < 1.0)) {
    throw Error(Errc::invalid_request, "noise rate must lie in [0, 1)");
  }
  Rng rng(seed);
  Assignment planted(n);
  for (auto& v : planted) v = (rng() & 1U) ? Sign{-1} : Sign{1};

  std::vector<double> psi;
  for (const auto& w : mixture.weights()) psi.push_back(to_double(w));
  std::discrete_distribution<int> choose_slice(psi.begin(), psi.end());
  std::bernoulli_distribution is_noise(noise);

  std::vector<Constraint> constraints;
  constraints.reserve(num_constraints);
  for (int c = 0; c < num_constraints; ++c) {
    std::vector<int> vars = sample_variables(n, k, rng);
    std::uint64_t z;
    if (is_noise(rng)) {
      z = uniform_code(k, rng);
    } else {
      z = slice_member(k, mixture.slices()[choose_slice(rng)].m, rng);
    }
    // signs_j * x_{v_j} = z_j.
    std::uint64_t signs = z;
    for (int j = 0; j < k; ++j) {
      if (planted[vars[j]] < 0) signs ^= std::uint64_t{1} << j;
    }
    constraints.push_back({std::move(vars), SignVector(k, signs)});
  }
  CspInstance inst(n, PredicateSet::from_mixture(mixture), std::move(constraints));
  inst.metadata = {seed, "planted", noise};
  return {std::move(inst), std::move(planted)};
}

CspInstance gen_uniform(const PredicateSet& predicate, int n,
                        int num_constraints, std::uint64_t seed) {
  const int k = predicate.arity();
  require_generator_args(n, k, num_constraints);
  Rng rng(seed);
  std::vector<Constraint> constraints;
  constraints.reserve(num_constraints);
  for (int c = 0; c < num_constraints; ++c) {
    std::vector<int> vars = sample_variables(n, k, rng);
    constraints.push_back({std::move(vars), SignVector(k, uniform_code(k, rng))});
  }
  CspInstance inst(n, predicate, std::move(constraints));
  inst.metadata = {seed, "uniform", std::nullopt};
  return inst;
}

Rational MultilinearPolynomial::evaluate_degree(int degree,
                                                std::span<const Sign> x) const {
  Rational total = 0;
  if (degree < 0 || degree >= static_cast<int>(by_degree.size())) return total;
  for (const auto& [vars, coef] : by_degree[degree]) {
    int sign = 1;
    for (int v : vars) sign *= x[v];
    total += sign > 0 ? coef : Rational(-coef);
  }
  return total;
}

Rational MultilinearPolynomial::evaluate(std::span<const Sign> x) const {
  Rational total = 0;
  for (int d = 0; d < static_cast<int>(by_degree.size()); ++d) {
    total += evaluate_degree(d, x);
  }
  return total;
}

namespace {

template <class Fn>
void for_each_combination(int k, int d, Fn&& fn) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  if (d > k) return;
  while (true) {
    fn(std::span<const int>(idx));
    int i = d - 1;
    while (i >= 0 && idx[i] == k - d + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

MultilinearPolynomial objective_spectrum(const CspInstance& inst, int max_degree,
                                         std::size_t term_limit) {
  const int k = inst.arity();
  if (max_degree < 0) {
    throw Error(Errc::invalid_request, "max_degree must be nonnegative");
  }
  max_degree = std::min(max_degree, k);
  std::uint64_t per_constraint = 0;
  for (int d = 0; d <= max_degree; ++d) per_constraint += binomial(k, d);
  if (per_constraint > term_limit / inst.size()) {
    throw Error(Errc::capacity, "objective expansion exceeds the term limit");
  }
  std::vector<Rational> coef(max_degree + 1);
  for (int d = 0; d <= max_degree; ++d) {
    coef[d] = symmetric_coefficient(inst.predicate(), d);
  }
  MultilinearPolynomial poly{inst.num_variables(), {}};
  poly.by_degree.resize(max_degree + 1);
  std::vector<int> key;
  for (std::size_t c = 0; c < inst.size(); ++c) {
    const auto& con = inst.constraints()[c];
    const Rational w = inst.weight(c);
    for (int d = 0; d <= max_degree; ++d) {
      if (coef[d] == 0) continue;
      const Rational base = w * coef[d];
      for_each_combination(k, d, [&](std::span<const int> positions) {
        int sign = 1;
        key.clear();
        for (int p : positions) {
          sign *= con.signs[p];
          key.push_back(con.vars[p]);
        }
        std::sort(key.begin(), key.end());
        auto& slot = poly.by_degree[d][key];
        if (sign > 0) {
          slot += base;
        } else {
          slot -= base;
        }
      });
    }
  }
  for (auto& terms : poly.by_degree) {
    std::erase_if(terms, [](const auto& entry) { return entry.second == 0; });
  }
  return poly;
}

double TrilinearForm::evaluate(std::span<const Sign> x1, std::span<const Sign> x2,
                               std::span<const Sign> x3) const {
  if (static_cast<int>(x1.size()) != group_size[0] ||
      static_cast<int>(x2.size()) != group_size[1] ||
      static_cast<int>(x3.size()) != group_size[2]) {
    throw Error(Errc::invalid_request, "trilinear form: group size mismatch");
  }
  double total = 0;
  for (const auto& t : terms) {
    total += t.coefficient * (x1[t.i1] * x2[t.i2] * x3[t.i3]);
  }
  return total;
}

std::vector<char> TrilinearForm::referenced(int group) const {
  std::vector<char> mask(group_size.at(group), 0);
  for (const auto& t : terms) {
    mask[group == 0 ? t.i1 : group == 1 ? t.i2 : t.i3] = 1;
  }
  return mask;
}

double BilinearForm::evaluate(std::span<const Sign> left,
                              std::span<const Sign> right) const {
  if (static_cast<int>(left.size()) != left_size ||
      static_cast<int>(right.size()) != right_size) {
    throw Error(Errc::invalid_request, "bilinear form: group size mismatch");
  }
  double total = 0;
  for (const auto& t : terms) {
    total += t.coefficient * (left[t.left] * right[t.right]);
  }
  return total;
}

TrilinearForm extract_trilinear(const CspInstance& inst,
                                const std::array<int, 3>& positions) {
  const int k = inst.arity();
  const auto [p1, p2, p3] = positions;
  for (int p : positions) {
    if (p < 0 || p >= k) {
      throw Error(Errc::invalid_request, "position outside [0, k)");
    }
  }
  if (p1 == p2 || p1 == p3 || p2 == p3) {
    throw Error(Errc::invalid_request, "positions must be distinct");
  }
  const Rational a = trilinear_coefficient(inst.predicate(), p1, p2, p3);
  const int n = inst.num_variables();
  TrilinearForm form;
  form.group_size = {n, n, n};
  if (a == 0) return form;

  std::map<std::array<int, 3>, Rational> acc;
  for (std::size_t c = 0; c < inst.size(); ++c) {
    const auto& con = inst.constraints()[c];
    const int sign = con.signs[p1] * con.signs[p2] * con.signs[p3];
    auto& slot = acc[{con.vars[p1], con.vars[p2], con.vars[p3]}];
    if (sign > 0) {
      slot += inst.weight(c);
    } else {
      slot -= inst.weight(c);
    }
  }
  for (const auto& [key, total] : acc) {
    if (total == 0) continue;
    form.terms.push_back({key[0], key[1], key[2], to_double(a * total)});
  }
  return form;
}

BilinearForm merge_to_bilinear(const TrilinearForm& form) {
  std::map<std::pair<int, int>, int> pair_id;
  for (const auto& t : form.terms) pair_id.emplace(std::pair{t.i2, t.i3}, 0);
  BilinearForm out;
  out.left_size = form.group_size[0];
  out.merged_pairs.reserve(pair_id.size());
  for (auto& [pair, id] : pair_id) {
    id = static_cast<int>(out.merged_pairs.size());
    out.merged_pairs.push_back(pair);
  }
  out.right_size = static_cast<int>(out.merged_pairs.size());
  out.terms.reserve(form.terms.size());
  for (const auto& t : form.terms) {
    out.terms.push_back({t.i1, pair_id.at({t.i2, t.i3}), t.coefficient});
  }
  std::sort(out.terms.begin(), out.terms.end(),
            [](const BilinearTerm& x, const BilinearTerm& y) {
              return std::pair(x.left, x.right) < std::pair(y.left, y.right);
            });
  return out;
}

Assignment collapse_copies(const TrilinearForm& form, std::span<const Sign> x1,
                           std::span<const Sign> x2, std::span<const Sign> x3,
                           CollapseRule rule) {
  const int n = std::max({form.group_size[0], form.group_size[1], form.group_size[2]});
  const std::array<std::span<const Sign>, 3> copies = {x1, x2, x3};
  std::array<std::vector<char>, 3> refs;
  for (int g = 0; g < 3; ++g) {
    if (static_cast<int>(copies[g].size()) != form.group_size[g]) {
      throw Error(Errc::invalid_request, "copy assignment size mismatch");
    }
    refs[g] = form.referenced(g);
  }
  Assignment out(n, 1);
  for (int v = 0; v < n; ++v) {
    int first = 0;
    int vote = 0;
    for (int g = 0; g < 3; ++g) {
      if (v >= form.group_size[g] || !refs[g][v]) continue;
      if (first == 0) first = copies[g][v];
      vote += copies[g][v];
    }
    if (first == 0) continue;
    if (rule == CollapseRule::majority && vote != 0) {
      out[v] = vote > 0 ? Sign{1} : Sign{-1};
    } else {
      out[v] = static_cast<Sign>(first);
    }
  }
  return out;
}

}  // namespace kcsp
