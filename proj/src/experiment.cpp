#include "kcsp/experiment.hpp"

#include "kcsp/error.hpp"
#include "kcsp/oracle.hpp"
#include "kcsp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

namespace kcsp {

namespace {

enum SeedTag : std::uint64_t { kInstance = 11, kSolver = 12, kSweep = 13 };

MixtureDistribution resolve_mixture(const ExperimentConfig& config) {
  if (config.rho) return build_mixture(BiasProfile::create(config.k, *config.rho));
  const auto found = search_bias_profiles(config.k);
  if (found.empty()) {
    throw Error(Errc::infeasible_bias,
                "no feasible profile at k = " + std::to_string(config.k));
  }
  return build_mixture(found.front());
}

}  // namespace

void ExperimentConfig::validate() const {
  (void)resolve_mixture(*this);
  if (n < k) throw Error(Errc::invalid_request, "experiment needs n >= k");
  if (m < 1) throw Error(Errc::invalid_request, "experiment needs m >= 1");
  if (!(noise >= 0.0 && noise < 1.0)) {
    throw Error(Errc::invalid_request, "noise rate must lie in [0, 1)");
  }
  if (seeds.empty()) throw Error(Errc::invalid_request, "no seeds given");
  if (regimes.empty()) throw Error(Errc::invalid_request, "no regimes given");
  for (const auto& r : regimes) {
    if (r != "planted" && r != "uniform") {
      throw Error(Errc::invalid_request, "unknown regime '" + r + "'");
    }
  }
  if (positions) {
    const auto& p = *positions;
    for (int v : p) {
      if (v < 0 || v >= k) throw Error(Errc::invalid_request, "position outside 1..k");
    }
    if (p[0] == p[1] || p[0] == p[2] || p[1] == p[2]) {
      throw Error(Errc::invalid_request, "positions must be distinct");
    }
  } else if (k < 3) {
    throw Error(Errc::invalid_request, "position sweep needs k >= 3");
  }
  if (solver.rounding.repetitions < 1 || solver.rounding.truncation < 0) {
    throw Error(Errc::invalid_request, "bad rounding configuration");
  }
  if (oracle_ceiling < 0 || oracle_ceiling > kOracleCeiling) {
    throw Error(Errc::invalid_request, "oracle ceiling must lie in 0..26");
  }
}

ExperimentConfig experiment_config_from_json(const Json& doc) {
  ExperimentConfig config;
  try {
    if (doc.contains("k")) config.k = doc.at("k").get<int>();
    if (doc.contains("rho")) {
      const auto& rho = doc.at("rho");
      if (rho.is_string() && rho.get<std::string>() == "search") {
        config.rho.reset();
      } else {
        if (!rho.is_array() || rho.size() != 3) {
          throw Error(Errc::invalid_request, "rho must be \"search\" or three rationals");
        }
        config.rho = RationalTriple{rational_from_json(rho[0]), rational_from_json(rho[1]),
                                    rational_from_json(rho[2])};
      }
    }
    if (doc.contains("n")) config.n = doc.at("n").get<int>();
    if (doc.contains("m")) config.m = doc.at("m").get<int>();
    if (doc.contains("eps")) config.noise = doc.at("eps").get<double>();
    if (doc.contains("seeds")) {
      const auto& seeds = doc.at("seeds");
      if (seeds.is_array()) {
        config.seeds = seeds.get<std::vector<std::uint64_t>>();
      } else {
        // {"first": s, "count": c}
        const auto first = seeds.value("first", std::uint64_t{0});
        const auto count = seeds.at("count").get<std::uint64_t>();
        config.seeds.clear();
        for (std::uint64_t i = 0; i < count; ++i) config.seeds.push_back(first + i);
      }
    }
    if (doc.contains("regimes")) config.regimes = doc.at("regimes").get<std::vector<std::string>>();
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      config.solver.rounding.repetitions = s.value("repetitions", config.solver.rounding.repetitions);
      config.solver.rounding.truncation = s.value("truncation", config.solver.rounding.truncation);
      config.solver.relaxation.restarts = s.value("restarts", config.solver.relaxation.restarts);
      config.solver.relaxation.rank = s.value("rank", config.solver.relaxation.rank);
      const std::string collapse = s.value("collapse", std::string("first"));
      if (collapse != "first" && collapse != "majority") {
        throw Error(Errc::invalid_request, "collapse must be first or majority");
      }
      config.solver.collapse =
          collapse == "majority" ? CollapseRule::majority : CollapseRule::first_copy;
    }
    if (doc.contains("positions")) {
      const auto& p = doc.at("positions");
      if (p.is_string() && p.get<std::string>() == "sweep") {
        config.positions.reset();
      } else {
        const auto one_based = p.get<std::vector<int>>();
        if (one_based.size() != 3) throw Error(Errc::invalid_request, "positions needs three entries");
        config.positions = std::array<int, 3>{one_based[0] - 1, one_based[1] - 1, one_based[2] - 1};
      }
    }
    if (doc.contains("oracle_ceiling")) config.oracle_ceiling = doc.at("oracle_ceiling").get<int>();
    if (doc.contains("threads")) config.threads = doc.at("threads").get<unsigned>();
    if (doc.contains("output")) config.output = doc.at("output").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_request, std::string("bad experiment config: ") + e.what());
  }
  config.validate();
  return config;
}

Json experiment_config_json(const ExperimentConfig& config) {
  Json doc;
  doc["k"] = config.k;
  if (config.rho) {
    doc["rho"] = {rational_json((*config.rho)[0]), rational_json((*config.rho)[1]),
                  rational_json((*config.rho)[2])};
  } else {
    doc["rho"] = "search";
  }
  doc["n"] = config.n;
  doc["m"] = config.m;
  doc["eps"] = float_json(config.noise);
  doc["seeds"] = config.seeds;
  doc["regimes"] = config.regimes;
  doc["solver"] = {{"repetitions", config.solver.rounding.repetitions},
                   {"truncation", float_json(config.solver.rounding.truncation)},
                   {"restarts", config.solver.relaxation.restarts},
                   {"rank", config.solver.relaxation.rank},
                   {"collapse", config.solver.collapse == CollapseRule::majority ? "majority" : "first"}};
  if (config.positions) {
    doc["positions"] = {(*config.positions)[0] + 1, (*config.positions)[1] + 1,
                        (*config.positions)[2] + 1};
  } else {
    doc["positions"] = "sweep";
  }
  doc["oracle_ceiling"] = config.oracle_ceiling;
  return doc;
}

bool GapReport::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const GapRow& r) { return r.error.empty(); });
}

RegimeSummary summarize(const std::string& regime, const std::vector<double>& advantages) {
  RegimeSummary s;
  s.regime = regime;
  s.rows = advantages.size();
  if (advantages.empty()) return s;
  double sum = 0;
  for (double a : advantages) sum += a;
  s.mean = sum / static_cast<double>(advantages.size());
  double sq = 0;
  for (double a : advantages) sq += (a - s.mean) * (a - s.mean);
  s.stddev = advantages.size() > 1 ? std::sqrt(sq / static_cast<double>(advantages.size() - 1)) : 0.0;
  s.min = *std::min_element(advantages.begin(), advantages.end());
  s.max = *std::max_element(advantages.begin(), advantages.end());
  return s;
}

std::vector<std::array<int, 3>> sweep_positions(int k, std::uint64_t seed) {
  std::vector<std::array<int, 3>> all;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      for (int l = j + 1; l < k; ++l) all.push_back({i, j, l});
    }
  }
  if (k <= 8) return all;
  Rng rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min<std::size_t>(20, all.size()));
  return all;
}

namespace {

GapRow run_row(const ExperimentConfig& config, const MixtureDistribution& mixture,
               const std::string& regime, std::uint64_t seed) {
  GapRow row;
  row.regime = regime;
  row.seed = seed;
  try {
    const std::uint64_t instance_seed = derive_seed(seed, kInstance);
    std::optional<CspInstance> inst;
    if (regime == "planted") {
      PlantedInstance planted =
          gen_planted(mixture, config.n, config.m, config.noise, instance_seed);
      row.planted_value = value(planted.instance, planted.planted);
      inst.emplace(std::move(planted.instance));
    } else {
      inst.emplace(gen_uniform(PredicateSet::from_mixture(mixture), config.n,
                               config.m, instance_seed));
    }
    if (config.n <= config.oracle_ceiling) {
      row.oracle_optimum = brute_max_csp(*inst, config.oracle_ceiling, 1).optimum;
    }
    BiLinConfig solver = config.solver;
    solver.rounding.seed = derive_seed(seed, kSolver);
    BiLinResult result;
    if (config.positions) {
      result = bilin_two_round(*inst, *config.positions, solver);
    } else {
      const auto triples = sweep_positions(config.k, derive_seed(seed, kSweep));
      result = bilin_best_of_positions(*inst, triples, solver);
    }
    row.solver_value = result.stages.final_value;
    row.baseline = result.baseline;
    row.advantage = result.advantage;
    row.stages = result.stages;
    row.selected = result.selected;
    row.degenerate = result.degenerate;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

GapReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const MixtureDistribution mixture = resolve_mixture(config);
  GapReport report;
  report.predicate = profile_spec_json(mixture);

  struct Job {
    std::string regime;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& regime : config.regimes) {
    for (auto seed : config.seeds) jobs.push_back({regime, seed});
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::pair(a.regime, a.seed) < std::pair(b.regime, b.seed);
  });
  report.rows.resize(jobs.size());
  const unsigned workers = std::max(
      1U, std::min<unsigned>(config.threads ? config.threads
                                            : std::max(1U, std::thread::hardware_concurrency()),
                             static_cast<unsigned>(jobs.size())));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
          report.rows[j] = run_row(config, mixture, jobs[j].regime, jobs[j].seed);
        }
      });
    }
  }

  std::vector<double> planted_adv, uniform_adv;
  for (const auto& regime : {std::string("planted"), std::string("uniform")}) {
    std::vector<double> adv;
    for (const auto& row : report.rows) {
      if (row.regime == regime && row.error.empty()) adv.push_back(to_double(row.advantage));
    }
    if (std::find(config.regimes.begin(), config.regimes.end(), regime) == config.regimes.end()) {
      continue;
    }
    report.summaries.push_back(summarize(regime, adv));
    (regime == "planted" ? planted_adv : uniform_adv) = adv;
  }
  if (report.summaries.size() == 2 && planted_adv.size() > 1 && uniform_adv.size() > 1) {
    const auto& p = report.summaries[0];
    const auto& u = report.summaries[1];
    const double se = std::sqrt(p.stddev * p.stddev / static_cast<double>(p.rows) +
                                u.stddev * u.stddev / static_cast<double>(u.rows));
    if (se > 0) report.separation = (p.mean - u.mean) / se;
  }
  return report;
}

namespace {

Json optional_rational(const std::optional<Rational>& r) {
  return r ? rational_json(*r) : Json(nullptr);
}

}  // namespace

Json gap_report_json(const GapReport& report, const ExperimentConfig& config) {
  Json doc;
  doc["config"] = experiment_config_json(config);
  doc["predicate"] = report.predicate;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["regime"] = r.regime;
    row["seed"] = r.seed;
    row["planted_value"] = optional_rational(r.planted_value);
    row["oracle_optimum"] = optional_rational(r.oracle_optimum);
    row["solver_value"] = rational_json(r.solver_value);
    row["baseline"] = rational_json(r.baseline);
    row["advantage"] = rational_json(r.advantage);
    row["stages"] = {{"relaxation1", float_json(r.stages.relaxation1)},
                     {"bilinear1", float_json(r.stages.bilinear1)},
                     {"relaxation2", float_json(r.stages.relaxation2)},
                     {"bilinear2", float_json(r.stages.bilinear2)},
                     {"trilinear", float_json(r.stages.trilinear)},
                     {"collapsed", rational_json(r.stages.collapsed)}};
    row["selected"] = r.selected;
    row["degenerate"] = r.degenerate;
    row["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  Json summaries = Json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"regime", s.regime},
                         {"rows", s.rows},
                         {"mean_advantage", float_json(s.mean)},
                         {"stddev_advantage", float_json(s.stddev)},
                         {"min_advantage", float_json(s.min)},
                         {"max_advantage", float_json(s.max)}});
  }
  doc["summaries"] = std::move(summaries);
  doc["separation"] = report.separation ? float_json(*report.separation) : Json(nullptr);
  return doc;
}

void write_gap_report_csv(std::ostream& out, const GapReport& report) {
  out << "regime,seed,planted_value,oracle_optimum,solver_value,baseline,advantage,"
         "advantage_float,relaxation1,bilinear1,relaxation2,bilinear2,trilinear,"
         "collapsed,selected,degenerate,error\n";
  auto opt = [](const std::optional<Rational>& r) { return r ? to_string(*r) : std::string(); };
  for (const auto& r : report.rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << r.regime << ',' << r.seed << ',' << opt(r.planted_value) << ','
        << opt(r.oracle_optimum) << ',' << to_string(r.solver_value) << ','
        << to_string(r.baseline) << ',' << to_string(r.advantage) << ','
        << format_double(to_double(r.advantage)) << ','
        << format_double(r.stages.relaxation1) << ',' << format_double(r.stages.bilinear1) << ','
        << format_double(r.stages.relaxation2) << ',' << format_double(r.stages.bilinear2) << ','
        << format_double(r.stages.trilinear) << ',' << to_string(r.stages.collapsed) << ','
        << r.selected << ',' << (r.degenerate ? 1 : 0) << ',' << error << '\n';
  }
}

}  // namespace kcsp
