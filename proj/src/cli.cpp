#include "kcsp/cli.hpp"

#include "kcsp/error.hpp"
#include "kcsp/experiment.hpp"
#include "kcsp/fourier.hpp"
#include "kcsp/io.hpp"
#include "kcsp/oracle.hpp"
#include "kcsp/rng.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace kcsp::cli {

namespace {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::infeasible_bias:
    case Errc::integrality:
    case Errc::degenerate_profile:
    case Errc::disjointness:
    case Errc::precondition:
      return kInfeasible;
    case Errc::capacity:
      return kCapacity;
    default:
      return kBadArgs;
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

RationalTriple parse_rho(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) {
    throw Error(Errc::invalid_request, "--rho needs three comma-separated rationals");
  }
  return {parse_rational(parts[0]), parse_rational(parts[1]), parse_rational(parts[2])};
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_request, "not an integer list: '" + text + "'");
    }
  }
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_request, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_request, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::invalid_request, "cannot write '" + path + "'");
  out << text;
}

// Emits to stdout, and to `path` as well when given.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (!path.empty()) write_text(path, text);
  out << text;
}

std::uint64_t master_seed(const CLI::Option* flag, std::uint64_t flag_value) {
  if (flag->count() > 0) return flag_value;
  if (const char* env = std::getenv("SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_request, "SEED is not an unsigned integer");
    }
  }
  return 0;
}

std::array<int, 3> parse_positions(const std::string& text, int k) {
  const auto p = parse_ints(text);
  if (p.size() != 3) throw Error(Errc::invalid_request, "--positions needs three entries");
  std::array<int, 3> out{p[0] - 1, p[1] - 1, p[2] - 1};
  for (int v : out) {
    if (v < 0 || v >= k) throw Error(Errc::invalid_request, "position outside 1..k");
  }
  return out;
}

struct PredicateArgs {
  int k = 0;
  std::string rho;
  std::string slices;
};

MixtureDistribution mixture_from_args(const PredicateArgs& a) {
  return build_mixture(BiasProfile::create(a.k, parse_rho(a.rho)));
}

PredicateSet predicate_from_args(const PredicateArgs& a) {
  if (!a.slices.empty()) {
    if (a.slices == "all") return PredicateSet::everything(a.k);
    return PredicateSet(a.k, parse_ints(a.slices));
  }
  if (!a.rho.empty()) return PredicateSet::from_mixture(mixture_from_args(a));
  throw Error(Errc::invalid_request, "give --slices or --rho");
}

Json certificate_json(const MixtureDistribution& mixture) {
  const PredicateSet c = PredicateSet::from_mixture(mixture);
  const PairwiseReport pi = check_pairwise_independence(mixture);
  Json cert;
  cert["pairwise_independent"] = pi.pairwise_independent;
  cert["balanced"] = pi.balanced;
  cert["gamma"] = pi.bias ? rational_json(*pi.bias) : Json(nullptr);
  cert["max_deviation"] = rational_json(pi.max_deviation);
  cert["marginal"] = rational_json(mixture.marginal());
  cert["pair_joint"] = rational_json(mixture.pair_joint());
  cert["cardinality"] = c.cardinality();
  cert["baseline"] = rational_json(c.density());
  cert["baseline_float"] = float_json(to_double(c.density()));
  if (c.arity() >= 3) {
    const LowDegreeReport low = low_degree_report(c);
    cert["trilinear_coefficient"] = rational_json(low.degree3);
    cert["min_p3"] = float_json(to_double(low.min_p3_on_c));
    cert["min_p3_exact"] = rational_json(low.min_p3_on_c);
    cert["max_p3_exact"] = rational_json(low.max_p3_on_c);
    if (pi.balanced) {
      const TestMoments tm = test_moments(mixture);
      cert["test_moments"] = {{"a", rational_json(tm.a)},
                              {"b", rational_json(tm.b)},
                              {"c", rational_json(tm.c)},
                              {"d", rational_json(tm.d)},
                              {"alpha", rational_json(tm.alpha)}};
      if (mixture.profile()) {
        cert["alpha_approximation"] = rational_json(approximate_alpha(*mixture.profile()));
      }
    }
  }
  return cert;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-slice pairwise independent predicates and two-round BiLin"};
  app.require_subcommand(1);

  // predicate
  auto* predicate = app.add_subcommand("predicate", "Build and certify a disguised mixture");
  PredicateArgs pred_args;
  bool search = false;
  std::string delta = "0";
  std::string pred_out;
  predicate->add_option("--k", pred_args.k, "Arity (a perfect square)")->required();
  auto* rho_opt = predicate->add_option("--rho", pred_args.rho, "rho1,rho2,rho3 as rationals");
  auto* search_flag = predicate->add_flag("--search", search, "Pick the best profile found by search");
  rho_opt->excludes(search_flag);
  predicate->add_option("--delta", delta, "Allowed |rho2 - rho3| during search");
  predicate->add_option("--out", pred_out, "Also write the JSON document here");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Fourier spectrum of a slice-union predicate");
  PredicateArgs spec_args;
  bool min_p3 = false;
  bool report_flag = false;
  bool include_zero = false;
  std::string spec_out;
  spectrum->add_option("--k", spec_args.k, "Arity")->required();
  spectrum->add_option("--rho", spec_args.rho, "Predicate from a bias profile");
  spectrum->add_option("--slices", spec_args.slices, "Slice weights, comma separated, or 'all'");
  spectrum->add_flag("--min-p3", min_p3, "Print the minimum of P^(3) over C");
  spectrum->add_flag("--report", report_flag, "Print the low-degree report as JSON");
  spectrum->add_flag("--all", include_zero, "Include zero coefficients in the CSV");
  spectrum->add_option("--out", spec_out, "Also write the output here");

  // instance gen
  auto* instance = app.add_subcommand("instance", "Instance tools");
  instance->require_subcommand(1);
  auto* gen = instance->add_subcommand("gen", "Generate a planted or uniform instance");
  PredicateArgs gen_args;
  int gen_n = 0;
  int gen_m = 0;
  double gen_eps = 0.0;
  std::string regime = "planted";
  std::uint64_t gen_seed_value = 0;
  std::string gen_out;
  std::string gen_csv;
  gen->add_option("--k", gen_args.k, "Arity")->required();
  gen->add_option("--rho", gen_args.rho, "Bias profile (required for planted)");
  gen->add_option("--slices", gen_args.slices, "Slice weights (uniform regime only)");
  gen->add_option("--n", gen_n, "Variables")->required();
  gen->add_option("--m", gen_m, "Constraints")->required();
  gen->add_option("--eps", gen_eps, "Noise rate for the planted regime");
  gen->add_option("--regime", regime, "planted or uniform")
      ->check(CLI::IsMember({"planted", "uniform"}));
  auto* gen_seed = gen->add_option("--seed", gen_seed_value, "Seed (default: $SEED or 0)");
  gen->add_option("--out", gen_out, "Also write the instance JSON here");
  gen->add_option("--csv", gen_csv, "Write a CSV export here");

  // solve
  auto* solve = app.add_subcommand("solve", "Run the two-round BiLin algorithm");
  std::string solve_instance;
  std::uint64_t solve_seed_value = 0;
  BiLinConfig solve_config;
  std::string solve_positions = "1,2,3";
  std::string collapse = "first";
  std::string solve_out;
  solve->add_option("--instance", solve_instance, "Instance JSON")->required();
  auto* solve_seed = solve->add_option("--seed", solve_seed_value, "Seed (default: $SEED or 0)");
  solve->add_option("--repetitions", solve_config.rounding.repetitions, "Rounding repetitions");
  solve->add_option("--truncation", solve_config.rounding.truncation,
                    "Rounding truncation T (0 = sqrt(2 ln n))");
  solve->add_option("--restarts", solve_config.relaxation.restarts, "Relaxation random restarts");
  solve->add_option("--rank", solve_config.relaxation.rank, "Relaxation rank (0 = auto)");
  solve->add_option("--positions", solve_positions, "p1,p2,p3 (1-based) or 'sweep'");
  solve->add_option("--collapse", collapse, "first or majority")
      ->check(CLI::IsMember({"first", "majority"}));
  solve->add_option("--out", solve_out, "Also write the result JSON here");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact maximum by exhaustive search");
  std::string oracle_instance;
  int ceiling = kOracleCeiling;
  unsigned oracle_threads = 0;
  std::string oracle_out;
  oracle->add_option("--instance", oracle_instance, "Instance JSON")->required();
  oracle->add_option("--ceiling", ceiling, "Largest n searched");
  oracle->add_option("--threads", oracle_threads, "Worker threads (0 = all cores)");
  oracle->add_option("--out", oracle_out, "Also write the result JSON here");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Planted vs uniform gap experiment");
  std::string config_path;
  std::optional<int> ex_k, ex_n, ex_m, ex_seeds, ex_reps, ex_ceiling;
  std::optional<double> ex_eps;
  std::optional<unsigned> ex_threads;
  std::string ex_rho, ex_positions, ex_out;
  std::uint64_t ex_seed_value = 0;
  experiment->add_option("--config", config_path, "Config JSON");
  experiment->add_option("--k", ex_k, "Arity");
  experiment->add_option("--rho", ex_rho, "rho triple or 'search'");
  experiment->add_option("--n", ex_n, "Variables");
  experiment->add_option("--m", ex_m, "Constraints");
  experiment->add_option("--eps", ex_eps, "Planted noise rate");
  experiment->add_option("--seeds", ex_seeds, "Number of consecutive seeds");
  auto* ex_seed = experiment->add_option("--seed", ex_seed_value, "First seed (default: $SEED or 0)");
  experiment->add_option("--repetitions", ex_reps, "Rounding repetitions");
  experiment->add_option("--positions", ex_positions, "p1,p2,p3 (1-based) or 'sweep'");
  experiment->add_option("--oracle-ceiling", ex_ceiling, "Largest n given to the oracle");
  experiment->add_option("--threads", ex_threads, "Worker threads (0 = all cores)");
  experiment->add_option("--out", ex_out, "Output prefix for .json and .csv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kBadArgs;
  }

  try {
    if (*predicate) {
      std::optional<MixtureDistribution> mixture;
      Json doc;
      if (search) {
        SearchConstraints constraints;
        constraints.delta = parse_rational(delta);
        const auto found = search_bias_profiles(pred_args.k, constraints);
        if (found.empty()) {
          err << "no feasible profile at k = " << pred_args.k << '\n';
          return kInfeasible;
        }
        mixture.emplace(build_mixture(found.front()));
        doc = profile_spec_json(*mixture);
        Json candidates = Json::array();
        for (const auto& p : found) {
          candidates.push_back({rational_json(p.rho()[0]), rational_json(p.rho()[1]),
                                rational_json(p.rho()[2])});
        }
        doc["search"] = {{"count", found.size()}, {"profiles", candidates}};
      } else {
        if (pred_args.rho.empty()) throw Error(Errc::invalid_request, "give --rho or --search");
        mixture.emplace(mixture_from_args(pred_args));
        doc = profile_spec_json(*mixture);
      }
      doc["certificate"] = certificate_json(*mixture);
      emit(out, pred_out, doc.dump(2) + "\n");
      return kOk;
    }

    if (*spectrum) {
      const PredicateSet c = predicate_from_args(spec_args);
      std::ostringstream text;
      if (min_p3) {
        if (c.arity() < 3) throw Error(Errc::invalid_request, "P^(3) needs k >= 3");
        if (c.cardinality() <= (std::uint64_t{1} << 26)) {
          text << format_double(scan_degree3(c).min_value) << '\n';
        } else {
          text << format_double(to_double(low_degree_report(c).min_p3_on_c)) << '\n';
        }
      } else if (report_flag) {
        const LowDegreeReport r = low_degree_report(c);
        Json doc;
        doc["k"] = c.arity();
        doc["slices"] = c.slices();
        doc["degree0"] = rational_json(r.degree0);
        doc["max_abs_degree1"] = rational_json(r.max_abs_degree1);
        doc["max_abs_degree2"] = rational_json(r.max_abs_degree2);
        doc["degree3"] = rational_json(r.degree3);
        doc["min_p3_on_c"] = rational_json(r.min_p3_on_c);
        doc["max_p3_on_c"] = rational_json(r.max_p3_on_c);
        text << doc.dump(2) << '\n';
      } else {
        write_spectrum_csv(text, wht_spectrum(c), include_zero);
      }
      emit(out, spec_out, text.str());
      return kOk;
    }

    if (*gen) {
      const std::uint64_t seed = master_seed(gen_seed, gen_seed_value);
      Json doc;
      std::optional<CspInstance> inst;
      if (regime == "planted") {
        if (gen_args.rho.empty()) throw Error(Errc::invalid_request, "planted regime needs --rho");
        PlantedInstance planted = gen_planted(mixture_from_args(gen_args), gen_n, gen_m, gen_eps, seed);
        doc = instance_json(planted.instance, planted.planted);
        inst.emplace(std::move(planted.instance));
      } else {
        inst.emplace(gen_uniform(predicate_from_args(gen_args), gen_n, gen_m, seed));
        doc = instance_json(*inst);
      }
      if (!gen_csv.empty()) {
        std::ostringstream csv;
        write_instance_csv(csv, *inst);
        write_text(gen_csv, csv.str());
      }
      emit(out, gen_out, doc.dump() + "\n");
      return kOk;
    }

    if (*solve) {
      const CspInstance inst = instance_from_json(read_json_file(solve_instance));
      solve_config.rounding.seed = master_seed(solve_seed, solve_seed_value);
      solve_config.collapse = collapse == "majority" ? CollapseRule::majority : CollapseRule::first_copy;
      BiLinResult result;
      if (solve_positions == "sweep") {
        if (inst.arity() < 3) throw Error(Errc::invalid_request, "position sweep needs k >= 3");
        const auto triples = sweep_positions(inst.arity(), derive_seed(solve_config.rounding.seed, 13));
        result = bilin_best_of_positions(inst, triples, solve_config);
      } else {
        result = bilin_two_round(inst, parse_positions(solve_positions, inst.arity()), solve_config);
      }
      emit(out, solve_out, bilin_result_json(result, solve_config).dump(2) + "\n");
      if (result.degenerate) {
        err << "degenerate tri-linear form; returned the random baseline\n";
        return kDegenerateSolve;
      }
      return kOk;
    }

    if (*oracle) {
      const CspInstance inst = instance_from_json(read_json_file(oracle_instance));
      const OracleReport report = brute_max_csp(inst, ceiling, oracle_threads);
      emit(out, oracle_out, oracle_result_json(inst, report, ceiling).dump(2) + "\n");
      return kOk;
    }

    if (*experiment) {
      ExperimentConfig config =
          config_path.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json_file(config_path));
      if (ex_k) config.k = *ex_k;
      if (!ex_rho.empty()) {
        if (ex_rho == "search") {
          config.rho.reset();
        } else {
          config.rho = parse_rho(ex_rho);
        }
      }
      if (ex_n) config.n = *ex_n;
      if (ex_m) config.m = *ex_m;
      if (ex_eps) config.noise = *ex_eps;
      if (ex_seeds || ex_seed->count() > 0 || (config_path.empty() && std::getenv("SEED"))) {
        const std::uint64_t first = master_seed(ex_seed, ex_seed_value);
        const int count = ex_seeds ? *ex_seeds : static_cast<int>(config.seeds.size());
        config.seeds.clear();
        for (int i = 0; i < count; ++i) config.seeds.push_back(first + static_cast<std::uint64_t>(i));
      }
      if (ex_reps) config.solver.rounding.repetitions = *ex_reps;
      if (!ex_positions.empty()) {
        if (ex_positions == "sweep") {
          config.positions.reset();
        } else {
          config.positions = parse_positions(ex_positions, config.k);
        }
      }
      if (ex_ceiling) config.oracle_ceiling = *ex_ceiling;
      if (ex_threads) config.threads = *ex_threads;
      if (!ex_out.empty()) config.output = ex_out;

      const GapReport report = run_experiment(config);
      const std::string json_text = gap_report_json(report, config).dump(2) + "\n";
      std::ostringstream csv;
      write_gap_report_csv(csv, report);
      if (!config.output.empty()) {
        write_text(config.output + ".json", json_text);
        write_text(config.output + ".csv", csv.str());
      }
      for (const auto& s : report.summaries) {
        out << s.regime << ": rows=" << s.rows << " mean_advantage=" << format_double(s.mean)
            << " stddev=" << format_double(s.stddev) << " min=" << format_double(s.min)
            << " max=" << format_double(s.max) << '\n';
      }
      if (report.separation) out << "separation=" << format_double(*report.separation) << '\n';
      return report.complete() ? kOk : kPartialFailure;
    }
  } catch (const Error& e) {
    err << errc_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  }
  return kBadArgs;
}

}  // namespace kcsp::cli
