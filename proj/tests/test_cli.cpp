#include "kcsp/cli.hpp"
#include "kcsp/error.hpp"
#include "kcsp/experiment.hpp"
#include "kcsp/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace kcsp {
namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "kcsp_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Io, InstanceRoundTrip) {
  const auto p = gen_planted(build_mixture(BiasProfile::create(16, {Rational(1, 4), Rational(3, 4), Rational(3, 4)})),
                             20, 40, 0.05, 5);
  const Json doc = instance_json(p.instance, p.planted);
  const CspInstance back = instance_from_json(Json::parse(doc.dump()));
  EXPECT_EQ(back.constraints(), p.instance.constraints());
  EXPECT_EQ(back.predicate(), p.instance.predicate());
  EXPECT_EQ(planted_from_json(doc), p.planted);
  EXPECT_EQ(instance_json(back, p.planted).dump(), doc.dump());
}

TEST(Io, MalformedInstance) {
  Json doc = Json::parse(R"({"n": 3, "k": 3, "predicate": {"slices": [1, 3]},
                             "constraints": [{"vars": [0, 1, 5], "signs": [1, 1, 1]}]})");
  EXPECT_THROW(instance_from_json(doc), Error);
  doc["constraints"][0]["vars"] = {0, 1, 2};
  doc["constraints"][0]["signs"] = {1, 0, 1};
  EXPECT_THROW(instance_from_json(doc), Error);
}

TEST(Io, SpecRoundTripAndTamper) {
  const auto mix = build_mixture(BiasProfile::create(16, {Rational(1, 4), Rational(3, 4), Rational(3, 4)}));
  Json spec = profile_spec_json(mix);
  EXPECT_EQ(mixture_from_spec(spec).weights(), mix.weights());
  spec["psi"][0] = "1/2";
  EXPECT_THROW(mixture_from_spec(spec), Error);
}

TEST(Cli, PredicateCertificate) {
  const CliRun r = run({"predicate", "--k", "16", "--rho", "1/4,3/4,3/4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  EXPECT_EQ(doc["psi"], Json::parse(R"(["5/8", "7/24", "1/12"])"));
  EXPECT_EQ(doc["certificate"]["pairwise_independent"], true);
  EXPECT_EQ(doc["certificate"]["cardinality"], 20176);
  EXPECT_EQ(doc["certificate"]["test_moments"]["alpha"], "-1/84");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"predicate", "--k", "16", "--rho", "1/2,3/4,3/4"}).code, cli::kInfeasible);
  EXPECT_EQ(run({"predicate", "--k", "16", "--rho", "1/3,3/4,3/4"}).code, cli::kInfeasible);
  EXPECT_EQ(run({"predicate", "--k", "4", "--search"}).code, cli::kInfeasible);
  EXPECT_EQ(run({"predicate", "--k", "15", "--rho", "1/4,3/4,3/4"}).code, cli::kBadArgs);
  EXPECT_EQ(run({"predicate", "--bogus"}).code, cli::kBadArgs);
  EXPECT_EQ(run({}).code, cli::kBadArgs);
  EXPECT_EQ(run({"spectrum", "--k", "25", "--slices", "3"}).code, cli::kCapacity);
  EXPECT_EQ(run({"solve", "--instance", "/nonexistent.json"}).code, cli::kBadArgs);
}

TEST(Cli, SpectrumMinP3) {
  const CliRun r = run({"spectrum", "--k", "16", "--rho", "1/4,3/4,3/4", "--min-p3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "-0.0436401367188\n");
}

TEST(Cli, GenerateSolveOracle) {
  const auto inst = scratch("inst.json").string();
  const CliRun gen = run({"instance", "gen", "--k", "4", "--slices", "1,2", "--n", "10", "--m", "30",
                       "--regime", "uniform", "--seed", "3", "--out", inst});
  ASSERT_EQ(gen.code, 0) << gen.err;
  const CliRun solve = run({"solve", "--instance", inst, "--seed", "2"});
  ASSERT_EQ(solve.code, 0) << solve.err;
  const Json result = Json::parse(solve.out);
  const CliRun oracle = run({"oracle", "--instance", inst});
  ASSERT_EQ(oracle.code, 0) << oracle.err;
  const Json best = Json::parse(oracle.out);
  EXPECT_LE(rational_from_json(result["value"]), rational_from_json(best["value"]));
  EXPECT_EQ(run({"oracle", "--instance", inst, "--ceiling", "8"}).code, cli::kCapacity);
}

TEST(Cli, DegenerateSolveExitCode) {
  const auto inst = scratch("flat.json").string();
  ASSERT_EQ(run({"instance", "gen", "--k", "4", "--slices", "all", "--n", "6", "--m", "5",
                 "--regime", "uniform", "--out", inst})
                .code,
            0);
  EXPECT_EQ(run({"solve", "--instance", inst}).code, cli::kDegenerateSolve);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> gen{"instance", "gen", "--k", "16", "--rho", "1/4,3/4,3/4", "--n",
                                     "20", "--m", "200", "--eps", "0.05", "--seed", "8"};
  EXPECT_EQ(run(gen).out, run(gen).out);
  const auto inst = scratch("det.json").string();
  auto with_out = gen;
  with_out.insert(with_out.end(), {"--out", inst});
  ASSERT_EQ(run(with_out).code, 0);
  const std::vector<std::string> solve{"solve", "--instance", inst, "--seed", "4"};
  EXPECT_EQ(run(solve).out, run(solve).out);
}

TEST(Experiment, ConfigRoundTrip) {
  ExperimentConfig c;
  c.n = 18;
  c.seeds = {4, 5, 6};
  c.positions.reset();
  const ExperimentConfig back = experiment_config_from_json(experiment_config_json(c));
  EXPECT_EQ(experiment_config_json(back).dump(), experiment_config_json(c).dump());
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"n": 0})")), Error);
}

TEST(Experiment, SmallRunIsDeterministic) {
  ExperimentConfig c;
  c.n = 16;
  c.m = 100;
  c.seeds = {1, 2};
  c.oracle_ceiling = 16;
  const GapReport a = run_experiment(c);
  const GapReport b = run_experiment(c);
  EXPECT_EQ(gap_report_json(a, c).dump(), gap_report_json(b, c).dump());
  ASSERT_EQ(a.rows.size(), 4U);
  for (const auto& row : a.rows) {
    ASSERT_TRUE(row.oracle_optimum.has_value());
    EXPECT_LE(row.solver_value, *row.oracle_optimum);
  }
}

}  // namespace
}  // namespace kcsp
