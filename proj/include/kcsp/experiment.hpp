#pragma once

#include "kcsp/io.hpp"
#include "kcsp/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kcsp {

struct ExperimentConfig {
  int k = 16;
  std::optional<RationalTriple> rho;  // nullopt: best search_bias_profiles hit
  int n = 20;
  int m = 2000;
  double noise = 0.05;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<std::string> regimes = {"planted", "uniform"};
  BiLinConfig solver;
  // 0-based positions; empty means sweep (all triples for k <= 8, otherwise
  // 20 sampled triples).
  std::optional<std::array<int, 3>> positions = std::array<int, 3>{0, 1, 2};
  int oracle_ceiling = 22;
  unsigned threads = 0;
  std::string output;  // path prefix for .json and .csv; empty = none

  // Throws Error on anything a module would reject later.
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& doc);
Json experiment_config_json(const ExperimentConfig& config);

struct GapRow {
  std::string regime;
  std::uint64_t seed = 0;
  std::optional<Rational> planted_value;
  std::optional<Rational> oracle_optimum;
  Rational solver_value;
  Rational baseline;
  Rational advantage;
  StageValues stages;
  std::string selected;
  bool degenerate = false;
  std::string error;  // nonempty when the row failed
};

struct RegimeSummary {
  std::string regime;
  std::size_t rows = 0;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  double min = 0;
  double max = 0;
};

struct GapReport {
  Json predicate;
  std::vector<GapRow> rows;  // sorted by (regime, seed)
  std::vector<RegimeSummary> summaries;
  // (mean planted - mean uniform) / sqrt(s_p^2 / n_p + s_u^2 / n_u); only
  // when both regimes are present.
  std::optional<double> separation;

  bool complete() const;
};

RegimeSummary summarize(const std::string& regime, const std::vector<double>& advantages);

std::vector<std::array<int, 3>> sweep_positions(int k, std::uint64_t seed);

GapReport run_experiment(const ExperimentConfig& config);

Json gap_report_json(const GapReport& report, const ExperimentConfig& config);
void write_gap_report_csv(std::ostream& out, const GapReport& report);

}  // namespace kcsp
