#include "kcsp/io.hpp"

#include "kcsp/error.hpp"

#include <ostream>

namespace kcsp {

Json float_json(double value) { return Json::parse(format_double(value)); }

Json rational_json(const Rational& r) { return to_string(r); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw Error(Errc::invalid_request, "expected a rational string, got " + j.dump());
}

Json profile_spec_json(const MixtureDistribution& mixture) {
  Json spec;
  spec["k"] = mixture.k();
  if (mixture.profile()) {
    Json rho = Json::array();
    for (const auto& r : mixture.profile()->rho()) rho.push_back(rational_json(r));
    spec["rho"] = rho;
  }
  Json psi = Json::array();
  for (const auto& w : mixture.weights()) psi.push_back(rational_json(w));
  spec["psi"] = psi;
  Json slices = Json::array();
  for (const auto& s : mixture.slices()) slices.push_back(s.m);
  spec["slices"] = slices;
  return spec;
}

MixtureDistribution mixture_from_spec(const Json& spec) {
  try {
    const int k = spec.at("k").get<int>();
    if (spec.contains("rho")) {
      const auto& rho = spec.at("rho");
      if (!rho.is_array() || rho.size() != 3) {
        throw Error(Errc::invalid_request, "rho must hold three rationals");
      }
      MixtureDistribution mixture = build_mixture(BiasProfile::create(
          k, {rational_from_json(rho[0]), rational_from_json(rho[1]),
              rational_from_json(rho[2])}));
      if (spec.contains("psi") || spec.contains("slices")) {
        const Json derived = profile_spec_json(mixture);
        if ((spec.contains("psi") && spec.at("psi") != derived.at("psi")) ||
            (spec.contains("slices") && spec.at("slices") != derived.at("slices"))) {
          throw Error(Errc::invalid_request,
                      "stored psi/slices disagree with rho and k");
        }
      }
      return mixture;
    }
    std::vector<HomogeneousSlice> slices;
    std::vector<Rational> weights;
    for (const auto& m : spec.at("slices")) slices.push_back({k, m.get<int>()});
    for (const auto& w : spec.at("psi")) weights.push_back(rational_from_json(w));
    return MixtureDistribution(std::move(slices), std::move(weights));
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_request, std::string("bad profile spec: ") + e.what());
  }
}

Json assignment_json(const Assignment& x) {
  Json out = Json::array();
  for (Sign v : x) out.push_back(static_cast<int>(v));
  return out;
}

Json instance_json(const CspInstance& inst, const std::optional<Assignment>& planted) {
  Json doc;
  doc["n"] = inst.num_variables();
  doc["k"] = inst.arity();
  doc["predicate"] = {{"slices", inst.predicate().slices()}};
  Json constraints = Json::array();
  for (const auto& con : inst.constraints()) {
    constraints.push_back({{"vars", con.vars}, {"signs", con.signs.to_vector()}});
  }
  doc["constraints"] = std::move(constraints);
  if (inst.weights()) {
    Json weights = Json::array();
    for (const auto& w : *inst.weights()) weights.push_back(rational_json(w));
    doc["weights"] = std::move(weights);
  }
  Json meta = Json::object();
  meta["seed"] = inst.metadata.seed ? Json(*inst.metadata.seed) : Json(nullptr);
  meta["regime"] = inst.metadata.regime;
  meta["noise"] = inst.metadata.noise ? float_json(*inst.metadata.noise) : Json(nullptr);
  if (planted) meta["planted"] = assignment_json(*planted);
  doc["metadata"] = std::move(meta);
  return doc;
}

CspInstance instance_from_json(const Json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    const int k = doc.at("k").get<int>();
    PredicateSet predicate(k, doc.at("predicate").at("slices").get<std::vector<int>>());
    std::vector<Constraint> constraints;
    for (const auto& c : doc.at("constraints")) {
      const auto signs = c.at("signs").get<std::vector<int>>();
      constraints.push_back({c.at("vars").get<std::vector<int>>(),
                             SignVector::from_signs(signs)});
    }
    std::optional<std::vector<Rational>> weights;
    if (doc.contains("weights") && !doc.at("weights").is_null()) {
      weights.emplace();
      for (const auto& w : doc.at("weights")) weights->push_back(rational_from_json(w));
    }
    CspInstance inst(n, std::move(predicate), std::move(constraints), std::move(weights));
    if (doc.contains("metadata")) {
      const auto& meta = doc.at("metadata");
      if (meta.contains("seed") && !meta.at("seed").is_null()) {
        inst.metadata.seed = meta.at("seed").get<std::uint64_t>();
      }
      if (meta.contains("regime")) inst.metadata.regime = meta.at("regime").get<std::string>();
      if (meta.contains("noise") && !meta.at("noise").is_null()) {
        inst.metadata.noise = meta.at("noise").get<double>();
      }
    }
    return inst;
  } catch (const Json::exception& e) {
    throw Error(Errc::malformed_instance, std::string("bad instance file: ") + e.what());
  }
}

std::optional<Assignment> planted_from_json(const Json& doc) {
  if (!doc.contains("metadata") || !doc.at("metadata").contains("planted")) {
    return std::nullopt;
  }
  Assignment x;
  for (const auto& v : doc.at("metadata").at("planted")) x.push_back(static_cast<Sign>(v.get<int>()));
  return x;
}

void write_instance_csv(std::ostream& out, const CspInstance& inst) {
  const int k = inst.arity();
  out << "constraint,weight";
  for (int j = 0; j < k; ++j) out << ",var_" << j;
  for (int j = 0; j < k; ++j) out << ",sign_" << j;
  out << '\n';
  for (std::size_t c = 0; c < inst.size(); ++c) {
    const auto& con = inst.constraints()[c];
    out << c << ',' << to_string(inst.weight(c));
    for (int v : con.vars) out << ',' << v;
    for (int j = 0; j < k; ++j) out << ',' << con.signs[j];
    out << '\n';
  }
}

Json bilin_result_json(const BiLinResult& result, const BiLinConfig& config) {
  Json doc;
  doc["assignment"] = assignment_json(result.assignment);
  Json stages;
  stages["relaxation1"] = float_json(result.stages.relaxation1);
  stages["bilinear1"] = float_json(result.stages.bilinear1);
  stages["relaxation2"] = float_json(result.stages.relaxation2);
  stages["bilinear2"] = float_json(result.stages.bilinear2);
  stages["trilinear"] = float_json(result.stages.trilinear);
  stages["collapsed"] = rational_json(result.stages.collapsed);
  stages["final_value"] = rational_json(result.stages.final_value);
  doc["stage_values"] = std::move(stages);
  doc["value"] = rational_json(result.stages.final_value);
  doc["baseline"] = rational_json(result.baseline);
  doc["advantage"] = rational_json(result.advantage);
  doc["advantage_float"] = float_json(to_double(result.advantage));
  doc["selected"] = result.selected;
  doc["degenerate"] = result.degenerate;
  doc["converged"] = result.converged;
  doc["positions"] = {result.positions[0] + 1, result.positions[1] + 1,
                      result.positions[2] + 1};
  doc["seed"] = config.rounding.seed;
  Json cfg;
  cfg["truncation"] = float_json(config.rounding.truncation);
  cfg["repetitions"] = config.rounding.repetitions;
  cfg["restarts"] = config.relaxation.restarts;
  cfg["rank"] = config.relaxation.rank;
  cfg["collapse"] = config.collapse == CollapseRule::first_copy ? "first" : "majority";
  doc["config"] = std::move(cfg);
  return doc;
}

Json oracle_result_json(const CspInstance& inst, const OracleReport& report,
                        int ceiling) {
  Json doc;
  doc["assignment"] = assignment_json(report.assignment);
  doc["stage_values"] = {{"optimum", rational_json(report.optimum)}};
  doc["value"] = rational_json(report.optimum);
  const Rational baseline = inst.predicate().density();
  doc["baseline"] = rational_json(baseline);
  doc["advantage"] = rational_json(report.optimum - baseline);
  doc["advantage_float"] = float_json(to_double(report.optimum - baseline));
  doc["evaluations"] = report.evaluations;
  doc["seed"] = nullptr;
  doc["config"] = {{"ceiling", ceiling}};
  return doc;
}

}  // namespace kcsp
