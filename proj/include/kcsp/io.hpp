#pragma once

#include "kcsp/csp.hpp"
#include "kcsp/oracle.hpp"
#include "kcsp/predicates.hpp"
#include "kcsp/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace kcsp {

using Json = nlohmann::ordered_json;

// Floats are written with 12 significant digits.
Json float_json(double value);
Json rational_json(const Rational& r);
Rational rational_from_json(const Json& j);

// {k, rho: ["p/q", ...], psi: [...], slices: [m1, m2, m3]}
Json profile_spec_json(const MixtureDistribution& mixture);
// Re-validates the document: the stored psi and slices must agree with
// what rho and k produce.
MixtureDistribution mixture_from_spec(const Json& spec);

// {n, k, predicate: {slices}, constraints: [{vars, signs}], weights?,
//  metadata: {seed, regime, noise, planted?}}
Json instance_json(const CspInstance& inst,
                   const std::optional<Assignment>& planted = std::nullopt);
CspInstance instance_from_json(const Json& doc);
std::optional<Assignment> planted_from_json(const Json& doc);

// constraint,weight,var_0..var_{k-1},sign_0..sign_{k-1}
void write_instance_csv(std::ostream& out, const CspInstance& inst);

Json assignment_json(const Assignment& x);

Json bilin_result_json(const BiLinResult& result, const BiLinConfig& config);
Json oracle_result_json(const CspInstance& inst, const OracleReport& report,
                        int ceiling);

}  // namespace kcsp
