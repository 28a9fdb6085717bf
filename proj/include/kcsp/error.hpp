#pragma once

#include <stdexcept>
#include <string>

namespace kcsp {

enum class Errc {
  invalid_request,
  degenerate_profile,
  infeasible_bias,
  integrality,
  disjointness,
  invalid_distribution,
  precondition,
  capacity,
  malformed_instance,
  incomplete_substitution,
};

const char* errc_name(Errc code);

// All library failures are reported through this exception; the CLI maps
// the code onto its exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace kcsp
