#include "kcsp/error.hpp"
#include "kcsp/rational.hpp"
#include "kcsp/sign_vector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace kcsp {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_request: return "invalid-request";
    case Errc::degenerate_profile: return "degenerate-profile";
    case Errc::infeasible_bias: return "infeasible-bias";
    case Errc::integrality: return "integrality";
    case Errc::disjointness: return "disjointness";
    case Errc::invalid_distribution: return "invalid-distribution";
    case Errc::precondition: return "precondition";
    case Errc::capacity: return "capacity";
    case Errc::malformed_instance: return "malformed-instance";
    case Errc::incomplete_substitution: return "incomplete-substitution";
  }
  return "unknown";
}

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

BigInt parse_integer(std::string_view text, std::string_view whole) {
  if (text.empty()) {
    throw Error(Errc::invalid_request,
                "malformed rational '" + std::string(whole) + "'");
  }
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) {
    throw Error(Errc::invalid_request,
                "malformed rational '" + std::string(whole) + "'");
  }
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw Error(Errc::invalid_request,
                  "malformed rational '" + std::string(whole) + "'");
    }
  }
  BigInt value(std::string(text.substr(start)));
  return text[0] == '-' ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text, text));
  const BigInt num = parse_integer(text.substr(0, slash), text);
  const BigInt den = parse_integer(text.substr(slash + 1), text);
  if (den == 0) {
    throw Error(Errc::invalid_request,
                "zero denominator in '" + std::string(text) + "'");
  }
  return Rational(num, den);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::uint64_t binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0;
  if (n > 64) throw Error(Errc::capacity, "binomial argument above 64");
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (int i = 0; i < r; ++i) acc = acc * static_cast<unsigned>(n - i) / (i + 1);
  return static_cast<std::uint64_t>(acc);
}

int exact_sqrt(int n) {
  if (n < 0) return -1;
  int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  while (root * root > n) --root;
  while ((root + 1) * (root + 1) <= n) ++root;
  return root * root == n ? root : -1;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::uint64_t arity_mask(int arity) {
  return arity >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << arity) - 1;
}

SignVector::SignVector(int arity, std::uint64_t code) : arity_(arity), code_(code) {
  if (arity < 0 || arity > kMaxArity) {
    throw Error(Errc::invalid_request, "sign vector arity out of range");
  }
  if ((code & ~arity_mask(arity)) != 0) {
    throw Error(Errc::invalid_request, "sign vector code exceeds arity");
  }
}

SignVector SignVector::from_signs(std::span<const int> signs) {
  if (signs.size() > kMaxArity) {
    throw Error(Errc::invalid_request, "sign vector arity out of range");
  }
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == -1) {
      code |= std::uint64_t{1} << i;
    } else if (signs[i] != 1) {
      throw Error(Errc::invalid_request, "sign entries must be +1 or -1");
    }
  }
  return SignVector(static_cast<int>(signs.size()), code);
}

int SignVector::count_plus() const { return arity_ - std::popcount(code_); }

SignVector SignVector::negated() const {
  return SignVector(arity_, ~code_ & arity_mask(arity_));
}

SignVector SignVector::operator*(const SignVector& other) const {
  if (other.arity_ != arity_) {
    throw Error(Errc::invalid_request, "sign vector arity mismatch");
  }
  return SignVector(arity_, code_ ^ other.code_);
}

std::vector<int> SignVector::to_vector() const {
  std::vector<int> out(arity_);
  for (int i = 0; i < arity_; ++i) out[i] = (*this)[i];
  return out;
}

bool is_sign_assignment(std::span<const Sign> values) {
  for (Sign v : values) {
    if (v != 1 && v != -1) return false;
  }
  return true;
}

bool lex_less(std::span<const Sign> lhs, std::span<const Sign> rhs) {
  const std::size_t n = std::min(lhs.size(), rhs.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (lhs[i] != rhs[i]) return lhs[i] > rhs[i];  // +1 sorts first
  }
  return lhs.size() < rhs.size();
}

}  // namespace kcsp
