#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kcsp {

// A point of {+1,-1}^k. Bit i of the code is 0 for +1 and 1 for -1, so the
// all-(+1) vector encodes to zero.
class SignVector {
 public:
  static constexpr int kMaxArity = 64;

  SignVector() = default;
  SignVector(int arity, std::uint64_t code);

  static SignVector from_signs(std::span<const int> signs);
  static SignVector all_plus(int arity) { return SignVector(arity, 0); }

  int arity() const { return arity_; }
  std::uint64_t code() const { return code_; }

  int operator[](int i) const { return ((code_ >> i) & 1U) ? -1 : 1; }

  int count_plus() const;
  int count_minus() const { return arity_ - count_plus(); }
  int sum() const { return count_plus() - count_minus(); }

  SignVector negated() const;
  // Coordinatewise product.
  SignVector operator*(const SignVector& other) const;

  std::vector<int> to_vector() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  int arity_ = 0;
  std::uint64_t code_ = 0;
};

std::uint64_t arity_mask(int arity);

// Assignments to n Boolean variables, values in {+1,-1}.
using Sign = std::int8_t;
using Assignment = std::vector<Sign>;

bool is_sign_assignment(std::span<const Sign> values);

// Lexicographic order with +1 before -1, used for every deterministic
// tie-break.
bool lex_less(std::span<const Sign> lhs, std::span<const Sign> rhs);

}  // namespace kcsp
