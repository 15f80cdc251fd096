#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpusplay/error.hpp"

namespace corpusplay::expr {

// Reduced fraction with a positive denominator. Arithmetic that would
// overflow 64 bits yields nullopt.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static std::optional<Rational> make(std::int64_t num, std::int64_t den);
  double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const noexcept { return den == 1; }

  friend bool operator==(const Rational&, const Rational&) = default;
};

std::optional<Rational> add(Rational a, Rational b);
std::optional<Rational> sub(Rational a, Rational b);
std::optional<Rational> mul(Rational a, Rational b);
std::optional<Rational> div(Rational a, Rational b);

enum class Kind { Number, Pi, Variable, Add, Sub, Mul, Div, Pow, Neg, Func };
enum class Function { Sqrt, Sin, Cos, Tan, Ln, Log, Exp };

struct Node {
  Kind kind = Kind::Number;
  double value = 0.0;              // Number
  std::optional<Rational> exact;   // Number, when representable
  std::string name;                // Variable
  Function func = Function::Sqrt;  // Func
  std::vector<Node> children;      // two for binary ops, one for Neg/Func

  static Node number(double v, std::optional<Rational> exact = std::nullopt);
  static Node variable(std::string name);
  static Node binary(Kind kind, Node lhs, Node rhs);
  static Node unary(Kind kind, Node child);
  static Node call(Function f, Node arg);
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error("expression parse error at " + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Grammar (whitespace insignificant, `,` thousands separators inside numbers):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/' | implicit) factor)*
//   factor := ('-' | '+') factor | atom ('^' factor)?
//   atom   := number | variable | '(' expr ')' | '{' expr '}' | \frac{expr}{expr}
//           | \sqrt{expr} | function atom | \pi
// LaTeX spellings (\cdot, \times, \div, \left, \right, \dfrac, Greek letters)
// and the Unicode operators − × ÷ · π are accepted. Variables are single
// letters with optional subscripts (x_1, x_{12}) or Greek names; "xy" is x*y.
Node parse_expression(std::string_view text);

std::set<std::string> variables(const Node& node);

using Assignment = std::map<std::string, double, std::less<>>;

// nullopt at a singularity: division by zero, a domain error, or a
// non-finite intermediate.
std::optional<double> evaluate(const Node& node, const Assignment& vars);

// Exact value of a variable-free tree built from + - * / and integer powers.
std::optional<Rational> evaluate_exact(const Node& node);

enum class Equivalence { Equivalent, NotEquivalent, Indeterminate };

struct EquivalenceOptions {
  int samples = 16;
  int max_retries = 8;  // per sample, after the first draw
  double magnitude_lo = 0.1;
  double magnitude_hi = 3.0;
  double rel_tol = 1e-9;
  std::uint64_t seed = 0x5EED0F5EEDULL;
};

// Randomized evaluation: variable sets must match, then both trees must
// agree within rel_tol * max(1, |a|, |b|) at every sampled assignment, each
// coordinate drawn uniformly from [-hi, -lo] U [lo, hi].
Equivalence compare(const Node& a, const Node& b, const EquivalenceOptions& options = {});

inline bool expr_equivalent(const Node& a, const Node& b, const EquivalenceOptions& options = {}) {
  return compare(a, b, options) == Equivalence::Equivalent;
}

// Fully parenthesized rendering; parse_expression(to_string(n)) evaluates
// identically to n.
std::string to_string(const Node& node);

}  // namespace corpusplay::expr
