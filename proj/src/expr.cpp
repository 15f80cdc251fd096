#include "corpusplay/expr.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "corpusplay/random.hpp"

namespace corpusplay::expr {

// ---------------------------------------------------------------- Rational

std::optional<Rational> Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    if (num == INT64_MIN || den == INT64_MIN) return std::nullopt;
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

namespace {

std::optional<Rational> from_wide(__int128 num, __int128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  if (num > INT64_MAX || num < -INT64_MAX || den > INT64_MAX) return std::nullopt;
  return Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

}  // namespace

std::optional<Rational> add(Rational a, Rational b) {
  return from_wide(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                   static_cast<__int128>(a.den) * b.den);
}
std::optional<Rational> sub(Rational a, Rational b) {
  return from_wide(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                   static_cast<__int128>(a.den) * b.den);
}
std::optional<Rational> mul(Rational a, Rational b) {
  return from_wide(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
std::optional<Rational> div(Rational a, Rational b) {
  if (b.num == 0) return std::nullopt;
  return from_wide(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}

// -------------------------------------------------------------------- Node

Node Node::number(double v, std::optional<Rational> exact) {
  Node n;
  n.kind = Kind::Number;
  n.value = v;
  n.exact = exact;
  return n;
}

Node Node::variable(std::string name) {
  Node n;
  n.kind = Kind::Variable;
  n.name = std::move(name);
  return n;
}

Node Node::binary(Kind kind, Node lhs, Node rhs) {
  Node n;
  n.kind = kind;
  n.children.push_back(std::move(lhs));
  n.children.push_back(std::move(rhs));
  return n;
}

Node Node::unary(Kind kind, Node child) {
  Node n;
  n.kind = kind;
  n.children.push_back(std::move(child));
  return n;
}

Node Node::call(Function f, Node arg) {
  Node n = unary(Kind::Func, std::move(arg));
  n.func = f;
  return n;
}

// ------------------------------------------------------------------- Lexer

namespace {

enum class Tok {
  Number, Ident, Func, Pi, Frac, Sqrt,
  Plus, Minus, Star, Slash, Caret,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  End
};

struct Token {
  Tok tok = Tok::End;
  std::size_t pos = 0;
  double value = 0.0;
  std::optional<Rational> exact;
  std::string name;
  Function func = Function::Sqrt;
};

constexpr std::array<std::string_view, 32> kGreek = {
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
    "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi",
    "rho", "sigma", "tau", "upsilon", "phi", "varphi", "chi", "psi",
    "omega", "Gamma", "Delta", "Theta", "Lambda", "Sigma", "Phi", "Omega"};

bool is_greek(std::string_view s) {
  for (auto g : kGreek)
    if (g == s) return true;
  return false;
}

std::optional<Function> function_named(std::string_view s) {
  if (s == "sqrt") return Function::Sqrt;
  if (s == "sin") return Function::Sin;
  if (s == "cos") return Function::Cos;
  if (s == "tan") return Function::Tan;
  if (s == "ln") return Function::Ln;
  if (s == "log") return Function::Log;
  if (s == "exp") return Function::Exp;
  return std::nullopt;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      bool done = t.tok == Tok::End;
      out.push_back(std::move(t));
      if (done) break;
    }
    return out;
  }

 private:
  bool starts(std::string_view lit) const { return s_.substr(i_, lit.size()) == lit; }

  Token make(Tok tok, std::size_t pos) {
    Token t;
    t.tok = tok;
    t.pos = pos;
    return t;
  }

  Token next() {
    for (;;) {
      while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r' ||
                                s_[i_] == '$'))
        ++i_;
      if (i_ >= s_.size()) return make(Tok::End, i_);
      std::size_t pos = i_;
      char c = s_[i_];

      if (c == '\\') {
        ++i_;
        if (i_ < s_.size() && !is_alpha(s_[i_])) {
          char sp = s_[i_];
          if (sp == ',' || sp == ';' || sp == '!' || sp == ':' || sp == ' ') {
            ++i_;
            continue;
          }
          throw ParseError(pos, "unsupported escape");
        }
        std::size_t start = i_;
        while (i_ < s_.size() && is_alpha(s_[i_])) ++i_;
        std::string_view cmd = s_.substr(start, i_ - start);
        if (cmd == "frac" || cmd == "dfrac" || cmd == "tfrac") return make(Tok::Frac, pos);
        if (cmd == "sqrt") return make(Tok::Sqrt, pos);
        if (cmd == "cdot" || cmd == "times" || cmd == "ast") return make(Tok::Star, pos);
        if (cmd == "div") return make(Tok::Slash, pos);
        if (cmd == "pi") return make(Tok::Pi, pos);
        if (cmd == "left" || cmd == "right" || cmd == "displaystyle" || cmd == "big" || cmd == "Big" ||
            cmd == "bigl" || cmd == "bigr" || cmd == "Bigl" || cmd == "Bigr")
          continue;
        if (auto f = function_named(cmd); f && *f != Function::Sqrt) {
          Token t = make(Tok::Func, pos);
          t.func = *f;
          return t;
        }
        if (is_greek(cmd)) {
          Token t = make(Tok::Ident, pos);
          t.name = std::string(cmd);
          read_subscript(t.name);
          return t;
        }
        throw ParseError(pos, "unsupported command \\" + std::string(cmd));
      }

      // Multi-byte operators.
      if (starts("\xE2\x88\x92")) { i_ += 3; return make(Tok::Minus, pos); }  // −
      if (starts("\xC3\x97")) { i_ += 2; return make(Tok::Star, pos); }       // ×
      if (starts("\xC3\xB7")) { i_ += 2; return make(Tok::Slash, pos); }      // ÷
      if (starts("\xC2\xB7")) { i_ += 2; return make(Tok::Star, pos); }       // ·
      if (starts("\xE2\x8B\x85")) { i_ += 3; return make(Tok::Star, pos); }  // ⋅
      if (starts("\xCF\x80")) { i_ += 2; return make(Tok::Pi, pos); }         // π

      if (is_digit(c) || (c == '.' && i_ + 1 < s_.size() && is_digit(s_[i_ + 1]))) return number(pos);

      if (is_alpha(c)) {
        std::size_t j = i_;
        while (j < s_.size() && is_alpha(s_[j])) ++j;
        std::string_view word = s_.substr(i_, j - i_);
        // Function names only count when applied with parentheses.
        for (std::string_view fname : {"sqrt", "sin", "cos", "tan", "exp", "log", "ln"}) {
          if (word.starts_with(fname) && word.size() == fname.size() && j < s_.size() && s_[j] == '(') {
            i_ = j;
            auto f = *function_named(fname);
            if (f == Function::Sqrt) return make(Tok::Sqrt, pos);
            Token t = make(Tok::Func, pos);
            t.func = f;
            return t;
          }
        }
        if (word == "pi") {
          i_ = j;
          return make(Tok::Pi, pos);
        }
        Token t = make(Tok::Ident, pos);
        t.name = std::string(1, c);
        ++i_;
        read_subscript(t.name);
        return t;
      }

      ++i_;
      switch (c) {
        case '+': return make(Tok::Plus, pos);
        case '-': return make(Tok::Minus, pos);
        case '*':
          if (i_ < s_.size() && s_[i_] == '*') {
            ++i_;
            return make(Tok::Caret, pos);
          }
          return make(Tok::Star, pos);
        case '/': return make(Tok::Slash, pos);
        case '^': return make(Tok::Caret, pos);
        case '(': return make(Tok::LParen, pos);
        case ')': return make(Tok::RParen, pos);
        case '{': return make(Tok::LBrace, pos);
        case '}': return make(Tok::RBrace, pos);
        case '[': return make(Tok::LBracket, pos);
        case ']': return make(Tok::RBracket, pos);
        default: throw ParseError(pos, std::string("unexpected character '") + c + "'");
      }
    }
  }

  void read_subscript(std::string& name) {
    if (i_ >= s_.size() || s_[i_] != '_') return;
    std::size_t pos = i_;
    ++i_;
    std::string sub;
    if (i_ < s_.size() && s_[i_] == '{') {
      ++i_;
      while (i_ < s_.size() && (is_alpha(s_[i_]) || is_digit(s_[i_]))) sub.push_back(s_[i_++]);
      if (i_ >= s_.size() || s_[i_] != '}') throw ParseError(pos, "malformed subscript");
      ++i_;
    } else if (i_ < s_.size() && (is_alpha(s_[i_]) || is_digit(s_[i_]))) {
      sub.push_back(s_[i_++]);
    }
    if (sub.empty()) throw ParseError(pos, "empty subscript");
    name += "_" + sub;
  }

  // Consumes a ',' or '{,}' thousands separator when exactly three digits follow.
  bool thousands_separator() {
    std::size_t width = 0;
    if (starts(",")) width = 1;
    else if (starts("{,}")) width = 3;
    else return false;
    std::size_t j = i_ + width;
    if (j + 3 > s_.size()) return false;
    for (std::size_t k = 0; k < 3; ++k)
      if (!is_digit(s_[j + k])) return false;
    if (j + 3 < s_.size() && is_digit(s_[j + 3])) return false;
    i_ = j;
    return true;
  }

  Token number(std::size_t pos) {
    std::string digits;
    std::size_t frac_digits = 0;
    while (i_ < s_.size()) {
      if (is_digit(s_[i_])) {
        digits.push_back(s_[i_++]);
      } else if (!digits.empty() && thousands_separator()) {
        continue;
      } else {
        break;
      }
    }
    if (i_ < s_.size() && s_[i_] == '.' && i_ + 1 < s_.size() && is_digit(s_[i_ + 1])) {
      ++i_;
      while (i_ < s_.size() && is_digit(s_[i_])) {
        digits.push_back(s_[i_++]);
        ++frac_digits;
      }
    } else if (i_ < s_.size() && s_[i_] == '.' && !digits.empty()) {
      ++i_;  // "42." is 42
    }
    Token t = make(Tok::Number, pos);
    std::string text = digits;
    if (frac_digits) text.insert(text.size() - frac_digits, ".");
    t.value = std::strtod(text.c_str(), nullptr);
    // Exact when the digit string and 10^frac fit in 64 bits.
    if (digits.size() <= 18 && frac_digits <= 18) {
      std::int64_t num = 0;
      for (char d : digits) num = num * 10 + (d - '0');
      std::int64_t den = 1;
      for (std::size_t k = 0; k < frac_digits; ++k) den *= 10;
      t.exact = Rational::make(num, den);
    }
    return t;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

// ------------------------------------------------------------------ Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Node parse() {
    if (peek().tok == Tok::End) throw ParseError(peek().pos, "empty expression");
    Node n = expr();
    if (peek().tok != Tok::End) throw ParseError(peek().pos, "unexpected token");
    return n;
  }

 private:
  const Token& peek() const { return toks_[k_]; }
  Token take() { return toks_[k_++]; }

  void expect(Tok tok, const char* what) {
    if (peek().tok != tok) throw ParseError(peek().pos, std::string("expected ") + what);
    ++k_;
  }

  bool starts_atom(Tok t) const {
    switch (t) {
      case Tok::Number: case Tok::Ident: case Tok::Func: case Tok::Pi: case Tok::Frac:
      case Tok::Sqrt: case Tok::LParen: case Tok::LBrace: case Tok::LBracket:
        return true;
      default:
        return false;
    }
  }

  Node expr() {
    Node lhs = term();
    while (peek().tok == Tok::Plus || peek().tok == Tok::Minus) {
      Kind kind = take().tok == Tok::Plus ? Kind::Add : Kind::Sub;
      lhs = Node::binary(kind, std::move(lhs), term());
    }
    return lhs;
  }

  Node term() {
    Node lhs = factor();
    for (;;) {
      if (peek().tok == Tok::Star || peek().tok == Tok::Slash) {
        Kind kind = take().tok == Tok::Star ? Kind::Mul : Kind::Div;
        lhs = Node::binary(kind, std::move(lhs), factor());
      } else if (starts_atom(peek().tok)) {
        lhs = Node::binary(Kind::Mul, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  Node factor() {
    if (peek().tok == Tok::Minus) {
      take();
      return Node::unary(Kind::Neg, factor());
    }
    if (peek().tok == Tok::Plus) {
      take();
      return factor();
    }
    return power();
  }

  Node power() {
    Node base = atom();
    if (peek().tok == Tok::Caret) {
      take();
      return Node::binary(Kind::Pow, std::move(base), factor());
    }
    return base;
  }

  Node group(Tok open, Tok close, const char* what) {
    expect(open, what);
    Node n = expr();
    expect(close, what);
    return n;
  }

  Node atom() {
    const Token& t = peek();
    switch (t.tok) {
      case Tok::Number: {
        Token n = take();
        return Node::number(n.value, n.exact);
      }
      case Tok::Ident:
        return Node::variable(take().name);
      case Tok::Pi: {
        take();
        Node n;
        n.kind = Kind::Pi;
        return n;
      }
      case Tok::LParen: return group(Tok::LParen, Tok::RParen, "')'");
      case Tok::LBrace: return group(Tok::LBrace, Tok::RBrace, "'}'");
      case Tok::LBracket: return group(Tok::LBracket, Tok::RBracket, "']'");
      case Tok::Frac: {
        take();
        Node num = group(Tok::LBrace, Tok::RBrace, "'{' group after \\frac");
        Node den = group(Tok::LBrace, Tok::RBrace, "'{' group after \\frac");
        return Node::binary(Kind::Div, std::move(num), std::move(den));
      }
      case Tok::Sqrt: {
        take();
        std::optional<Node> index;
        if (peek().tok == Tok::LBracket) index = group(Tok::LBracket, Tok::RBracket, "']'");
        Node arg = peek().tok == Tok::LParen ? group(Tok::LParen, Tok::RParen, "')'")
                                             : group(Tok::LBrace, Tok::RBrace, "'{' group after \\sqrt");
        if (!index) return Node::call(Function::Sqrt, std::move(arg));
        Node one = Node::number(1.0, Rational{1, 1});
        return Node::binary(Kind::Pow, std::move(arg),
                            Node::binary(Kind::Div, std::move(one), std::move(*index)));
      }
      case Tok::Func: {
        Function f = take().func;
        // \sin^2(x) is (\sin x)^2; a parenthesized argument binds before '^'.
        std::optional<Node> exponent;
        if (peek().tok == Tok::Caret) {
          take();
          exponent = power();
        }
        Node arg = peek().tok == Tok::LParen ? group(Tok::LParen, Tok::RParen, "')'") : power();
        Node call = Node::call(f, std::move(arg));
        if (!exponent) return call;
        return Node::binary(Kind::Pow, std::move(call), std::move(*exponent));
      }
      default:
        throw ParseError(t.pos, t.tok == Tok::End ? "unexpected end of expression" : "unexpected token");
    }
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

void collect_variables(const Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::Variable) out.insert(n.name);
  for (const auto& c : n.children) collect_variables(c, out);
}

}  // namespace

Node parse_expression(std::string_view text) { return Parser(Lexer(text).run()).parse(); }

std::set<std::string> variables(const Node& node) {
  std::set<std::string> out;
  collect_variables(node, out);
  return out;
}

// -------------------------------------------------------------- Evaluation

std::optional<double> evaluate(const Node& n, const Assignment& vars) {
  auto finite = [](double v) -> std::optional<double> {
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  };
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Pi: return std::numbers::pi;
    case Kind::Variable: {
      auto it = vars.find(n.name);
      if (it == vars.end()) return std::nullopt;
      return it->second;
    }
    case Kind::Neg: {
      auto v = evaluate(n.children[0], vars);
      if (!v) return std::nullopt;
      return -*v;
    }
    case Kind::Func: {
      auto v = evaluate(n.children[0], vars);
      if (!v) return std::nullopt;
      double x = *v;
      switch (n.func) {
        case Function::Sqrt: if (x < 0) return std::nullopt; return std::sqrt(x);
        case Function::Sin: return std::sin(x);
        case Function::Cos: return std::cos(x);
        case Function::Tan: return finite(std::tan(x));
        case Function::Ln:
        case Function::Log: if (x <= 0) return std::nullopt; return std::log(x);
        case Function::Exp: return finite(std::exp(x));
      }
      return std::nullopt;
    }
    default: break;
  }
  auto a = evaluate(n.children[0], vars);
  if (!a) return std::nullopt;
  auto b = evaluate(n.children[1], vars);
  if (!b) return std::nullopt;
  switch (n.kind) {
    case Kind::Add: return finite(*a + *b);
    case Kind::Sub: return finite(*a - *b);
    case Kind::Mul: return finite(*a * *b);
    case Kind::Div:
      if (*b == 0.0) return std::nullopt;
      return finite(*a / *b);
    case Kind::Pow: return finite(std::pow(*a, *b));
    default: return std::nullopt;
  }
}

std::optional<Rational> evaluate_exact(const Node& n) {
  switch (n.kind) {
    case Kind::Number: return n.exact;
    case Kind::Neg: {
      auto v = evaluate_exact(n.children[0]);
      if (!v || v->num == INT64_MIN) return std::nullopt;
      return Rational{-v->num, v->den};
    }
    case Kind::Add: case Kind::Sub: case Kind::Mul: case Kind::Div: case Kind::Pow: break;
    default: return std::nullopt;
  }
  auto a = evaluate_exact(n.children[0]);
  auto b = evaluate_exact(n.children[1]);
  if (!a || !b) return std::nullopt;
  switch (n.kind) {
    case Kind::Add: return add(*a, *b);
    case Kind::Sub: return sub(*a, *b);
    case Kind::Mul: return mul(*a, *b);
    case Kind::Div: return div(*a, *b);
    case Kind::Pow: {
      if (!b->is_integer() || b->num > 64 || b->num < -64) return std::nullopt;
      Rational acc{1, 1};
      for (std::int64_t k = 0; k < (b->num < 0 ? -b->num : b->num); ++k) {
        auto next = mul(acc, *a);
        if (!next) return std::nullopt;
        acc = *next;
      }
      if (b->num < 0) return div(Rational{1, 1}, acc);
      return acc;
    }
    default: return std::nullopt;
  }
}

Equivalence compare(const Node& a, const Node& b, const EquivalenceOptions& opt) {
  auto names = variables(a);
  if (names != variables(b)) return Equivalence::NotEquivalent;

  Rng rng = make_rng(opt.seed);
  Assignment point;
  for (int s = 0; s < opt.samples; ++s) {
    bool compared = false;
    for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
      for (const auto& name : names) {
        double magnitude = opt.magnitude_lo + (opt.magnitude_hi - opt.magnitude_lo) * uniform01(rng);
        point[name] = bernoulli(rng, 0.5) ? -magnitude : magnitude;
      }
      auto va = evaluate(a, point);
      auto vb = evaluate(b, point);
      if (!va || !vb) continue;
      double scale = std::max({1.0, std::abs(*va), std::abs(*vb)});
      if (std::abs(*va - *vb) > opt.rel_tol * scale) return Equivalence::NotEquivalent;
      compared = true;
      break;
    }
    if (!compared) return Equivalence::Indeterminate;
  }
  return Equivalence::Equivalent;
}

// --------------------------------------------------------------- Printing

std::string to_string(const Node& n) {
  switch (n.kind) {
    case Kind::Number: {
      std::string s;
      if (n.exact) {
        s = std::to_string(n.exact->num);
        if (n.exact->den != 1) s = "(" + s + "/" + std::to_string(n.exact->den) + ")";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        s = buf;
      }
      return s.starts_with("-") || s.starts_with("(-") ? "(" + s + ")" : s;
    }
    case Kind::Pi: return "\\pi";
    case Kind::Variable: {
      std::string name = n.name;
      std::string base = name.substr(0, name.find('_'));
      std::string sub = name.size() > base.size() ? "_{" + name.substr(base.size() + 1) + "}" : "";
      return (base.size() > 1 ? "\\" + base : base) + sub;
    }
    case Kind::Neg: return "(-" + to_string(n.children[0]) + ")";
    case Kind::Func: {
      static constexpr std::array<const char*, 7> names = {"\\sqrt", "\\sin", "\\cos", "\\tan",
                                                           "\\ln", "\\log", "\\exp"};
      return std::string(names[static_cast<int>(n.func)]) + "(" + to_string(n.children[0]) + ")";
    }
    default: break;
  }
  const char* op = "?";
  switch (n.kind) {
    case Kind::Add: op = "+"; break;
    case Kind::Sub: op = "-"; break;
    case Kind::Mul: op = "*"; break;
    case Kind::Div: op = "/"; break;
    case Kind::Pow: op = "^"; break;
    default: break;
  }
  return "(" + to_string(n.children[0]) + op + to_string(n.children[1]) + ")";
}

}  // namespace corpusplay::expr
