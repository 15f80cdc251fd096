#pragma once

// Random expression trees, equivalence-preserving rewrites, perturbations,
// and a dense-grid evaluation oracle. Independent of the library's parser
// and evaluator: trees are printed to text and the oracle evaluates them
// directly.

#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace cptest {

struct G {
  char op = 'n';  // n number, v variable, + - * / ^, ~ negation
  long num = 0;
  std::string var;
  std::vector<G> kids;
};

inline G num(long v) { return G{'n', v, {}, {}}; }
inline G var(std::string name) { return G{'v', 0, std::move(name), {}}; }
inline G bin(char op, G a, G b) { return G{op, 0, {}, {std::move(a), std::move(b)}}; }
inline G neg(G a) { return G{'~', 0, {}, {std::move(a)}}; }

class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  G tree(int depth, const std::vector<std::string>& vars) {
    if (depth == 0 || pick(4) == 0) {
      if (!vars.empty() && pick(2) == 0) return var(vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))]);
      return num(1 + pick(9));
    }
    switch (pick(6)) {
      case 0: return bin('+', tree(depth - 1, vars), tree(depth - 1, vars));
      case 1: return bin('-', tree(depth - 1, vars), tree(depth - 1, vars));
      case 2: return bin('*', tree(depth - 1, vars), tree(depth - 1, vars));
      case 3: return bin('/', tree(depth - 1, vars), tree(depth - 1, vars));
      case 4: return bin('^', tree(depth - 1 > 1 ? 1 : depth - 1, vars), num(2 + pick(2)));
      default: return neg(tree(depth - 1, vars));
    }
  }

  // Applies one semantics-preserving rewrite at a random node.
  G rewrite(const G& g) {
    std::vector<const G*> nodes;
    collect(g, nodes);
    const G* target = nodes[static_cast<std::size_t>(pick(static_cast<int>(nodes.size())))];
    return replace(g, target);
  }

  // Changes the value of the tree at (almost) every point.
  G perturb(const G& g) {
    std::vector<const G*> nodes;
    collect(g, nodes);
    const G* target = nodes[static_cast<std::size_t>(pick(static_cast<int>(nodes.size())))];
    return perturb_at(g, target);
  }

  // Renders with varied surface syntax: \frac, \cdot, implicit products,
  // braces around exponents.
  std::string print(const G& g) {
    switch (g.op) {
      case 'n': return std::to_string(g.num);
      case 'v': return g.var;
      case '~': return "(-" + print(g.kids[0]) + ")";
      case '/':
        if (pick(2) == 0) return "\\frac{" + print(g.kids[0]) + "}{" + print(g.kids[1]) + "}";
        return "(" + print(g.kids[0]) + ")/(" + print(g.kids[1]) + ")";
      case '*':
        switch (pick(3)) {
          case 0: return "(" + print(g.kids[0]) + ")(" + print(g.kids[1]) + ")";
          case 1: return "(" + print(g.kids[0]) + ") \\cdot (" + print(g.kids[1]) + ")";
          default: return "(" + print(g.kids[0]) + ")*(" + print(g.kids[1]) + ")";
        }
      case '^':
        return "(" + print(g.kids[0]) + ")^" + (pick(2) ? "{" + print(g.kids[1]) + "}" : print(g.kids[1]));
      default: return "(" + print(g.kids[0]) + " " + g.op + " " + print(g.kids[1]) + ")";
    }
  }

 private:
  static void collect(const G& g, std::vector<const G*>& out) {
    out.push_back(&g);
    for (const auto& k : g.kids) collect(k, out);
  }

  G replace(const G& g, const G* target) {
    if (&g == target) return rewrite_here(g);
    G copy = g;
    for (std::size_t i = 0; i < g.kids.size(); ++i) copy.kids[i] = replace(g.kids[i], target);
    return copy;
  }

  G perturb_at(const G& g, const G* target) {
    if (&g == target) {
      switch (g.op) {
        case 'n': return num(g.num + 1);
        case '+': return bin('-', g.kids[0], g.kids[1]);
        case '-': return bin('+', g.kids[0], g.kids[1]);
        case '*': return bin('+', g.kids[0], g.kids[1]);
        default: return bin('+', g, num(1));
      }
    }
    G copy = g;
    for (std::size_t i = 0; i < g.kids.size(); ++i) copy.kids[i] = perturb_at(g.kids[i], target);
    return copy;
  }

  G rewrite_here(const G& g) {
    const auto& k = g.kids;
    switch (g.op) {
      case '+':
        if (k[0].op == '+' && pick(2)) return bin('+', k[0].kids[0], bin('+', k[0].kids[1], k[1]));
        return bin('+', k[1], k[0]);
      case '*':
        if (k[1].op == '+' && pick(2)) return bin('+', bin('*', k[0], k[1].kids[0]), bin('*', k[0], k[1].kids[1]));
        return bin('*', k[1], k[0]);
      case '-': return bin('+', k[0], bin('*', num(-1), k[1]));
      case '/': return bin('*', k[0], bin('/', num(1), k[1]));
      case '^':
        if (k[1].op != 'n' || k[1].num < 2) return neg(neg(g));
        if (k[1].num == 2) return bin('*', k[0], k[0]);
        return bin('*', bin('^', k[0], num(k[1].num - 1)), k[0]);
      case '~': return bin('*', num(-1), k[0]);
      case 'n': return bin('-', num(g.num + 2), num(2));
      default:
        if (pick(2)) return bin('/', bin('*', num(2), g), num(2));
        return neg(neg(g));
    }
  }

  std::mt19937_64 rng_;
};

inline std::optional<double> eval(const G& g, double x, double y) {
  auto fin = [](double v) -> std::optional<double> {
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  };
  switch (g.op) {
    case 'n': return static_cast<double>(g.num);
    case 'v': return g.var == "x" ? x : y;
    case '~': {
      auto a = eval(g.kids[0], x, y);
      if (!a) return std::nullopt;
      return -*a;
    }
    default: break;
  }
  auto a = eval(g.kids[0], x, y), b = eval(g.kids[1], x, y);
  if (!a || !b) return std::nullopt;
  switch (g.op) {
    case '+': return fin(*a + *b);
    case '-': return fin(*a - *b);
    case '*': return fin(*a * *b);
    case '/':
      if (std::abs(*b) < 1e-12) return std::nullopt;
      return fin(*a / *b);
    case '^': return fin(std::pow(*a, *b));
  }
  return std::nullopt;
}

inline void vars_of(const G& g, std::set<std::string>& out) {
  if (g.op == 'v') out.insert(g.var);
  for (const auto& k : g.kids) vars_of(k, out);
}

// Equivalent iff the variable sets match and the trees agree to 1e-7
// relative at every grid point where both are defined (1,000 points over
// [-3,-0.1] U [0.1,3] per variable, offset to avoid rational singularities).
inline bool grid_oracle(const G& a, const G& b) {
  std::set<std::string> va, vb;
  vars_of(a, va);
  vars_of(b, vb);
  if (va != vb) return false;
  auto coord = [](int i, int n) {
    // n points spread over both halves of the domain.
    const int half = n / 2;
    const int j = i % half;
    const double t = (j + 0.5 + 0.0123456789) / half;
    const double mag = 0.1 + 2.9 * t;
    return i < half ? -mag : mag;
  };
  std::vector<std::pair<double, double>> pts;
  if (va.empty()) {
    pts.emplace_back(0.0, 0.0);
  } else if (va.size() == 1) {
    for (int i = 0; i < 1000; ++i) pts.emplace_back(coord(i, 1000), coord(i, 1000));
  } else {
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 25; ++j) pts.emplace_back(coord(i, 40), coord(j, 25) * 1.0000001);
  }
  int defined = 0;
  for (auto [x, y] : pts) {
    auto ea = eval(a, x, y), eb = eval(b, x, y);
    if (!ea || !eb) continue;
    ++defined;
    if (std::abs(*ea - *eb) > 1e-7 * std::max({1.0, std::abs(*ea), std::abs(*eb)})) return false;
  }
  return defined > 0;
}

}  // namespace cptest
