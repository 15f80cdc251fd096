#include "corpusplay/verifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "corpusplay/expr.hpp"

namespace corpusplay {

std::string_view to_string(AnswerType type) noexcept {
  switch (type) {
    case AnswerType::MCQ: return "MCQ";
    case AnswerType::Integer: return "Integer";
    case AnswerType::Float: return "Float";
    case AnswerType::Expression: return "Expression";
    case AnswerType::String: return "String";
    case AnswerType::Boolean: return "Boolean";
  }
  return "?";
}

std::optional<AnswerType> parse_answer_type(std::string_view name) noexcept {
  for (auto t : {AnswerType::MCQ, AnswerType::Integer, AnswerType::Float, AnswerType::Expression,
                 AnswerType::String, AnswerType::Boolean}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Index one past the brace that closes the group opened at `open`, or npos.
std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

// Replaces \text{X} and friends with X, and drops math delimiters.
std::string unwrap(std::string_view in) {
  std::string s(trim(in));
  static constexpr std::string_view kWrappers[] = {"\\text", "\\textbf", "\\textit", "\\mathrm",
                                                   "\\mathbf", "\\mbox", "\\operatorname"};
  for (bool changed = true; changed;) {
    changed = false;
    for (auto w : kWrappers) {
      std::size_t pos = 0;
      while ((pos = s.find(w, pos)) != std::string::npos) {
        std::size_t brace = pos + w.size();
        while (brace < s.size() && s[brace] == ' ') ++brace;
        // Skip longer command names that share the prefix (\textbf vs \text).
        if (brace >= s.size() || s[brace] != '{') {
          pos += w.size();
          continue;
        }
        std::size_t close = match_brace(s, brace);
        if (close == std::string::npos) break;
        s = s.substr(0, pos) + s.substr(brace + 1, close - brace - 2) + s.substr(close);
        changed = true;
      }
    }
  }
  std::string_view v = trim(s);
  for (bool stripped = true; stripped && v.size() >= 2;) {
    stripped = false;
    auto strip = [&](std::string_view open, std::string_view close) {
      if (v.size() >= open.size() + close.size() && v.starts_with(open) && v.ends_with(close)) {
        v = trim(v.substr(open.size(), v.size() - open.size() - close.size()));
        stripped = true;
      }
    };
    strip("$$", "$$");
    if (!stripped) strip("$", "$");
    if (!stripped) strip("\\(", "\\)");
    if (!stripped) strip("\\[", "\\]");
  }
  return std::string(v);
}

struct Numeric {
  std::optional<expr::Rational> exact;
  double approx = 0.0;
};

std::optional<Numeric> numeric_from(std::string_view text) {
  try {
    expr::Node n = expr::parse_expression(text);
    if (!expr::variables(n).empty()) return std::nullopt;
    auto v = expr::evaluate(n, {});
    if (!v) return std::nullopt;
    return Numeric{expr::evaluate_exact(n), *v};
  } catch (const expr::ParseError&) {
    return std::nullopt;
  }
}

std::optional<Numeric> parse_numeric(std::string_view raw) {
  std::string s = unwrap(raw);
  std::string_view v = trim(s);
  while (!v.empty() && v.back() == '.') v = trim(v.substr(0, v.size() - 1));
  if (v.empty()) return std::nullopt;
  if (auto n = numeric_from(v)) return n;
  // A trailing unit word or percent sign: "149,600,000 km", "42 %".
  std::size_t last = v.find_last_of("0123456789)}");
  if (last == std::string_view::npos || last + 1 >= v.size()) return std::nullopt;
  std::string_view suffix = v.substr(last + 1);
  bool unit_like = std::all_of(suffix.begin(), suffix.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '%' || c == '.' || c == '/' || is_space(c);
  });
  if (!unit_like) return std::nullopt;
  return numeric_from(v.substr(0, last + 1));
}

std::optional<long double> integer_value(const Numeric& n) {
  if (n.exact) {
    if (!n.exact->is_integer()) return std::nullopt;
    return static_cast<long double>(n.exact->num);
  }
  if (!std::isfinite(n.approx) || std::floor(n.approx) != n.approx) return std::nullopt;
  return static_cast<long double>(n.approx);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::optional<char> gold_letter(std::string_view raw) {
  std::string s = unwrap(raw);
  std::string_view v = trim(s);
  if (v.size() >= 3 && v.front() == '(' && v[2] == ')') v = v.substr(1, 1);
  while (!v.empty() && (v.back() == ')' || v.back() == '.')) v.remove_suffix(1);
  v = trim(v);
  if (v.size() != 1) return std::nullopt;
  char c = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
  if (c < 'A' || c > 'D') return std::nullopt;
  return c;
}

std::optional<char> candidate_letter(std::string_view raw) {
  std::string s = unwrap(raw);
  std::string_view v = trim(s);
  if (!v.empty() && (v.front() == '(' || v.front() == '[')) v.remove_prefix(1);
  if (v.empty()) return std::nullopt;
  char first = v[0];
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(first)));
  if (up < 'A' || up > 'D') return std::nullopt;
  if (v.size() == 1) return up;
  char next = v[1];
  bool separated = next == ')' || next == ']' || next == '.' || next == ':' || next == ',' || is_space(next);
  if (!separated) return std::nullopt;
  // A lowercase letter followed by a space reads as prose ("a ..."), not an option.
  if (first != up && next != ')' && next != ']') return std::nullopt;
  return up;
}

std::optional<bool> parse_boolean(std::string_view raw) {
  std::string n = normalize_string_answer(raw);
  if (n == "true") return true;
  if (n == "false") return false;
  return std::nullopt;
}

// Drops a "y =" prefix when the left side is a lone variable.
std::string_view expression_body(std::string_view v) {
  std::size_t eq = v.find('=');
  if (eq == std::string_view::npos || v.find('=', eq + 1) != std::string_view::npos) return v;
  try {
    expr::Node lhs = expr::parse_expression(v.substr(0, eq));
    if (lhs.kind == expr::Kind::Variable) return trim(v.substr(eq + 1));
  } catch (const expr::ParseError&) {
  }
  return v;
}

std::optional<expr::Node> parse_expression_answer(std::string_view raw) {
  std::string s = unwrap(raw);
  try {
    return expr::parse_expression(expression_body(trim(s)));
  } catch (const expr::ParseError&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<ExtractedAnswer> extract_boxed(std::string_view completion) {
  static constexpr std::string_view kTag = "\\boxed";
  std::vector<std::size_t> starts;
  for (std::size_t pos = completion.find(kTag); pos != std::string_view::npos;
       pos = completion.find(kTag, pos + 1))
    starts.push_back(pos);
  for (auto it = starts.rbegin(); it != starts.rend(); ++it) {
    std::size_t brace = *it + kTag.size();
    while (brace < completion.size() && completion[brace] == ' ') ++brace;
    if (brace >= completion.size() || completion[brace] != '{') continue;
    std::size_t close = match_brace(completion, brace);
    if (close == std::string_view::npos) continue;
    ExtractedAnswer out;
    out.begin = brace + 1;
    out.end = close - 1;
    out.raw = std::string(completion.substr(out.begin, out.end - out.begin));
    return out;
  }
  return std::nullopt;
}

std::string normalize_string_answer(std::string_view raw) {
  std::string s = unwrap(raw);
  std::string_view v = trim(s);
  auto strip_quotes = [&] {
    static constexpr std::pair<std::string_view, std::string_view> kQuotes[] = {
        {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}};
    for (auto [open, close] : kQuotes) {
      if (v.size() >= open.size() + close.size() && v.starts_with(open) && v.ends_with(close)) {
        v = trim(v.substr(open.size(), v.size() - open.size() - close.size()));
        return true;
      }
    }
    return false;
  };
  while (strip_quotes()) {
  }
  std::string out;
  bool pending_space = false;
  for (unsigned char c : v) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';' || out.back() == ':' ||
                          out.back() == '!' || out.back() == '?' || out.back() == ' '))
    out.pop_back();
  return out;
}

std::optional<std::string> normalize_gold(AnswerType type, std::string_view gold) {
  switch (type) {
    case AnswerType::MCQ: {
      auto letter = gold_letter(gold);
      if (!letter) return std::nullopt;
      return std::string(1, *letter);
    }
    case AnswerType::Integer: {
      auto n = parse_numeric(gold);
      if (!n) return std::nullopt;
      auto iv = integer_value(*n);
      if (!iv) return std::nullopt;
      if (n->exact) return std::to_string(n->exact->num);
      return format_double(n->approx);
    }
    case AnswerType::Float: {
      auto n = parse_numeric(gold);
      if (!n) return std::nullopt;
      return format_double(n->approx);
    }
    case AnswerType::Expression: {
      if (!parse_expression_answer(gold)) return std::nullopt;
      return std::string(trim(gold));
    }
    case AnswerType::String: {
      if (normalize_string_answer(gold).empty()) return std::nullopt;
      return std::string(trim(gold));
    }
    case AnswerType::Boolean: {
      auto b = parse_boolean(gold);
      if (!b) return std::nullopt;
      return *b ? "true" : "false";
    }
  }
  return std::nullopt;
}

bool equivalent(std::string_view gold, std::string_view candidate, AnswerType type) {
  switch (type) {
    case AnswerType::MCQ: {
      auto g = gold_letter(gold);
      auto c = candidate_letter(candidate);
      return g && c && *g == *c;
    }
    case AnswerType::Integer: {
      auto g = parse_numeric(gold);
      auto c = parse_numeric(candidate);
      if (!g || !c) return false;
      auto gi = integer_value(*g);
      auto ci = integer_value(*c);
      if (!gi || !ci) return false;
      if (g->exact && c->exact) return *g->exact == *c->exact;
      return *gi == *ci;
    }
    case AnswerType::Float: {
      auto g = parse_numeric(gold);
      auto c = parse_numeric(candidate);
      if (!g || !c) return false;
      double a = g->approx, b = c->approx;
      return std::abs(a - b) <= std::max(1e-9, 1e-6 * std::max(std::abs(a), std::abs(b)));
    }
    case AnswerType::Expression: {
      auto g = parse_expression_answer(gold);
      auto c = parse_expression_answer(candidate);
      return g && c && expr::expr_equivalent(*g, *c);
    }
    case AnswerType::String: {
      std::string g = normalize_string_answer(gold);
      return !g.empty() && g == normalize_string_answer(candidate);
    }
    case AnswerType::Boolean: {
      auto g = parse_boolean(gold);
      auto c = parse_boolean(candidate);
      return g && c && *g == *c;
    }
  }
  return false;
}

int grade_completion(std::string_view completion, std::string_view gold, AnswerType type) {
  auto boxed = extract_boxed(completion);
  if (!boxed) return 0;
  return equivalent(gold, boxed->raw, type) ? 1 : 0;
}

}  // namespace corpusplay
