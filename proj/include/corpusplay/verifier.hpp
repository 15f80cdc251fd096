#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "corpusplay/answer_type.hpp"

namespace corpusplay {

struct ExtractedAnswer {
  std::string raw;          // payload between the braces
  std::size_t begin = 0;    // byte offset of the payload in the completion
  std::size_t end = 0;      // one past the payload

  friend bool operator==(const ExtractedAnswer&, const ExtractedAnswer&) = default;
};

// The last balanced \boxed{...} in the completion. `\{` and `\}` inside the
// payload do not count toward balance. Total over arbitrary bytes.
std::optional<ExtractedAnswer> extract_boxed(std::string_view completion);

// Canonical gold text for `type`, or nullopt if `gold` is not a valid
// answer of that type (Integer golds must be whole numbers; MCQ golds a
// letter A-D; Boolean golds true/false).
std::optional<std::string> normalize_gold(AnswerType type, std::string_view gold);

// Typed answer equivalence:
//   Integer     exact integer equality after numeric normalization
//   Float       |a - b| <= max(1e-9, 1e-6 * max(|a|, |b|))
//   Expression  randomized-evaluation equivalence (expr::compare)
//   String      equality after trim, case-fold, whitespace collapse and
//               trailing-punctuation removal
//   Boolean     true/false, case-insensitive
//   MCQ         the candidate's leading option letter equals the gold letter
// An unparseable candidate (or an invalid gold) is simply not equivalent.
bool equivalent(std::string_view gold, std::string_view candidate, AnswerType type);

// 1 when the completion's last boxed answer matches the gold, else 0.
int grade_completion(std::string_view completion, std::string_view gold, AnswerType type);

// Normalization used for String answers; exposed for auditing.
std::string normalize_string_answer(std::string_view s);

}  // namespace corpusplay
