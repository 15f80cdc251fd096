#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "corpusplay/answer_type.hpp"
#include "corpusplay/corpus.hpp"
#include "corpusplay/templates.hpp"

namespace corpusplay {

enum class InvalidReason { NoObject, SchemaViolation, EmptyBailout, TypeMismatch, UnparseableGold };

inline constexpr int kInvalidReasonCount = 5;
std::string_view to_string(InvalidReason reason) noexcept;

// A generation that did not yield a usable result. This is a value, not a fault.
struct Invalid {
  InvalidReason reason;
  std::string detail;
};

template <class T>
using ParseResult = std::variant<T, Invalid>;

template <class T>
bool is_valid(const ParseResult<T>& r) noexcept {
  return std::holds_alternative<T>(r);
}

struct FormatDecision {
  bool suitable_for_mcq = false;
  bool suitable_for_free_form = false;
  std::optional<AnswerType> best_answer_type;  // set iff free-form
  std::string reason;

  AnswerType task_type() const noexcept { return suitable_for_mcq ? AnswerType::MCQ : *best_answer_type; }

  static FormatDecision mcq(std::string reason = {});
  static FormatDecision free_form(AnswerType type, std::string reason = {});
};

struct Task {
  std::string question;  // what the reasoner sees (MCQ: stem plus options)
  std::string gold;      // canonical per normalize_gold
  AnswerType answer_type = AnswerType::Integer;
  std::string source_doc;
  std::string raw_generation;
};

// The first balanced top-level {...} in `text` that parses as a JSON object.
// Prose and code fences around it are ignored.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

std::string build_format_prompt(const TemplateSet& templates, const Document& doc);
ParseResult<FormatDecision> parse_format_decision(std::string_view generation);

std::string build_task_prompt(const TemplateSet& templates, const Document& doc, const FormatDecision& decision);

// Validity is a pure function of the generation:
//   MCQ: multiple_choice_question is one string holding a stem and exactly
//        four options A) .. D); multiple_choice_correct is one of A-D.
//   Free-form: question is a single string; answer is a scalar; answer_type
//        equals the requested type; the answer normalizes under that type.
//   Empty question or answer strings are the prompts' bail-out.
ParseResult<Task> parse_task(std::string_view generation, const FormatDecision& decision,
                             std::string_view doc_id);

// Renders a task in the generation schema that parse_task accepts.
std::string render_task_json(const Task& task);

}  // namespace corpusplay
