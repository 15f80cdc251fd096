#include "corpusplay/taskgen.hpp"

#include <regex>

#include "corpusplay/verifier.hpp"

namespace corpusplay {

std::string_view to_string(InvalidReason reason) noexcept {
  switch (reason) {
    case InvalidReason::NoObject: return "NoObject";
    case InvalidReason::SchemaViolation: return "SchemaViolation";
    case InvalidReason::EmptyBailout: return "EmptyBailout";
    case InvalidReason::TypeMismatch: return "TypeMismatch";
    case InvalidReason::UnparseableGold: return "UnparseableGold";
  }
  return "?";
}

FormatDecision FormatDecision::mcq(std::string reason) {
  return FormatDecision{true, false, std::nullopt, std::move(reason)};
}

FormatDecision FormatDecision::free_form(AnswerType type, std::string reason) {
  return FormatDecision{false, true, type, std::move(reason)};
}

namespace {

Invalid invalid(InvalidReason r, std::string detail) { return Invalid{r, std::move(detail)}; }

// One past the brace closing the object that opens at `open`, honoring JSON
// string literals; npos if unbalanced.
std::size_t object_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Splits an MCQ block into stem and options. Options are "A)".."D)" markers
// at the start of a line or after whitespace; a trailing "Correct:" line is
// dropped so the reasoner never sees the key.
struct McqLayout {
  std::string text;
  int options = 0;
  bool ordered = false;
  bool has_stem = false;
};

McqLayout layout_mcq(std::string_view block) {
  std::string text(block);
  static const std::regex correct_line(R"((^|\n)[ \t]*Correct[ \t]*:[^\n]*)", std::regex::icase);
  text = std::regex_replace(text, correct_line, "");
  static const std::regex marker(R"((^|\s)\(?([A-Z])\)(?=\s|$))");
  McqLayout out;
  std::string letters;
  std::size_t first_marker = std::string::npos;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), marker); it != std::sregex_iterator(); ++it) {
    letters += (*it)[2].str();
    if (first_marker == std::string::npos) first_marker = static_cast<std::size_t>((*it).position(2));
  }
  out.options = static_cast<int>(letters.size());
  out.ordered = letters == "ABCD";
  out.has_stem = first_marker != std::string::npos && !trimmed(text.substr(0, first_marker)).empty();
  out.text = trimmed(text);
  return out;
}

// The answer field as text, or nullopt if it is not a scalar.
std::optional<std::string> scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number_float()) return v.dump();
  return std::nullopt;
}

}  // namespace

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    std::size_t end = object_end(text, open);
    if (end == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(text.substr(open, end - open), nullptr, /*allow_exceptions=*/false);
    if (j.is_object()) return j;
  }
  return std::nullopt;
}

std::string build_format_prompt(const TemplateSet& templates, const Document& doc) {
  return substitute(templates.format_selection, {{"document", doc.text}});
}

ParseResult<FormatDecision> parse_format_decision(std::string_view generation) {
  auto obj = extract_json_object(generation);
  if (!obj) return invalid(InvalidReason::NoObject, "no JSON object in format decision");
  const auto& j = *obj;
  auto flag = [&](const char* key) -> std::optional<bool> {
    if (!j.contains(key) || !j[key].is_boolean()) return std::nullopt;
    return j[key].get<bool>();
  };
  auto mcq = flag("suitable_for_mcq");
  auto free = flag("suitable_for_free_form");
  if (!mcq || !free) return invalid(InvalidReason::SchemaViolation, "suitability flags must be booleans");
  if (*mcq == *free) return invalid(InvalidReason::SchemaViolation, "exactly one suitability flag must be true");

  FormatDecision d;
  d.suitable_for_mcq = *mcq;
  d.suitable_for_free_form = *free;
  if (j.contains("reason") && j["reason"].is_string()) d.reason = j["reason"].get<std::string>();
  if (*free) {
    if (!j.contains("best_answer_type") || !j["best_answer_type"].is_string())
      return invalid(InvalidReason::SchemaViolation, "free-form decision needs best_answer_type");
    auto type = parse_answer_type(j["best_answer_type"].get<std::string>());
    if (!type || *type == AnswerType::MCQ)
      return invalid(InvalidReason::SchemaViolation,
                     "unsupported answer type: " + j["best_answer_type"].get<std::string>());
    d.best_answer_type = type;
  }
  return d;
}

std::string build_task_prompt(const TemplateSet& templates, const Document& doc, const FormatDecision& decision) {
  if (decision.suitable_for_mcq) return substitute(templates.mcq, {{"text", doc.text}});
  return substitute(templates.free_form,
                    {{"text", doc.text}, {"answer_type", std::string(to_string(*decision.best_answer_type))}});
}

ParseResult<Task> parse_task(std::string_view generation, const FormatDecision& decision,
                             std::string_view doc_id) {
  auto obj = extract_json_object(generation);
  if (!obj) return invalid(InvalidReason::NoObject, "no JSON object in task generation");
  const auto& j = *obj;

  Task task;
  task.source_doc = std::string(doc_id);
  task.raw_generation = std::string(generation);
  task.answer_type = decision.task_type();

  if (decision.suitable_for_mcq) {
    if (!j.contains("multiple_choice_question") || !j.contains("multiple_choice_correct"))
      return invalid(InvalidReason::SchemaViolation, "missing multiple_choice_question/multiple_choice_correct");
    const auto& q = j["multiple_choice_question"];
    const auto& c = j["multiple_choice_correct"];
    if (!q.is_string()) return invalid(InvalidReason::SchemaViolation, "multiple_choice_question must be a string");
    if (!c.is_string()) return invalid(InvalidReason::SchemaViolation, "multiple_choice_correct must be a string");
    if (trimmed(q.get<std::string>()).empty() || trimmed(c.get<std::string>()).empty())
      return invalid(InvalidReason::EmptyBailout, "empty MCQ");
    McqLayout layout = layout_mcq(q.get<std::string>());
    if (layout.options != 4 || !layout.ordered || !layout.has_stem)
      return invalid(InvalidReason::SchemaViolation,
                     "MCQ needs a stem and exactly four options A)-D), found " + std::to_string(layout.options));
    auto gold = normalize_gold(AnswerType::MCQ, c.get<std::string>());
    if (!gold) return invalid(InvalidReason::SchemaViolation, "multiple_choice_correct must be A, B, C or D");
    task.question = layout.text;
    task.gold = *gold;
    return task;
  }

  if (!j.contains("question") || !j.contains("answer"))
    return invalid(InvalidReason::SchemaViolation, "missing question/answer");
  const auto& q = j["question"];
  if (!q.is_string()) return invalid(InvalidReason::SchemaViolation, "question must be a single string");
  auto answer = scalar_text(j["answer"]);
  if (!answer) return invalid(InvalidReason::SchemaViolation, "answer must be a plain value, not a list or object");
  if (trimmed(q.get<std::string>()).empty() || trimmed(*answer).empty())
    return invalid(InvalidReason::EmptyBailout, "empty question or answer");
  if (!j.contains("answer_type") || !j["answer_type"].is_string())
    return invalid(InvalidReason::TypeMismatch, "answer_type missing");
  const std::string requested(to_string(task.answer_type));
  if (j["answer_type"].get<std::string>() != requested)
    return invalid(InvalidReason::TypeMismatch,
                   "answer_type " + j["answer_type"].get<std::string>() + " != requested " + requested);
  auto gold = normalize_gold(task.answer_type, *answer);
  if (!gold) return invalid(InvalidReason::UnparseableGold, "answer does not parse as " + requested);
  task.question = trimmed(q.get<std::string>());
  task.gold = *gold;
  return task;
}

std::string render_task_json(const Task& task) {
  nlohmann::json j;
  if (task.answer_type == AnswerType::MCQ) {
    j["multiple_choice_question"] = task.question;
    j["multiple_choice_correct"] = task.gold;
  } else {
    j["question"] = task.question;
    j["answer"] = task.gold;
    j["answer_type"] = std::string(to_string(task.answer_type));
  }
  return j.dump();
}

}  // namespace corpusplay
