#pragma once

#include <optional>
#include <string_view>

namespace corpusplay {

enum class AnswerType { MCQ, Integer, Float, Expression, String, Boolean };

std::string_view to_string(AnswerType type) noexcept;

// Accepts the canonical spellings ("MCQ", "Integer", ...); case-sensitive.
std::optional<AnswerType> parse_answer_type(std::string_view name) noexcept;

}  // namespace corpusplay
