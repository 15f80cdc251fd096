#pragma once

// The attempt loop and reasoner grading shared by the engine and crossplay.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corpusplay/corpus.hpp"
#include "corpusplay/policy.hpp"
#include "corpusplay/rewards.hpp"
#include "corpusplay/taskgen.hpp"
#include "corpusplay/templates.hpp"

namespace corpusplay {

struct RolloutSettings {
  TemplateSet templates = TemplateSet::builtin();
  TemplateFamily family = TemplateFamily::Qwen3;
  double challenger_temperature = 1.0;
  double reasoner_temperature = 1.0;
  int challenger_max_tokens = 4096;
  int reasoner_max_tokens = 4096;
};

// One format-selection plus task-generation attempt. An attempt whose format
// decision does not parse is invalid and records the format exchange.
struct Attempt {
  std::string prompt;
  std::string completion;
  std::optional<AnswerType> answer_type;  // from the format decision, if any
  std::optional<Task> task;
  std::optional<Invalid> invalid;

  bool valid() const noexcept { return task.has_value(); }
};

// Runs attempts until one is valid, after first issuing a batch of
// min(min_pool, max_attempts) attempts, or until max_attempts are spent.
// Request seeds derive from `seed`.
std::vector<Attempt> generate_attempts(const Document& doc, PolicyClient& challenger,
                                       const RolloutSettings& settings, int min_pool, int max_attempts,
                                       std::uint64_t seed);

struct GradedGroup {
  std::string prompt;
  std::vector<std::string> completions;
  GroupStats stats;
};

// Samples `g` reasoner completions for `task` and labels each.
GradedGroup grade_task(const Task& task, PolicyClient& reasoner, const RolloutSettings& settings, int g,
                       std::uint64_t seed);

}  // namespace corpusplay
