#pragma once

// Deterministic stand-ins for a model, used by tests, simulations and
// offline runs. Every completion is a pure function of
// (policy seed, request seed, prompt, completion index).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpusplay/policy.hpp"
#include "corpusplay/random.hpp"

namespace corpusplay {

// Seed of the RNG behind completion `index` of `req`.
std::uint64_t scripted_completion_seed(std::uint64_t policy_seed, const GenerationRequest& req, int index);

// Replays fixed completions per prompt, cycling when n exceeds the list.
class TablePolicy final : public PolicyClient {
 public:
  explicit TablePolicy(std::map<std::string, std::vector<std::string>> table);
  std::vector<std::string> generate(const GenerationRequest& req) override;

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

struct ChallengerScript {
  double difficulty_lo = 0.5;
  double difficulty_hi = 0.5;
  double invalid_rate = 0.25;     // share of task generations that are malformed
  double mcq_rate = 0.3;          // share of format decisions choosing MCQ
  double expression_rate = 0.2;   // share choosing Expression (rest: Integer)
  double fence_rate = 0.3;        // share of outputs wrapped in prose and fences
  std::uint64_t seed = 0;
};

// Answers format-selection and task-generation prompts with arithmetic
// puzzles grounded on a hash of the document. Each question carries a
// "[difficulty=d]" tag that ScriptedReasoner reads.
class ScriptedChallenger final : public PolicyClient {
 public:
  explicit ScriptedChallenger(ChallengerScript script);
  std::vector<std::string> generate(const GenerationRequest& req) override;

 private:
  std::string format_decision(Rng& rng) const;
  std::string task(Rng& rng, const std::string& prompt) const;

  ChallengerScript script_;
};

struct ReasonerScript {
  double skill = 0.0;
  std::optional<double> accuracy;  // fixed P(correct); overrides skill
  std::uint64_t seed = 0;
};

// Solves ScriptedChallenger puzzles, correctly with probability
// sigmoid(skill - difficulty) (or the fixed accuracy). Prompts it cannot
// read get an answer without a boxed value.
class ScriptedReasoner final : public PolicyClient {
 public:
  explicit ScriptedReasoner(ReasonerScript script);
  std::vector<std::string> generate(const GenerationRequest& req) override;

  double correct_probability(const std::string& prompt) const;

 private:
  ReasonerScript script_;
};

double sigmoid(double x) noexcept;

}  // namespace corpusplay
