#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "corpusplay/corpus.hpp"
#include "corpusplay/rewards.hpp"
#include "corpusplay/rollout.hpp"

namespace corpusplay {

// ------------------------------------------------------------- crossplay

struct CrossplayConfig {
  std::string challenger_id = "challenger";
  std::string reasoner_id = "reasoner";
  int n_docs = 128;
  int attempts_per_doc = 128;
  int G = 8;
  std::uint64_t seed = 0;
  int concurrency = 32;
  RolloutSettings settings;
};

struct CrossplayRecord {
  std::string doc_id;
  double pass_rate = 0.0;
  AnswerType answer_type = AnswerType::Integer;
  std::string question;
};

struct CrossplayReport {
  std::string challenger_id;
  std::string reasoner_id;
  int documents_used = 0;
  int documents_without_task = 0;
  double pass_rate = 0.0;  // mean of the per-task rates
  std::vector<CrossplayRecord> records;
};

// One task per document (the first valid attempt), graded with G reasoner
// samples. Documents are store.sample(n_docs, 0). Throws Error when no
// document yields a valid task.
CrossplayReport crossplay(PolicyClient& challenger, PolicyClient& reasoner, const CorpusStore& store,
                          const CrossplayConfig& config);

// doc_id,pass_rate,answer_type
void write_crossplay_csv(std::ostream& out, const CrossplayReport& report);

// ------------------------------------------------------------- simulator

struct SimConfig {
  int steps = 2000;
  RewardConfig reward;
  double learning_rate = 0.0005;
  double initial_skill = 0.0;
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  int grid_points = 101;
  int K = 8;  // reasoner samples per task
  std::uint64_t seed = 0;
  std::optional<int> freeze_at;  // step at which a frozen copy of the skill is taken

  void validate() const;  // throws ConfigError
};

struct SimStep {
  int step = 0;
  double difficulty = 0.0;
  double pass_rate = 0.0;      // realized k/K
  double expected_pass = 0.0;  // sigmoid(skill - difficulty)
  double skill = 0.0;          // before this step's update
  double reward = 0.0;         // challenger reward at the realized pass rate
  std::optional<double> frozen_pass;  // sigmoid(frozen skill - difficulty), from freeze_at on
};

// Expected challenger reward of a task whose K labels are Bernoulli(p).
double expected_reward(double p, int K, const RewardConfig& reward);

// Grid difficulty maximizing expected_reward at p = sigmoid(skill - d);
// ties go to the lowest difficulty.
double best_difficulty(double skill, const SimConfig& config);

std::vector<SimStep> simulate_coevolution(const SimConfig& config);

// step,difficulty,pass_rate,skill,reward
void write_simulation_csv(std::ostream& out, const std::vector<SimStep>& series);

// Mann-Kendall S = sum over i<j of sign(x_j - x_i).
long long mann_kendall_s(const std::vector<double>& xs);

}  // namespace corpusplay
