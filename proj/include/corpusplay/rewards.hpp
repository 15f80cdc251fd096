#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpusplay/answer_type.hpp"

namespace corpusplay {

enum class Role { Challenger, Reasoner };
std::string_view to_string(Role role) noexcept;

enum class RewardScheme { Variance, AbsoluteZero, Threshold, RZero };
std::string_view to_string(RewardScheme scheme) noexcept;
// "variance", "absolute_zero", "threshold", "rzero" (case-insensitive; '-'
// and '_' interchangeable). Throws ConfigError otherwise.
RewardScheme parse_reward_scheme(std::string_view name);

struct RewardConfig {
  RewardScheme scheme = RewardScheme::Variance;
  double sigma2_opt = 0.25;  // target label variance
  double tau = 0.01;         // Gaussian width: exp(-(var - sigma2_opt)^2 / (2 tau))
  double rho = -0.1;         // penalty for invalid challenger generations

  void validate() const;  // throws ConfigError
};

// Pass-rate statistics of one group of binary correctness labels.
struct GroupStats {
  std::vector<int> labels;
  double pass_rate = 0.0;
  double variance = 0.0;  // population form p(1 - p)

  static GroupStats from_labels(std::span<const int> labels);
};

// Reward for a valid task at pass rate p under cfg.scheme.
double scheme_reward(double pass_rate, const RewardConfig& cfg);

// nullopt stats mean the challenger generation was invalid: reward rho.
double challenger_reward(const std::optional<GroupStats>& stats, const RewardConfig& cfg);

inline double reasoner_reward(int label) { return label ? 1.0 : 0.0; }

// One role-tagged record of the trainer hand-off.
struct Trajectory {
  Role role = Role::Reasoner;
  std::string prompt;
  std::string completion;
  double reward = 0.0;
  std::optional<double> advantage;  // set by compute_advantages only
  std::string group_id;
  std::string doc_id;
  bool valid = true;  // meaningful for challenger trajectories
  std::optional<AnswerType> answer_type;
  int iteration = 0;
};

// Mean-centered advantages without std normalization: A_i = r_i - mean(r).
// Throws std::invalid_argument on an empty group or mixed roles/group ids.
void compute_advantages(std::span<Trajectory> group, Role role);

}  // namespace corpusplay
