#include "corpusplay/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "corpusplay/error.hpp"

namespace corpusplay {

std::string_view to_string(Role role) noexcept {
  return role == Role::Challenger ? "challenger" : "reasoner";
}

std::string_view to_string(RewardScheme scheme) noexcept {
  switch (scheme) {
    case RewardScheme::Variance: return "variance";
    case RewardScheme::AbsoluteZero: return "absolute_zero";
    case RewardScheme::Threshold: return "threshold";
    case RewardScheme::RZero: return "rzero";
  }
  return "?";
}

RewardScheme parse_reward_scheme(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "variance") return RewardScheme::Variance;
  if (key == "absolutezero") return RewardScheme::AbsoluteZero;
  if (key == "threshold") return RewardScheme::Threshold;
  if (key == "rzero") return RewardScheme::RZero;
  throw ConfigError("unknown reward scheme: " + std::string(name));
}

void RewardConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("reward.tau must be positive");
  if (!(sigma2_opt > 0.0 && sigma2_opt <= 0.25)) throw ConfigError("reward.sigma2_opt must lie in (0, 0.25]");
  if (!std::isfinite(rho)) throw ConfigError("reward.rho must be finite");
}

GroupStats GroupStats::from_labels(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("GroupStats needs at least one label");
  GroupStats s;
  s.labels.reserve(labels.size());
  int correct = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("labels must be 0 or 1");
    s.labels.push_back(l);
    correct += l;
  }
  s.pass_rate = static_cast<double>(correct) / static_cast<double>(labels.size());
  s.variance = s.pass_rate * (1.0 - s.pass_rate);
  return s;
}

double scheme_reward(double p, const RewardConfig& cfg) {
  const bool solvable = p > 0.0 && p < 1.0;
  switch (cfg.scheme) {
    case RewardScheme::Variance: {
      double d = p * (1.0 - p) - cfg.sigma2_opt;
      return std::exp(-(d * d) / (2.0 * cfg.tau));
    }
    case RewardScheme::AbsoluteZero: return solvable ? 1.0 - p : 0.0;
    case RewardScheme::Threshold: return solvable ? 1.0 : 0.0;
    case RewardScheme::RZero: return 1.0 - 2.0 * std::abs(p - 0.5);
  }
  return 0.0;
}

double challenger_reward(const std::optional<GroupStats>& stats, const RewardConfig& cfg) {
  if (!stats) return cfg.rho;
  return scheme_reward(stats->pass_rate, cfg);
}

void compute_advantages(std::span<Trajectory> group, Role role) {
  if (group.empty()) throw std::invalid_argument("advantage group is empty");
  const std::string& gid = group.front().group_id;
  double sum = 0.0;
  for (const auto& t : group) {
    if (t.role != role) throw std::invalid_argument("advantage group mixes roles");
    if (t.group_id != gid) throw std::invalid_argument("advantage group mixes group ids");
    sum += t.reward;
  }
  const double mean = sum / static_cast<double>(group.size());
  for (auto& t : group) t.advantage = t.reward - mean;
}

}  // namespace corpusplay
