#include "corpusplay/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "corpusplay/error.hpp"
#include "corpusplay/random.hpp"
#include "corpusplay/scripted.hpp"

namespace corpusplay {

CrossplayReport crossplay(PolicyClient& challenger, PolicyClient& reasoner, const CorpusStore& store,
                          const CrossplayConfig& config) {
  if (config.n_docs < 1 || config.attempts_per_doc < 1 || config.G < 1 || config.concurrency < 1)
    throw ConfigError("crossplay needs n_docs, attempts_per_doc, G and concurrency >= 1");
  const auto docs = store.sample(static_cast<std::size_t>(config.n_docs), 0);
  std::vector<std::optional<CrossplayRecord>> slots(docs.size());
  std::vector<std::exception_ptr> errors(docs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        const std::uint64_t base = mix_seed({config.seed, static_cast<std::uint64_t>(i)});
        auto attempts =
            generate_attempts(docs[i], challenger, config.settings, 1, config.attempts_per_doc, mix_seed({base, 1}));
        auto it = std::find_if(attempts.begin(), attempts.end(), [](const Attempt& a) { return a.valid(); });
        if (it == attempts.end()) continue;
        auto group = grade_task(*it->task, reasoner, config.settings, config.G, mix_seed({base, 2}));
        slots[i] = CrossplayRecord{docs[i].id, group.stats.pass_rate, it->task->answer_type, it->task->question};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), docs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  CrossplayReport report;
  report.challenger_id = config.challenger_id;
  report.reasoner_id = config.reasoner_id;
  report.documents_used = static_cast<int>(docs.size());
  double sum = 0;
  for (auto& s : slots) {
    if (!s) {
      ++report.documents_without_task;
      continue;
    }
    sum += s->pass_rate;
    report.records.push_back(std::move(*s));
  }
  if (report.records.empty()) throw Error("crossplay: no document produced a valid task");
  report.pass_rate = sum / static_cast<double>(report.records.size());
  return report;
}

void write_crossplay_csv(std::ostream& out, const CrossplayReport& report) {
  out << "doc_id,pass_rate,answer_type\n";
  for (const auto& r : report.records) {
    std::string id = r.doc_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    out << id << ',' << r.pass_rate << ',' << to_string(r.answer_type) << '\n';
  }
}

void SimConfig::validate() const {
  if (steps < 1) throw ConfigError("simulation steps must be >= 1");
  if (K < 1) throw ConfigError("simulation K must be >= 1");
  if (grid_points < 1) throw ConfigError("difficulty grid needs at least one point");
  if (!(grid_lo >= 0.0 && grid_hi <= 1.0 && grid_lo <= grid_hi))
    throw ConfigError("difficulty grid must lie within [0, 1]");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (freeze_at && (*freeze_at < 0 || *freeze_at >= steps)) throw ConfigError("freeze_at must lie in [0, steps)");
  reward.validate();
}

double expected_reward(double p, int K, const RewardConfig& reward) {
  double total = 0.0;
  double choose = 1.0;  // C(K, k)
  for (int k = 0; k <= K; ++k) {
    if (k > 0) choose = choose * (K - k + 1) / k;
    const double prob = choose * std::pow(p, k) * std::pow(1.0 - p, K - k);
    total += prob * scheme_reward(static_cast<double>(k) / K, reward);
  }
  return total;
}

double best_difficulty(double skill, const SimConfig& config) {
  double best_d = config.grid_lo;
  double best_r = -INFINITY;
  for (int i = 0; i < config.grid_points; ++i) {
    const double d = config.grid_points == 1
                         ? config.grid_lo
                         : config.grid_lo + (config.grid_hi - config.grid_lo) * i / (config.grid_points - 1);
    const double r = expected_reward(sigmoid(skill - d), config.K, config.reward);
    if (r > best_r) {
      best_r = r;
      best_d = d;
    }
  }
  return best_d;
}

std::vector<SimStep> simulate_coevolution(const SimConfig& config) {
  config.validate();
  Rng rng = make_rng(mix_seed({config.seed, 0x51AE}));
  std::vector<SimStep> series;
  series.reserve(static_cast<std::size_t>(config.steps));
  double skill = config.initial_skill;
  std::optional<double> frozen;
  for (int step = 0; step < config.steps; ++step) {
    if (config.freeze_at && step == *config.freeze_at) frozen = skill;
    SimStep s;
    s.step = step;
    s.skill = skill;
    s.difficulty = best_difficulty(skill, config);
    s.expected_pass = sigmoid(skill - s.difficulty);
    int correct = 0;
    for (int k = 0; k < config.K; ++k) correct += bernoulli(rng, s.expected_pass) ? 1 : 0;
    s.pass_rate = static_cast<double>(correct) / config.K;
    s.reward = scheme_reward(s.pass_rate, config.reward);
    if (frozen) s.frozen_pass = sigmoid(*frozen - s.difficulty);
    skill += config.learning_rate * s.pass_rate * (1.0 - s.pass_rate);
    series.push_back(s);
  }
  return series;
}

void write_simulation_csv(std::ostream& out, const std::vector<SimStep>& series) {
  out << "step,difficulty,pass_rate,skill,reward\n";
  for (const auto& s : series)
    out << s.step << ',' << s.difficulty << ',' << s.pass_rate << ',' << s.skill << ',' << s.reward << '\n';
}

long long mann_kendall_s(const std::vector<double>& xs) {
  long long s = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) s += (xs[j] > xs[i]) - (xs[j] < xs[i]);
  return s;
}

}  // namespace corpusplay
