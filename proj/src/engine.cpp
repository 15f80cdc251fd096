#include "corpusplay/engine.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "corpusplay/error.hpp"
#include "corpusplay/random.hpp"
#include "corpusplay/run_store.hpp"

namespace corpusplay {
namespace {

constexpr std::uint64_t kChallengerStream = 0xC4A1;
constexpr std::uint64_t kSubsampleStream = 0x5B5A;
constexpr std::uint64_t kReasonerStream = 0x7EA5;

std::uint64_t stream_seed(const EngineConfig& c, int iteration, int slot, std::uint64_t stream) {
  return mix_seed({c.seed, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(slot), stream});
}

// k distinct members of `pool`, uniformly at random.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  pool.resize(k);
  return pool;
}

std::string group_id(int iteration, int slot, Role role) {
  return "t" + std::to_string(iteration) + ":d" + std::to_string(slot) + (role == Role::Challenger ? ":C" : ":R");
}

nlohmann::ordered_json nullable(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

RolloutSettings rollout_settings(const EngineConfig& config) {
  RolloutSettings s;
  s.templates = TemplateSet::from_key(config.template_set);
  s.family = config.template_family;
  s.challenger_temperature = config.temperature_challenger;
  s.reasoner_temperature = config.temperature_reasoner;
  s.challenger_max_tokens = config.max_tokens_challenger;
  s.reasoner_max_tokens = config.max_tokens_reasoner;
  return s;
}

int subsample_valid_count(int pool_size, int pool_valid, int g) {
  if (pool_size <= g) return pool_valid;
  const long long num = 2LL * pool_valid * g + pool_size;
  int v = static_cast<int>(num / (2LL * pool_size));
  if (pool_valid > 0) v = std::max(v, 1);
  v = std::max(v, g - (pool_size - pool_valid));
  return std::min(v, pool_valid);
}

ChallengerPhase challenger_phase(const Document& doc, PolicyClient& challenger, const EngineConfig& config,
                                 const RolloutSettings& settings, int iteration, int slot) {
  ChallengerPhase out;
  out.attempts = generate_attempts(doc, challenger, settings, config.G, config.N,
                                   stream_seed(config, iteration, slot, kChallengerStream));
  std::vector<std::size_t> valid, invalid;
  for (std::size_t i = 0; i < out.attempts.size(); ++i) (out.attempts[i].valid() ? valid : invalid).push_back(i);

  Rng rng = make_rng(stream_seed(config, iteration, slot, kSubsampleStream));
  const int pool = static_cast<int>(out.attempts.size());
  if (pool <= config.G) {
    for (std::size_t i = 0; i < out.attempts.size(); ++i) out.subsample.push_back(i);
  } else {
    const int v = subsample_valid_count(pool, static_cast<int>(valid.size()), config.G);
    out.subsample = choose(valid, static_cast<std::size_t>(v), rng);
    auto rest = choose(invalid, static_cast<std::size_t>(config.G - v), rng);
    out.subsample.insert(out.subsample.end(), rest.begin(), rest.end());
    std::sort(out.subsample.begin(), out.subsample.end());
  }

  std::vector<std::size_t> kept_valid;
  for (auto i : out.subsample)
    if (out.attempts[i].valid()) kept_valid.push_back(i);
  if (!kept_valid.empty()) out.selected = kept_valid[uniform_index(rng, kept_valid.size())];
  return out;
}

GradedGroup reasoner_phase(const Task& task, PolicyClient& reasoner, const EngineConfig& config,
                           const RolloutSettings& settings, int iteration, int slot, std::size_t attempt) {
  const std::uint64_t seed =
      mix_seed({stream_seed(config, iteration, slot, kReasonerStream), static_cast<std::uint64_t>(attempt)});
  return grade_task(task, reasoner, settings, config.G, seed);
}

DocumentOutcome process_document(const Document& doc, const Clients& clients, const EngineConfig& config,
                                 const RolloutSettings& settings, int iteration, int slot) {
  DocumentOutcome out;
  out.doc_id = doc.id;
  ChallengerPhase phase = challenger_phase(doc, *clients.challenger, config, settings, iteration, slot);
  out.attempts = static_cast<int>(phase.attempts.size());
  for (const auto& a : phase.attempts) {
    if (a.valid())
      ++out.attempts_valid;
    else
      ++out.invalid_reasons[static_cast<std::size_t>(a.invalid->reason)];
  }
  out.subsample_size = static_cast<int>(phase.subsample.size());

  for (std::size_t i : phase.subsample) {
    const Attempt& a = phase.attempts[i];
    Trajectory t;
    t.role = Role::Challenger;
    t.prompt = a.prompt;
    t.completion = a.completion;
    t.group_id = group_id(iteration, slot, Role::Challenger);
    t.doc_id = doc.id;
    t.valid = a.valid();
    t.answer_type = a.answer_type;
    t.iteration = iteration;
    if (a.valid()) {
      ++out.subsample_valid;
      GradedGroup group = reasoner_phase(*a.task, *clients.reasoner, config, settings, iteration, slot, i);
      t.reward = challenger_reward(group.stats, config.reward);
      if (phase.selected == i) {
        out.pass_rate = group.stats.pass_rate;
        for (std::size_t k = 0; k < group.completions.size(); ++k) {
          Trajectory r;
          r.role = Role::Reasoner;
          r.prompt = group.prompt;
          r.completion = std::move(group.completions[k]);
          r.reward = reasoner_reward(group.stats.labels[k]);
          r.group_id = group_id(iteration, slot, Role::Reasoner);
          r.doc_id = doc.id;
          r.answer_type = a.task->answer_type;
          r.iteration = iteration;
          out.reasoner.push_back(std::move(r));
        }
      }
    } else {
      t.reward = challenger_reward(std::nullopt, config.reward);
    }
    out.challenger.push_back(std::move(t));
  }
  compute_advantages(out.challenger, Role::Challenger);
  if (!out.reasoner.empty()) compute_advantages(out.reasoner, Role::Reasoner);
  return out;
}

std::size_t IterationBatch::challenger_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.challenger.size();
  return n;
}

std::size_t IterationBatch::reasoner_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.reasoner.size();
  return n;
}

nlohmann::ordered_json trajectory_json(const Trajectory& t) {
  nlohmann::ordered_json j;
  j["iter"] = t.iteration;
  j["role"] = to_string(t.role);
  j["group_id"] = t.group_id;
  j["doc_id"] = t.doc_id;
  j["prompt"] = t.prompt;
  j["completion"] = t.completion;
  j["reward"] = t.reward;
  j["advantage"] = nullable(t.advantage);
  j["valid"] = t.role == Role::Challenger ? nlohmann::ordered_json(t.valid) : nlohmann::ordered_json(nullptr);
  j["answer_type"] = t.answer_type ? nlohmann::ordered_json(to_string(*t.answer_type)) : nlohmann::ordered_json(nullptr);
  return j;
}

std::string batch_lines(const IterationBatch& batch) {
  std::string out;
  for (const auto& d : batch.documents) {
    for (const auto& t : d.challenger) out += trajectory_json(t).dump() + "\n";
    for (const auto& t : d.reasoner) out += trajectory_json(t).dump() + "\n";
  }
  return out;
}

nlohmann::ordered_json iteration_metrics(const IterationBatch& batch) {
  long attempts = 0, valid = 0, sub = 0, sub_valid = 0, tasks = 0;
  double pass_sum = 0, c_sum = 0, r_sum = 0;
  std::size_t c_n = 0, r_n = 0;
  std::vector<long> reasons(kInvalidReasonCount, 0);
  for (const auto& d : batch.documents) {
    attempts += d.attempts;
    valid += d.attempts_valid;
    sub += d.subsample_size;
    sub_valid += d.subsample_valid;
    if (d.pass_rate) {
      ++tasks;
      pass_sum += *d.pass_rate;
    }
    for (const auto& t : d.challenger) c_sum += t.reward, ++c_n;
    for (const auto& t : d.reasoner) r_sum += t.reward, ++r_n;
    for (int k = 0; k < kInvalidReasonCount; ++k) reasons[static_cast<std::size_t>(k)] += d.invalid_reasons[static_cast<std::size_t>(k)];
  }
  nlohmann::ordered_json m;
  m["documents"] = batch.documents.size();
  m["attempts_total"] = attempts;
  m["attempts_valid"] = valid;
  m["valid_rate"] = attempts ? static_cast<double>(valid) / static_cast<double>(attempts) : 0.0;
  m["subsample_total"] = sub;
  m["subsample_valid"] = sub_valid;
  m["tasks"] = tasks;
  m["challenger_trajectories"] = c_n;
  m["reasoner_trajectories"] = r_n;
  m["mean_pass_rate"] = nullable(tasks ? std::optional<double>(pass_sum / static_cast<double>(tasks)) : std::nullopt);
  m["challenger_reward_mean"] = nullable(c_n ? std::optional<double>(c_sum / static_cast<double>(c_n)) : std::nullopt);
  m["reasoner_reward_mean"] = nullable(r_n ? std::optional<double>(r_sum / static_cast<double>(r_n)) : std::nullopt);
  nlohmann::ordered_json inv;
  for (int k = 0; k < kInvalidReasonCount; ++k)
    inv[std::string(to_string(static_cast<InvalidReason>(k)))] = reasons[static_cast<std::size_t>(k)];
  m["invalid_reasons"] = inv;
  return m;
}

IterationBatch run_iteration(const CorpusStore& store, const Clients& clients, const EngineConfig& config,
                             const RolloutSettings& settings, int iteration) {
  const auto docs = store.sample(static_cast<std::size_t>(config.B), static_cast<std::uint64_t>(iteration));
  IterationBatch batch;
  batch.iteration = iteration;
  batch.documents.resize(docs.size());
  std::vector<std::exception_ptr> errors(docs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        batch.documents[i] = process_document(docs[i], clients, config, settings, iteration, static_cast<int>(i));
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

  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw IterationError(iteration, docs[i].id, e.what());
    }
  }
  batch.metrics = iteration_metrics(batch);
  return batch;
}

RunSummary run(const CorpusStore& store, const Clients& clients, const EngineConfig& config,
               const std::filesystem::path& out_dir, const RunOptions& options) {
  config.validate();
  RunStore runs(out_dir);
  const std::string hash = config_hash(config);
  runs.open(config.to_json(), hash);
  RunSummary summary;
  summary.last_completed = runs.last_completed();
  runs.recover(summary.last_completed);
  const RolloutSettings settings = rollout_settings(config);

  for (int t = summary.last_completed + 1; t <= config.T; ++t) {
    if ((options.stop_flag && options.stop_flag->load()) ||
        (options.stop_after && summary.iterations_run >= *options.stop_after)) {
      summary.stopped_early = true;
      break;
    }
    IterationBatch batch = run_iteration(store, clients, config, settings, t);
    const std::string lines = batch_lines(batch);
    nlohmann::ordered_json manifest;
    manifest["iter"] = t;
    manifest["config_hash"] = hash;
    manifest["challenger_trajectories"] = batch.challenger_count();
    manifest["reasoner_trajectories"] = batch.reasoner_count();
    manifest["batch_file"] = runs.batch_path(t).filename().string();
    manifest["batch_sha256"] = sha256_hex(lines);
    manifest["metrics"] = batch.metrics;
    runs.write_iteration(t, lines, manifest);
    if (summary.first_iteration == 0) summary.first_iteration = t;
    ++summary.iterations_run;
    summary.last_completed = t;
    if (options.on_iteration) options.on_iteration(batch);
  }
  return summary;
}

}  // namespace corpusplay
