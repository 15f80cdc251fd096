#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusplay/config.hpp"
#include "corpusplay/corpus.hpp"
#include "corpusplay/rollout.hpp"

namespace corpusplay {

RolloutSettings rollout_settings(const EngineConfig& config);

// Number of valid members kept when `pool_size` attempts with `pool_valid`
// valid ones are reduced to `g`: round-half-up of pool_valid * g / pool_size,
// at least one when any attempt is valid. Pools of at most g are kept whole.
int subsample_valid_count(int pool_size, int pool_valid, int g);

struct ChallengerPhase {
  std::vector<Attempt> attempts;
  std::vector<std::size_t> subsample;  // attempt indices, ascending
  std::optional<std::size_t> selected;  // attempt index of the chosen task
};

// Attempt loop for one document, ratio-preserving subsample of G and uniform
// choice of one valid task from it.
ChallengerPhase challenger_phase(const Document& doc, PolicyClient& challenger, const EngineConfig& config,
                                 const RolloutSettings& settings, int iteration, int slot);

// G reasoner completions for `task`, graded. The labels give the challenger
// reward and the completions form the reasoner group.
GradedGroup reasoner_phase(const Task& task, PolicyClient& reasoner, const EngineConfig& config,
                           const RolloutSettings& settings, int iteration, int slot, std::size_t attempt);

// Everything one document contributes to an iteration.
struct DocumentOutcome {
  std::string doc_id;
  std::vector<Trajectory> challenger;  // one group, advantages filled
  std::vector<Trajectory> reasoner;    // empty or exactly G, advantages filled
  int attempts = 0;
  int attempts_valid = 0;
  int subsample_size = 0;
  int subsample_valid = 0;
  std::optional<double> pass_rate;  // of the selected task
  std::vector<int> invalid_reasons = std::vector<int>(kInvalidReasonCount, 0);
};

DocumentOutcome process_document(const Document& doc, const Clients& clients, const EngineConfig& config,
                                 const RolloutSettings& settings, int iteration, int slot);

struct IterationBatch {
  int iteration = 0;
  std::vector<DocumentOutcome> documents;  // in slot order
  nlohmann::ordered_json metrics;

  std::size_t challenger_count() const;
  std::size_t reasoner_count() const;
};

nlohmann::ordered_json trajectory_json(const Trajectory& t);

// Batch file contents: for each slot, its challenger group then its
// reasoner group, one JSON object per line.
std::string batch_lines(const IterationBatch& batch);

nlohmann::ordered_json iteration_metrics(const IterationBatch& batch);

// Samples B documents (call index = iteration) and processes them on up to
// `concurrency` threads. Throws IterationError on any failure.
IterationBatch run_iteration(const CorpusStore& store, const Clients& clients, const EngineConfig& config,
                             const RolloutSettings& settings, int iteration);

struct RunOptions {
  std::optional<int> stop_after;                    // iterations to run in this call
  const std::atomic<bool>* stop_flag = nullptr;     // checked between iterations
  std::function<void(const IterationBatch&)> on_iteration;
};

struct RunSummary {
  int first_iteration = 0;  // first iteration run by this call (0 if none)
  int last_completed = 0;   // highest completed iteration on disk
  int iterations_run = 0;
  bool stopped_early = false;
};

// Runs iterations last_completed+1 .. T into `out_dir`, resuming an existing
// run directory when its config hash matches.
RunSummary run(const CorpusStore& store, const Clients& clients, const EngineConfig& config,
               const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace corpusplay
