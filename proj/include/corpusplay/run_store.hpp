#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace corpusplay {

// Layout of a run directory:
//   config.json                     canonical config snapshot
//   batches/iter_000001.jsonl       trajectories of iteration 1
//   batches/iter_000001.manifest.json
//   metrics.jsonl                   one metrics object per completed iteration
// An iteration is complete once its manifest exists. The batch file is
// renamed into place before the manifest is written.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path config_path() const;
  std::filesystem::path metrics_path() const;
  std::filesystem::path batch_path(int iteration) const;
  std::filesystem::path manifest_path(int iteration) const;

  // Creates the directory or checks that an existing snapshot has the same
  // hash (ResumeError otherwise), then writes the snapshot.
  void open(const nlohmann::json& config_snapshot, const std::string& hash);

  // Highest k such that iterations 1..k all have manifests.
  int last_completed() const;

  // Removes files of iterations after `last` and leftover temporaries, and
  // rewrites metrics.jsonl from the manifests of 1..last.
  void recover(int last);

  void write_iteration(int iteration, const std::string& lines, const nlohmann::ordered_json& manifest);

  nlohmann::ordered_json read_manifest(int iteration) const;

 private:
  std::filesystem::path dir_;
};

// Writes `data` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);
std::string read_file(const std::filesystem::path& path);

}  // namespace corpusplay
