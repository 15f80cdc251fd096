#include "corpusplay/run_store.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "corpusplay/error.hpp"

namespace corpusplay {
namespace fs = std::filesystem;

namespace {

std::string iter_stem(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06d", iteration);
  return buf;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path RunStore::config_path() const { return dir_ / "config.json"; }
fs::path RunStore::metrics_path() const { return dir_ / "metrics.jsonl"; }
fs::path RunStore::batch_path(int iteration) const { return dir_ / "batches" / (iter_stem(iteration) + ".jsonl"); }
fs::path RunStore::manifest_path(int iteration) const {
  return dir_ / "batches" / (iter_stem(iteration) + ".manifest.json");
}

void RunStore::open(const nlohmann::json& config_snapshot, const std::string& hash) {
  fs::create_directories(dir_ / "batches");
  if (fs::exists(config_path())) {
    auto existing = nlohmann::json::parse(read_file(config_path()), nullptr, false);
    if (existing.is_discarded() || !existing.contains("config_hash") || existing["config_hash"] != hash)
      throw ResumeError("run directory " + dir_.string() + " was created with a different configuration");
  } else if (last_completed() > 0) {
    throw ResumeError("run directory " + dir_.string() + " has batches but no config snapshot");
  }
  nlohmann::json snapshot = {{"config", config_snapshot}, {"config_hash", hash}};
  write_file_atomic(config_path(), snapshot.dump(2) + "\n");
}

int RunStore::last_completed() const {
  int k = 0;
  while (fs::exists(manifest_path(k + 1))) ++k;
  return k;
}

nlohmann::ordered_json RunStore::read_manifest(int iteration) const {
  auto j = nlohmann::ordered_json::parse(read_file(manifest_path(iteration)), nullptr, false);
  if (j.is_discarded()) throw ResumeError("corrupt manifest for iteration " + std::to_string(iteration));
  return j;
}

void RunStore::recover(int last) {
  static const std::regex name_re(R"(iter_(\d+)\..*)");
  const fs::path batches = dir_ / "batches";
  if (fs::exists(batches)) {
    std::vector<fs::path> doomed;
    for (const auto& entry : fs::directory_iterator(batches)) {
      const std::string name = entry.path().filename().string();
      std::smatch m;
      const bool temp = entry.path().extension() == ".tmp";
      if (temp || (std::regex_match(name, m, name_re) && std::stoi(m[1].str()) > last)) doomed.push_back(entry.path());
    }
    for (const auto& p : doomed) fs::remove(p);
  }
  std::string metrics;
  for (int t = 1; t <= last; ++t) {
    auto manifest = read_manifest(t);
    nlohmann::ordered_json line;
    line["iter"] = t;
    for (const auto& [k, v] : manifest["metrics"].items()) line[k] = v;
    metrics += line.dump() + "\n";
  }
  write_file_atomic(metrics_path(), metrics);
}

void RunStore::write_iteration(int iteration, const std::string& lines, const nlohmann::ordered_json& manifest) {
  write_file_atomic(batch_path(iteration), lines);
  write_file_atomic(manifest_path(iteration), manifest.dump(2) + "\n");
  nlohmann::ordered_json line;
  line["iter"] = iteration;
  for (const auto& [k, v] : manifest["metrics"].items()) line[k] = v;
  std::ofstream out(metrics_path(), std::ios::app | std::ios::binary);
  out << line.dump() << "\n";
  if (!out) throw Error("cannot append to " + metrics_path().string());
}

}  // namespace corpusplay
