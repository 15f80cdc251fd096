#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace corpusplay {

// HTTP access to a run directory for an external trainer:
//   GET /batches?from=ITER  batch lines of completed iterations >= ITER, in order
//   GET /metrics            the metrics log
class BatchServer {
 public:
  explicit BatchServer(std::filesystem::path run_dir);
  ~BatchServer();
  BatchServer(const BatchServer&) = delete;
  BatchServer& operator=(const BatchServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace corpusplay
