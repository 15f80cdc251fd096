#include "corpusplay/serve.hpp"

#include <httplib.h>

#include "corpusplay/error.hpp"
#include "corpusplay/run_store.hpp"

namespace corpusplay {

struct BatchServer::Impl {
  RunStore store;
  httplib::Server server;
  explicit Impl(std::filesystem::path dir) : store(std::move(dir)) {}
};

BatchServer::BatchServer(std::filesystem::path run_dir) : impl_(std::make_unique<Impl>(std::move(run_dir))) {
  auto* impl = impl_.get();
  impl->server.Get("/batches", [impl](const httplib::Request& req, httplib::Response& res) {
    int from = 1;
    if (req.has_param("from")) {
      try {
        std::size_t used = 0;
        const std::string text = req.get_param_value("from");
        from = std::stoi(text, &used);
        if (used != text.size() || from < 1) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        res.status = 400;
        res.set_content("from must be a positive iteration index\n", "text/plain");
        return;
      }
    }
    const int last = impl->store.last_completed();
    res.set_chunked_content_provider("application/x-ndjson", [impl, from, last](std::size_t offset,
                                                                                  httplib::DataSink& sink) {
      (void)offset;  // called once; everything is written in this call
      for (int t = from; t <= last; ++t) {
        const std::string lines = read_file(impl->store.batch_path(t));
        if (!sink.write(lines.data(), lines.size())) return false;
      }
      sink.done();
      return true;
    });
  });
  impl->server.Get("/metrics", [impl](const httplib::Request&, httplib::Response& res) {
    const auto path = impl->store.metrics_path();
    res.set_content(std::filesystem::exists(path) ? read_file(path) : std::string(), "application/x-ndjson");
  });
}

BatchServer::~BatchServer() { stop(); }

int BatchServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void BatchServer::listen() { impl_->server.listen_after_bind(); }

void BatchServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace corpusplay
