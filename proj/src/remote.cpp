#include "corpusplay/remote.hpp"

#include <algorithm>
#include <set>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "corpusplay/error.hpp"

namespace corpusplay {
namespace {

template <class T>
void read_field(const nlohmann::json& spec, const char* key, T& out) {
  if (!spec.contains(key)) return;
  try {
    out = spec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("policy field '") + key + "' has the wrong type");
  }
}

}  // namespace

RemoteConfig RemoteConfig::from_json(const nlohmann::json& spec) {
  static const std::set<std::string> known = {"kind",       "base_url",      "model",
                                              "api_key_env", "timeout_s",    "max_attempts",
                                              "initial_backoff_s", "max_backoff_s", "max_in_flight"};
  for (const auto& [key, _] : spec.items())
    if (!known.count(key)) throw ConfigError("unknown remote policy field: " + key);
  RemoteConfig c;
  read_field(spec, "base_url", c.base_url);
  read_field(spec, "model", c.model);
  read_field(spec, "api_key_env", c.api_key_env);
  read_field(spec, "timeout_s", c.timeout_s);
  read_field(spec, "max_attempts", c.max_attempts);
  read_field(spec, "initial_backoff_s", c.initial_backoff_s);
  read_field(spec, "max_backoff_s", c.max_backoff_s);
  read_field(spec, "max_in_flight", c.max_in_flight);
  c.validate();
  return c;
}

void RemoteConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    throw ConfigError("remote base_url must start with http:// or https://");
  if (model.empty()) throw ConfigError("remote model name is empty");
  if (!(timeout_s > 0)) throw ConfigError("remote timeout_s must be positive");
  if (max_attempts < 1) throw ConfigError("remote max_attempts must be >= 1");
  if (initial_backoff_s < 0 || max_backoff_s < initial_backoff_s)
    throw ConfigError("remote backoff must satisfy 0 <= initial_backoff_s <= max_backoff_s");
  if (max_in_flight < 1) throw ConfigError("remote max_in_flight must be >= 1");
}

RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto scheme_end = config_.base_url.find("://") + 3;
  const auto slash = config_.base_url.find('/', scheme_end);
  origin_ = config_.base_url.substr(0, slash);
  std::string base = slash == std::string::npos ? "" : config_.base_url.substr(slash);
  while (!base.empty() && base.back() == '/') base.pop_back();
  path_ = base + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key) throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
  }
  in_flight_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

nlohmann::json RemoteClient::request_body(const GenerationRequest& req) const {
  return {{"model", config_.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
          {"n", req.n},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens},
          {"seed", req.seed}};
}

std::vector<std::string> RemoteClient::parse_response(const std::string& body, int n) {
  auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array())
    throw ProtocolError("response has no choices array");
  std::vector<std::pair<long, std::string>> choices;
  long position = 0;
  for (const auto& c : j["choices"]) {
    if (!c.is_object() || !c.contains("message") || !c["message"].is_object() ||
        !c["message"].contains("content") || !c["message"]["content"].is_string())
      throw ProtocolError("choice without message content");
    long index = c.contains("index") && c["index"].is_number_integer() ? c["index"].get<long>() : position;
    choices.emplace_back(index, c["message"]["content"].get<std::string>());
    ++position;
  }
  if (choices.size() != static_cast<std::size_t>(n))
    throw ProtocolError("expected " + std::to_string(n) + " choices, got " + std::to_string(choices.size()));
  std::stable_sort(choices.begin(), choices.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  out.reserve(choices.size());
  for (auto& c : choices) out.push_back(std::move(c.second));
  return out;
}

std::vector<std::string> RemoteClient::generate(const GenerationRequest& req) {
  const std::string body = request_body(req).dump();
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{in_flight_.get()};

  double backoff = config_.initial_backoff_s;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, body, "application/json");
    if (res && res->status == 200) return parse_response(res->body, req.n);
    if (res && res->status != 429 && res->status < 500)
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + origin_ + path_);
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());

    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff = std::min(backoff * 2, config_.max_backoff_s);
    }
  }
  throw TransportError("giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

}  // namespace corpusplay
