#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "corpusplay/policy.hpp"

namespace corpusplay {

struct RemoteConfig {
  std::string base_url;     // e.g. "http://127.0.0.1:8000/v1"
  std::string model;
  std::string api_key_env;  // name of the variable holding the key; empty for none
  double timeout_s = 120.0;
  int max_attempts = 5;
  double initial_backoff_s = 0.5;
  double max_backoff_s = 8.0;
  int max_in_flight = 32;

  // Reads the fields above from a policy spec; throws ConfigError on unknown
  // keys or wrong types. `kind` is ignored.
  static RemoteConfig from_json(const nlohmann::json& spec);
  void validate() const;
};

// Client for an OpenAI-compatible chat-completions endpoint. The prompt is
// sent unchanged as the only user message.
class RemoteClient final : public PolicyClient {
 public:
  explicit RemoteClient(RemoteConfig config);
  std::vector<std::string> generate(const GenerationRequest& req) override;

  // The JSON body for `req`.
  nlohmann::json request_body(const GenerationRequest& req) const;

  // Completions from a response body, ordered by choice index.
  static std::vector<std::string> parse_response(const std::string& body, int n);

 private:
  RemoteConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // {base path}/chat/completions
  std::string api_key_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace corpusplay
