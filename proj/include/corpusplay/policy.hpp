#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusplay/rewards.hpp"
#include "corpusplay/templates.hpp"

namespace corpusplay {

struct GenerationRequest {
  std::string prompt;
  int n = 1;
  double temperature = 1.0;
  int max_tokens = 4096;
  Role role = Role::Reasoner;
  // Per-request sampling seed. Scripted policies derive their draws from it;
  // the remote client forwards it as the OpenAI `seed` field.
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// A text generator. Implementations return exactly req.n completions or
// throw (TransportError / ProtocolError); they never return a partial list.
// Implementations must be safe to call from several threads at once.
class PolicyClient {
 public:
  virtual ~PolicyClient() = default;
  virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;
};

// Validates the request, calls the client and checks the completion count.
std::vector<std::string> generate(PolicyClient& client, const GenerationRequest& req);

enum class TemplateFamily { Qwen3, OctoThinker };
std::string_view to_string(TemplateFamily family) noexcept;
// "qwen3" or "octothinker" (case-insensitive); throws ConfigError otherwise.
TemplateFamily parse_template_family(std::string_view name);

// The reasoner prompt for `question` in the model family's chat format.
std::string render_prompt(const TemplateSet& templates, TemplateFamily family, std::string_view question);
std::string render_prompt(TemplateFamily family, std::string_view question);

// Builds a client from a policy spec object; "kind" selects the
// implementation: "remote", "table", "scripted_challenger",
// "scripted_reasoner". Throws ConfigError on unknown kinds or fields.
std::unique_ptr<PolicyClient> make_client(const nlohmann::json& spec);

}  // namespace corpusplay
