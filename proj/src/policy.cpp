#include "corpusplay/policy.hpp"

#include <cctype>
#include <set>
#include <stdexcept>

#include "corpusplay/error.hpp"
#include "corpusplay/remote.hpp"
#include "corpusplay/scripted.hpp"

namespace corpusplay {

void GenerationRequest::validate() const {
  if (n < 1) throw std::invalid_argument("generation request needs n >= 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be positive");
}

std::vector<std::string> generate(PolicyClient& client, const GenerationRequest& req) {
  req.validate();
  auto out = client.generate(req);
  if (out.size() != static_cast<std::size_t>(req.n))
    throw ProtocolError("policy returned " + std::to_string(out.size()) + " completions, expected " +
                        std::to_string(req.n));
  return out;
}

std::string_view to_string(TemplateFamily family) noexcept {
  return family == TemplateFamily::Qwen3 ? "qwen3" : "octothinker";
}

TemplateFamily parse_template_family(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "qwen3") return TemplateFamily::Qwen3;
  if (key == "octothinker") return TemplateFamily::OctoThinker;
  throw ConfigError("unknown template family: " + std::string(name));
}

std::string render_prompt(const TemplateSet& templates, TemplateFamily family, std::string_view question) {
  if (question.empty()) throw std::invalid_argument("reasoner question is empty");
  const std::string& tpl =
      family == TemplateFamily::Qwen3 ? templates.reasoner_qwen3 : templates.reasoner_octothinker;
  return substitute(tpl, {{"question", std::string(question)}});
}

std::string render_prompt(TemplateFamily family, std::string_view question) {
  static const TemplateSet builtin = TemplateSet::builtin();
  return render_prompt(builtin, family, question);
}

namespace {

void check_keys(const nlohmann::json& spec, const std::set<std::string>& known) {
  for (const auto& [key, _] : spec.items())
    if (!known.count(key)) throw ConfigError("unknown policy field: " + key);
}

template <class T>
void read_field(const nlohmann::json& spec, const char* key, T& out) {
  if (!spec.contains(key)) return;
  try {
    out = spec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("policy field '") + key + "' has the wrong type");
  }
}

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("policy field '") + name + "' must lie in [0, 1]");
}

}  // namespace

std::unique_ptr<PolicyClient> make_client(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
    throw ConfigError("policy spec needs a string 'kind'");
  const std::string kind = spec["kind"].get<std::string>();

  if (kind == "remote") return std::make_unique<RemoteClient>(RemoteConfig::from_json(spec));

  if (kind == "table") {
    check_keys(spec, {"kind", "table"});
    std::map<std::string, std::vector<std::string>> table;
    read_field(spec, "table", table);
    return std::make_unique<TablePolicy>(std::move(table));
  }

  if (kind == "scripted_challenger") {
    check_keys(spec, {"kind", "difficulty", "difficulty_lo", "difficulty_hi", "invalid_rate", "mcq_rate",
                      "expression_rate", "fence_rate", "seed"});
    ChallengerScript s;
    read_field(spec, "difficulty", s.difficulty_lo);
    read_field(spec, "difficulty", s.difficulty_hi);
    read_field(spec, "difficulty_lo", s.difficulty_lo);
    read_field(spec, "difficulty_hi", s.difficulty_hi);
    read_field(spec, "invalid_rate", s.invalid_rate);
    read_field(spec, "mcq_rate", s.mcq_rate);
    read_field(spec, "expression_rate", s.expression_rate);
    read_field(spec, "fence_rate", s.fence_rate);
    read_field(spec, "seed", s.seed);
    if (s.difficulty_hi < s.difficulty_lo) throw ConfigError("difficulty_hi must be >= difficulty_lo");
    check_rate(s.invalid_rate, "invalid_rate");
    check_rate(s.mcq_rate, "mcq_rate");
    check_rate(s.expression_rate, "expression_rate");
    check_rate(s.mcq_rate + s.expression_rate, "mcq_rate + expression_rate");
    check_rate(s.fence_rate, "fence_rate");
    return std::make_unique<ScriptedChallenger>(s);
  }

  if (kind == "scripted_reasoner") {
    check_keys(spec, {"kind", "skill", "accuracy", "seed"});
    ReasonerScript s;
    read_field(spec, "skill", s.skill);
    if (spec.contains("accuracy") && !spec["accuracy"].is_null()) {
      double a = 0;
      read_field(spec, "accuracy", a);
      check_rate(a, "accuracy");
      s.accuracy = a;
    }
    read_field(spec, "seed", s.seed);
    return std::make_unique<ScriptedReasoner>(s);
  }

  throw ConfigError("unknown policy kind: " + kind);
}

}  // namespace corpusplay
