#include "corpusplay/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "corpusplay/error.hpp"
#include "corpusplay/random.hpp"

namespace corpusplay {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) throw ConfigError("config: '" + where + key + "' must be an integer");
  auto x = v.get<long long>();
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("config: '" + where + key + "' is out of range");
  return static_cast<int>(x);
}

double get_double(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number()) throw ConfigError("config: '" + where + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, std::string fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_string()) throw ConfigError("config: '" + where + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError("config: '" + where + key + "' must be a non-negative integer");
}

}  // namespace

EngineConfig::EngineConfig()
    : policy({{"challenger", {{"kind", "scripted_challenger"}}}, {"reasoner", {{"kind", "scripted_reasoner"}}}}) {}

void EngineConfig::validate() const {
  if (B < 1 || G < 1 || N < 1 || T < 1) throw ConfigError("config: B, G, N and T must all be >= 1");
  if (concurrency < 1) throw ConfigError("config: concurrency must be >= 1");
  if (!(temperature_challenger >= 0) || !(temperature_reasoner >= 0))
    throw ConfigError("config: temperatures must be non-negative");
  if (max_tokens_challenger < 1 || max_tokens_reasoner < 1) throw ConfigError("config: max_tokens must be >= 1");
  if (segment_budget < 1) throw ConfigError("config: segment_budget must be >= 1");
  reward.validate();
  if (!policy.is_object()) throw ConfigError("config: 'policy' must be an object");
  for (const auto& [key, value] : policy.items())
    if ((key == "challenger" || key == "reasoner") && !value.is_object())
      throw ConfigError("config: 'policy." + key + "' must be an object");
}

json EngineConfig::to_json() const {
  json mix = json::object();
  for (const auto& [k, v] : corpus.source_mix) mix[k] = v;
  return {
      {"B", B},
      {"G", G},
      {"N", N},
      {"T", T},
      {"seed", seed},
      {"reward",
       {{"scheme", to_string(reward.scheme)},
        {"sigma2_opt", reward.sigma2_opt},
        {"tau", reward.tau},
        {"rho", reward.rho}}},
      {"template_family", to_string(template_family)},
      {"template_set", template_set},
      {"concurrency", concurrency},
      {"temperature", {{"challenger", temperature_challenger}, {"reasoner", temperature_reasoner}}},
      {"max_tokens", {{"challenger", max_tokens_challenger}, {"reasoner", max_tokens_reasoner}}},
      {"segment_budget", segment_budget},
      {"corpus", {{"path", corpus.path}, {"source_mix", mix}}},
      {"policy", policy},
  };
}

EngineConfig EngineConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"B", "G", "N", "T", "seed", "reward", "template_family", "template_set", "concurrency",
                  "temperature", "max_tokens", "segment_budget", "corpus", "policy"},
                 "");
  EngineConfig c;
  c.B = get_int(j, "B", c.B, "");
  c.G = get_int(j, "G", c.G, "");
  c.N = get_int(j, "N", c.N, "");
  c.T = get_int(j, "T", c.T, "");
  c.seed = get_u64(j, "seed", c.seed, "");
  if (j.contains("reward")) {
    const auto& r = j["reward"];
    reject_unknown(r, {"scheme", "sigma2_opt", "tau", "rho"}, "reward");
    c.reward.scheme = parse_reward_scheme(get_string(r, "scheme", std::string(to_string(c.reward.scheme)), "reward."));
    c.reward.sigma2_opt = get_double(r, "sigma2_opt", c.reward.sigma2_opt, "reward.");
    c.reward.tau = get_double(r, "tau", c.reward.tau, "reward.");
    c.reward.rho = get_double(r, "rho", c.reward.rho, "reward.");
  }
  c.template_family =
      parse_template_family(get_string(j, "template_family", std::string(to_string(c.template_family)), ""));
  c.template_set = get_string(j, "template_set", c.template_set, "");
  c.concurrency = get_int(j, "concurrency", c.concurrency, "");
  if (j.contains("temperature")) {
    const auto& t = j["temperature"];
    reject_unknown(t, {"challenger", "reasoner"}, "temperature");
    c.temperature_challenger = get_double(t, "challenger", c.temperature_challenger, "temperature.");
    c.temperature_reasoner = get_double(t, "reasoner", c.temperature_reasoner, "temperature.");
  }
  if (j.contains("max_tokens")) {
    const auto& t = j["max_tokens"];
    reject_unknown(t, {"challenger", "reasoner"}, "max_tokens");
    c.max_tokens_challenger = get_int(t, "challenger", c.max_tokens_challenger, "max_tokens.");
    c.max_tokens_reasoner = get_int(t, "reasoner", c.max_tokens_reasoner, "max_tokens.");
  }
  if (j.contains("segment_budget")) {
    int budget = get_int(j, "segment_budget", 1, "");
    if (budget < 1) throw ConfigError("config: segment_budget must be >= 1");
    c.segment_budget = static_cast<std::size_t>(budget);
  }
  if (j.contains("corpus")) {
    const auto& k = j["corpus"];
    reject_unknown(k, {"path", "source_mix"}, "corpus");
    c.corpus.path = get_string(k, "path", "", "corpus.");
    if (k.contains("source_mix")) {
      const auto& mix = k["source_mix"];
      if (!mix.is_object()) throw ConfigError("config: 'corpus.source_mix' must be an object");
      for (const auto& [src, w] : mix.items()) {
        if (!w.is_number()) throw ConfigError("config: 'corpus.source_mix." + src + "' must be a number");
        c.corpus.source_mix[src] = w.get<double>();
      }
    }
  }
  if (j.contains("policy")) c.policy = j["policy"];
  c.validate();
  return c;
}

json EngineConfig::role_policy(Role role) const {
  const std::string name(to_string(role));
  json spec = json::object();
  for (const auto& [key, value] : policy.items())
    if (key != "challenger" && key != "reasoner") spec[key] = value;
  if (policy.contains(name))
    for (const auto& [key, value] : policy[name].items()) spec[key] = value;
  if (!spec.contains("kind")) throw ConfigError("config: no policy kind for the " + name + " role");
  const auto kind = spec["kind"].is_string() ? spec["kind"].get<std::string>() : std::string();
  if ((kind == "scripted_challenger" || kind == "scripted_reasoner") && !spec.contains("seed"))
    spec["seed"] = mix_seed({seed, hash_string(name)});
  return spec;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "B", "G", "N", "T", "seed",
      "reward.scheme", "reward.sigma2_opt", "reward.tau", "reward.rho",
      "template_family", "template_set", "concurrency",
      "temperature.challenger", "temperature.reasoner",
      "max_tokens.challenger", "max_tokens.reasoner",
      "segment_budget", "corpus.path", "corpus.source_mix",
      "policy", "policy.challenger", "policy.reasoner",
  };
  return keys;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
  if (!j.is_object()) throw ConfigError("config file " + path.string() + " must hold a JSON object");
  if (j.contains("corpus") && j["corpus"].is_object() && j["corpus"].contains("path") &&
      j["corpus"]["path"].is_string()) {
    std::filesystem::path corpus = j["corpus"]["path"].get<std::string>();
    if (!corpus.empty() && corpus.is_relative())
      j["corpus"]["path"] = (path.parent_path() / corpus).lexically_normal().string();
  }
  return EngineConfig::from_json(j);
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + std::string(assignment));
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override has an empty key segment: " + key);
    if (!node->is_object()) throw ConfigError("override path is not an object: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string config_hash(const EngineConfig& config) {
  json j = config.to_json();
  j.erase("T");
  j.erase("concurrency");
  return sha256_hex(j.dump());
}

Clients make_clients(const EngineConfig& config) {
  return {std::shared_ptr<PolicyClient>(make_client(config.role_policy(Role::Challenger))),
          std::shared_ptr<PolicyClient>(make_client(config.role_policy(Role::Reasoner)))};
}

}  // namespace corpusplay
