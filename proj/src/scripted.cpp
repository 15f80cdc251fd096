#include "corpusplay/scripted.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

#include <nlohmann/json.hpp>

#include "corpusplay/error.hpp"

namespace corpusplay {
namespace {

constexpr std::string_view kFormatMarker = "better suited for a CHALLENGING multiple-choice question";
constexpr std::string_view kMcqMarker = "### Step 6: Multiple Choice Design Guidelines";
constexpr std::string_view kTypeMarker = "You must generate a question with answer type: ";

std::string_view between(std::string_view s, std::string_view open, std::string_view close) {
  auto a = s.find(open);
  if (a == std::string_view::npos) return s;
  a += open.size();
  auto b = s.find(close, a);
  if (b == std::string_view::npos) return s.substr(a);
  return s.substr(a, b - a);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tag(double difficulty) { return "[difficulty=" + fixed(difficulty, 3) + "] "; }

std::string wrap(Rng& rng, double fence_rate, const std::string& json) {
  if (!bernoulli(rng, fence_rate)) return json;
  return "Here is my question design.\n```json\n" + json + "\n```\n";
}

}  // namespace

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

std::uint64_t scripted_completion_seed(std::uint64_t policy_seed, const GenerationRequest& req, int index) {
  return mix_seed({policy_seed, req.seed, hash_string(req.prompt), static_cast<std::uint64_t>(index)});
}

// ------------------------------------------------------------ TablePolicy

TablePolicy::TablePolicy(std::map<std::string, std::vector<std::string>> table) : table_(std::move(table)) {}

std::vector<std::string> TablePolicy::generate(const GenerationRequest& req) {
  auto it = table_.find(req.prompt);
  if (it == table_.end() || it->second.empty())
    throw ProtocolError("table policy has no completions for the prompt");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(req.n));
  for (int i = 0; i < req.n; ++i) out.push_back(it->second[static_cast<std::size_t>(i) % it->second.size()]);
  return out;
}

// ----------------------------------------------------- ScriptedChallenger

ScriptedChallenger::ScriptedChallenger(ChallengerScript script) : script_(script) {}

std::vector<std::string> ScriptedChallenger::generate(const GenerationRequest& req) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(req.n));
  const bool is_format = req.prompt.find(kFormatMarker) != std::string::npos;
  for (int i = 0; i < req.n; ++i) {
    Rng rng = make_rng(scripted_completion_seed(script_.seed, req, i));
    out.push_back(is_format ? format_decision(rng) : task(rng, req.prompt));
  }
  return out;
}

std::string ScriptedChallenger::format_decision(Rng& rng) const {
  double u = uniform01(rng);
  nlohmann::json j;
  if (u < script_.mcq_rate) {
    j = {{"suitable_for_mcq", true}, {"suitable_for_free_form", false}, {"best_answer_type", nullptr},
         {"reason", "relationships support plausible distractors"}};
  } else {
    const char* type = u < script_.mcq_rate + script_.expression_rate ? "Expression" : "Integer";
    j = {{"suitable_for_mcq", false}, {"suitable_for_free_form", true}, {"best_answer_type", type},
         {"reason", "precise quantities with one answer"}};
  }
  return wrap(rng, script_.fence_rate, j.dump());
}

std::string ScriptedChallenger::task(Rng& rng, const std::string& prompt) const {
  const bool mcq = prompt.find(kMcqMarker) != std::string::npos;
  std::string type = "Integer";
  if (!mcq) {
    auto pos = prompt.find(kTypeMarker);
    if (pos == std::string::npos) return "I am not sure what kind of question to write.";
    auto start = pos + kTypeMarker.size();
    type = prompt.substr(start, prompt.find('\n', start) - start);
  }

  const std::uint64_t doc_hash =
      hash_string(between(prompt, "[BEGINNING OF THE DOCUMENT]\n", "\n[END OF THE DOCUMENT]"));
  const long a = 10 + static_cast<long>((doc_hash + uniform_index(rng, 50)) % 890);
  const long b = 10 + static_cast<long>(uniform_index(rng, 890));
  const double difficulty =
      script_.difficulty_lo + (script_.difficulty_hi - script_.difficulty_lo) * uniform01(rng);
  const std::string stem = tag(difficulty);

  const bool broken = bernoulli(rng, script_.invalid_rate);
  const std::size_t breakage = uniform_index(rng, 4);
  nlohmann::json j;
  j["hardening_process"] = "combine two quantities from separate sections";

  if (mcq) {
    const long sum = a + b;
    const std::size_t correct = uniform_index(rng, 4);
    std::string block = stem + "What is " + std::to_string(a) + " + " + std::to_string(b) + "?";
    const int options = broken && breakage == 2 ? 3 : 4;
    long distractor = sum - 2;
    for (int k = 0; k < options; ++k) {
      long value = static_cast<std::size_t>(k) == correct ? sum : (distractor == sum ? ++distractor : distractor);
      if (static_cast<std::size_t>(k) != correct) ++distractor;
      block += "\n" + std::string(1, static_cast<char>('A' + k)) + ") " + std::to_string(value);
    }
    std::string letter(1, static_cast<char>('A' + correct));
    if (broken && breakage == 3) letter = "E";
    if (broken && breakage == 1) block = letter = "";
    j["multiple_choice_question"] = block;
    j["multiple_choice_correct"] = letter;
    j["question_difficulty"] = "Hard";
  } else {
    std::string question;
    nlohmann::json answer;
    if (type == "Expression") {
      question = "Simplify " + std::to_string(a) + "*x + " + std::to_string(b) + "*x.";
      answer = std::to_string(a + b) + "*x";
    } else if (type == "Float") {
      question = "What is " + std::to_string(a) + " + " + std::to_string(b) + " + 0.25?";
      answer = static_cast<double>(a + b) + 0.25;
    } else if (type == "Boolean") {
      const long c = 10 + static_cast<long>(uniform_index(rng, 1780));
      question = "Is " + std::to_string(a) + " + " + std::to_string(b) + " greater than " + std::to_string(c) + "?";
      answer = a + b > c;
    } else if (type == "String") {
      question = "Is " + std::to_string(a) + " + " + std::to_string(b) + " even or odd?";
      answer = (a + b) % 2 == 0 ? "even" : "odd";
    } else {
      question = "What is " + std::to_string(a) + " + " + std::to_string(b) + "?";
      answer = a + b;
    }
    j["question"] = stem + question;
    j["answer"] = answer;
    j["answer_type"] = type;
    if (broken && breakage == 1) j = {{"question", ""}, {"answer", ""}, {"answer_type", type}};
    if (broken && breakage == 2) j["answer"] = nlohmann::json::array({answer});
    if (broken && breakage == 3) j["answer_type"] = type == "Integer" ? "String" : "Integer";
  }

  if (broken && breakage == 0) return "The document lacks enough structure; no question this time.";
  return wrap(rng, script_.fence_rate, j.dump());
}

// ------------------------------------------------------- ScriptedReasoner

ScriptedReasoner::ScriptedReasoner(ReasonerScript script) : script_(script) {}

double ScriptedReasoner::correct_probability(const std::string& prompt) const {
  if (script_.accuracy) return *script_.accuracy;
  static const std::regex difficulty_re(R"(\[difficulty=([0-9]*\.?[0-9]+)\])");
  std::smatch m;
  double difficulty = std::regex_search(prompt, m, difficulty_re) ? std::stod(m[1].str()) : 0.0;
  return sigmoid(script_.skill - difficulty);
}

std::vector<std::string> ScriptedReasoner::generate(const GenerationRequest& req) {
  static const std::regex mcq_re(R"(What is (\d+) \+ (\d+)\?\s*\nA\) )");
  static const std::regex option_re(R"((?:^|\n)([A-D])\) (-?\d+))");
  static const std::regex float_re(R"(What is (\d+) \+ (\d+) \+ 0\.25\?)");
  static const std::regex int_re(R"(What is (\d+) \+ (\d+)\?)");
  static const std::regex expr_re(R"(Simplify (\d+)\*x \+ (\d+)\*x\.)");
  static const std::regex bool_re(R"(Is (\d+) \+ (\d+) greater than (\d+)\?)");
  static const std::regex parity_re(R"(Is (\d+) \+ (\d+) even or odd\?)");

  const double p = correct_probability(req.prompt);
  const std::string& prompt = req.prompt;
  std::smatch m;

  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(req.n));
  for (int i = 0; i < req.n; ++i) {
    Rng rng = make_rng(scripted_completion_seed(script_.seed, req, i));
    const bool correct = bernoulli(rng, p);
    std::string answer;
    if (std::regex_search(prompt, m, mcq_re)) {
      const long sum = std::stol(m[1].str()) + std::stol(m[2].str());
      std::vector<std::pair<char, long>> options;
      for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), option_re); it != std::sregex_iterator();
           ++it)
        options.emplace_back((*it)[1].str()[0], std::stol((*it)[2].str()));
      std::size_t right = 0;
      for (std::size_t k = 0; k < options.size(); ++k)
        if (options[k].second == sum) right = k;
      std::size_t pick = right;
      if (!correct && options.size() > 1) pick = (right + 1 + uniform_index(rng, options.size() - 1)) % options.size();
      if (!options.empty())
        answer = std::string(1, options[pick].first) + ") " + std::to_string(options[pick].second);
    } else if (std::regex_search(prompt, m, float_re)) {
      double v = static_cast<double>(std::stol(m[1].str()) + std::stol(m[2].str())) + 0.25;
      answer = fixed(correct ? v : v + 1.0, 2);
    } else if (std::regex_search(prompt, m, int_re)) {
      long v = std::stol(m[1].str()) + std::stol(m[2].str());
      answer = std::to_string(correct ? v : v + 1 + static_cast<long>(uniform_index(rng, 5)));
    } else if (std::regex_search(prompt, m, expr_re)) {
      long v = std::stol(m[1].str()) + std::stol(m[2].str());
      answer = std::to_string(correct ? v : v + 1) + "x";
    } else if (std::regex_search(prompt, m, bool_re)) {
      bool v = std::stol(m[1].str()) + std::stol(m[2].str()) > std::stol(m[3].str());
      answer = (correct ? v : !v) ? "true" : "false";
    } else if (std::regex_search(prompt, m, parity_re)) {
      bool even = (std::stol(m[1].str()) + std::stol(m[2].str())) % 2 == 0;
      answer = (correct ? even : !even) ? "even" : "odd";
    }
    if (answer.empty()) {
      out.emplace_back("I do not recognize this kind of question.");
    } else {
      out.push_back("Let me work through this step by step.\nThe final answer is \\boxed{" + answer + "}.");
    }
  }
  return out;
}

}  // namespace corpusplay
