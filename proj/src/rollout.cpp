#include "corpusplay/rollout.hpp"

#include <algorithm>
#include <map>

#include "corpusplay/random.hpp"
#include "corpusplay/verifier.hpp"

namespace corpusplay {
namespace {

constexpr std::uint64_t kFormatStream = 1;
constexpr std::uint64_t kTaskStream = 2;

// Attempts [first, first + k) of one round.
void run_round(const Document& doc, PolicyClient& challenger, const RolloutSettings& settings, int round, int k,
               std::uint64_t seed, std::vector<Attempt>& out) {
  GenerationRequest format_req;
  format_req.prompt = build_format_prompt(settings.templates, doc);
  format_req.n = k;
  format_req.temperature = settings.challenger_temperature;
  format_req.max_tokens = settings.challenger_max_tokens;
  format_req.role = Role::Challenger;
  format_req.seed = mix_seed({seed, static_cast<std::uint64_t>(round), kFormatStream});
  const auto decisions_raw = generate(challenger, format_req);

  const std::size_t base = out.size();
  std::map<std::string, std::vector<std::size_t>> by_prompt;  // task prompt -> attempt slots
  std::vector<std::string> prompt_order;
  std::vector<FormatDecision> decisions(decisions_raw.size());
  for (std::size_t i = 0; i < decisions_raw.size(); ++i) {
    Attempt a;
    auto parsed = parse_format_decision(decisions_raw[i]);
    if (auto* bad = std::get_if<Invalid>(&parsed)) {
      a.prompt = format_req.prompt;
      a.completion = decisions_raw[i];
      a.invalid = *bad;
    } else {
      decisions[i] = std::get<FormatDecision>(parsed);
      a.answer_type = decisions[i].task_type();
      a.prompt = build_task_prompt(settings.templates, doc, decisions[i]);
      auto [it, inserted] = by_prompt.try_emplace(a.prompt);
      if (inserted) prompt_order.push_back(a.prompt);
      it->second.push_back(base + i);
    }
    out.push_back(std::move(a));
  }

  for (std::size_t g = 0; g < prompt_order.size(); ++g) {
    const auto& slots = by_prompt[prompt_order[g]];
    GenerationRequest req;
    req.prompt = prompt_order[g];
    req.n = static_cast<int>(slots.size());
    req.temperature = settings.challenger_temperature;
    req.max_tokens = settings.challenger_max_tokens;
    req.role = Role::Challenger;
    req.seed = mix_seed({seed, static_cast<std::uint64_t>(round), kTaskStream, hash_string(req.prompt)});
    const auto completions = generate(challenger, req);
    for (std::size_t j = 0; j < slots.size(); ++j) {
      Attempt& a = out[slots[j]];
      a.completion = completions[j];
      auto parsed = parse_task(a.completion, decisions[slots[j] - base], doc.id);
      if (auto* task = std::get_if<Task>(&parsed))
        a.task = std::move(*task);
      else
        a.invalid = std::get<Invalid>(parsed);
    }
  }
}

}  // namespace

std::vector<Attempt> generate_attempts(const Document& doc, PolicyClient& challenger,
                                       const RolloutSettings& settings, int min_pool, int max_attempts,
                                       std::uint64_t seed) {
  std::vector<Attempt> out;
  const int first = std::max(1, std::min(min_pool, max_attempts));
  run_round(doc, challenger, settings, 0, first, seed, out);
  int round = 1;
  auto any_valid = [&] { return std::any_of(out.begin(), out.end(), [](const Attempt& a) { return a.valid(); }); };
  while (!any_valid() && static_cast<int>(out.size()) < max_attempts) run_round(doc, challenger, settings, round++, 1, seed, out);
  return out;
}

GradedGroup grade_task(const Task& task, PolicyClient& reasoner, const RolloutSettings& settings, int g,
                       std::uint64_t seed) {
  GenerationRequest req;
  req.prompt = render_prompt(settings.templates, settings.family, task.question);
  req.n = g;
  req.temperature = settings.reasoner_temperature;
  req.max_tokens = settings.reasoner_max_tokens;
  req.role = Role::Reasoner;
  req.seed = seed;
  GradedGroup out;
  out.completions = generate(reasoner, req);
  std::vector<int> labels;
  labels.reserve(out.completions.size());
  for (const auto& c : out.completions) labels.push_back(grade_completion(c, task.gold, task.answer_type));
  out.stats = GroupStats::from_labels(labels);
  out.prompt = std::move(req.prompt);
  return out;
}

}  // namespace corpusplay
