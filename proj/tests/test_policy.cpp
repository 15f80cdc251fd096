#include "corpusplay/policy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "corpusplay/error.hpp"
#include "corpusplay/random.hpp"
#include "corpusplay/scripted.hpp"
#include "corpusplay/taskgen.hpp"
#include "corpusplay/verifier.hpp"

using namespace corpusplay;

namespace {

GenerationRequest request(std::string prompt, int n, std::uint64_t seed = 0) {
  GenerationRequest r;
  r.prompt = std::move(prompt);
  r.n = n;
  r.seed = seed;
  return r;
}

Document doc(std::string text) { return Document{"d-0", std::move(text), "s", 1}; }

}  // namespace

TEST(Table, ReturnsListedCompletions) {
  TablePolicy p(std::map<std::string, std::vector<std::string>>{{"P", {"x", "y"}}});
  EXPECT_EQ(generate(p, request("P", 2)), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(generate(p, request("P", 3)), (std::vector<std::string>{"x", "y", "x"}));
  EXPECT_THROW(generate(p, request("Q", 1)), ProtocolError);
}

TEST(Generate, ValidatesRequest) {
  TablePolicy p(std::map<std::string, std::vector<std::string>>{{"P", {"x"}}});
  EXPECT_THROW(generate(p, request("P", 0)), std::invalid_argument);
  auto r = request("P", 1);
  r.temperature = -1;
  EXPECT_THROW(generate(p, r), std::invalid_argument);
  r = request("P", 1);
  r.max_tokens = 0;
  EXPECT_THROW(generate(p, r), std::invalid_argument);
}

TEST(Generate, WrongCompletionCountIsProtocolError) {
  class Short final : public PolicyClient {
   public:
    std::vector<std::string> generate(const GenerationRequest&) override { return {"only"}; }
  } client;
  EXPECT_THROW(generate(client, request("P", 2)), ProtocolError);
}

TEST(RenderPrompt, Qwen3) {
  auto p = render_prompt(TemplateFamily::Qwen3, "2+2?");
  EXPECT_NE(p.find("Please reason step by step, and put your final answer within \\boxed{}"), std::string::npos);
  EXPECT_NE(p.find("<|im_start|>user\n2+2?"), std::string::npos);
  EXPECT_TRUE(p.ends_with("<|im_end|>\n<|im_start|>assistant\n"));
}

TEST(RenderPrompt, OctoThinker) {
  auto p = render_prompt(TemplateFamily::OctoThinker, "2+2?");
  EXPECT_EQ(p.rfind("A conversation between User and Assistant", 0), 0u);
  EXPECT_NE(p.find("You must put your answer inside \\boxed{}"), std::string::npos);
  EXPECT_NE(p.find("User: 2+2?"), std::string::npos);
  EXPECT_TRUE(p.ends_with("\n\nAssistant:"));
}

TEST(RenderPrompt, DeterministicAndValidated) {
  EXPECT_EQ(render_prompt(TemplateFamily::Qwen3, "q"), render_prompt(TemplateFamily::Qwen3, "q"));
  EXPECT_THROW(render_prompt(TemplateFamily::Qwen3, ""), std::invalid_argument);
  EXPECT_EQ(parse_template_family("Qwen3"), TemplateFamily::Qwen3);
  EXPECT_EQ(parse_template_family("octothinker"), TemplateFamily::OctoThinker);
  EXPECT_THROW(parse_template_family("llama"), ConfigError);
}

TEST(ScriptedReasoner, FixedAccuracyReplaysSeededLabelSequence) {
  ReasonerScript script;
  script.accuracy = 0.75;
  script.seed = 11;
  ScriptedReasoner reasoner(script);
  const std::string prompt = render_prompt(TemplateFamily::Qwen3, "[difficulty=0.500] What is 20 + 22?");
  auto req = request(prompt, 8, 99);
  auto out = generate(reasoner, req);
  ASSERT_EQ(out.size(), 8u);
  for (int i = 0; i < 8; ++i) {
    // Oracle: completion i is correct iff the first uniform draw of its own
    // stream falls below the accuracy.
    Rng rng = make_rng(mix_seed({11, 99, hash_string(prompt), static_cast<std::uint64_t>(i)}));
    const bool expect_correct = static_cast<double>(rng() >> 11) * 0x1.0p-53 < 0.75;
    EXPECT_EQ(grade_completion(out[static_cast<std::size_t>(i)], "42", AnswerType::Integer), expect_correct ? 1 : 0)
        << out[static_cast<std::size_t>(i)];
  }
  EXPECT_EQ(generate(reasoner, req), out);
}

TEST(ScriptedReasoner, SigmoidOfSkillMinusDifficulty) {
  ScriptedReasoner r(ReasonerScript{1.0, std::nullopt, 0});
  EXPECT_NEAR(r.correct_probability("[difficulty=0.250] x"), 1.0 / (1.0 + std::exp(-0.75)), 1e-15);
  EXPECT_NEAR(r.correct_probability("no tag"), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(ScriptedReasoner, UnreadablePromptGetsNoBoxedAnswer) {
  ScriptedReasoner r(ReasonerScript{});
  auto out = generate(r, request("Tell me a story.", 3));
  for (const auto& c : out) EXPECT_FALSE(extract_boxed(c).has_value());
}

TEST(ScriptedChallenger, ProducesParseableDecisionsAndTasks) {
  ChallengerScript script;
  script.invalid_rate = 0.0;
  script.seed = 5;
  ScriptedChallenger ch(script);
  const auto templates = TemplateSet::builtin();
  const Document d = doc("A passage with several numbers: 12, 40 and 77.");
  auto decisions = generate(ch, request(build_format_prompt(templates, d), 64, 1));
  int mcq = 0;
  for (const auto& raw : decisions) {
    auto parsed = parse_format_decision(raw);
    ASSERT_TRUE(is_valid(parsed)) << raw;
    const auto& decision = std::get<FormatDecision>(parsed);
    mcq += decision.suitable_for_mcq;
    auto tasks = generate(ch, request(build_task_prompt(templates, d, decision), 4, 2));
    for (const auto& t : tasks) {
      auto task = parse_task(t, decision, d.id);
      ASSERT_TRUE(is_valid(task)) << t;
      EXPECT_EQ(std::get<Task>(task).answer_type, decision.task_type());
    }
  }
  EXPECT_GT(mcq, 0);
  EXPECT_LT(mcq, 64);
}

TEST(ScriptedChallenger, InvalidInjectionCoversReasonCodes) {
  ChallengerScript script;
  script.invalid_rate = 1.0;
  ScriptedChallenger ch(script);
  const auto templates = TemplateSet::builtin();
  const Document d = doc("text");
  std::set<InvalidReason> seen;
  for (auto decision : {FormatDecision::mcq(), FormatDecision::free_form(AnswerType::Integer)}) {
    for (const auto& t : generate(ch, request(build_task_prompt(templates, d, decision), 64, 3))) {
      auto parsed = parse_task(t, decision, d.id);
      ASSERT_FALSE(is_valid(parsed)) << t;
      seen.insert(std::get<Invalid>(parsed).reason);
    }
  }
  EXPECT_TRUE(seen.count(InvalidReason::NoObject));
  EXPECT_TRUE(seen.count(InvalidReason::EmptyBailout));
  EXPECT_TRUE(seen.count(InvalidReason::SchemaViolation));
  EXPECT_TRUE(seen.count(InvalidReason::TypeMismatch));
}

TEST(ScriptedChallenger, ReasonerSolvesEveryTypeWhenAlwaysCorrect) {
  ChallengerScript cs;
  cs.invalid_rate = 0.0;
  ScriptedChallenger ch(cs);
  ReasonerScript rs;
  rs.accuracy = 1.0;
  ScriptedReasoner solver(rs);
  rs.accuracy = 0.0;
  ScriptedReasoner wrong(rs);
  const auto templates = TemplateSet::builtin();
  const Document d = doc("numbers");
  for (auto type : {AnswerType::Integer, AnswerType::Float, AnswerType::Expression, AnswerType::String,
                    AnswerType::Boolean, AnswerType::MCQ}) {
    auto decision = type == AnswerType::MCQ ? FormatDecision::mcq() : FormatDecision::free_form(type);
    auto raw = generate(ch, request(build_task_prompt(templates, d, decision), 1, 4))[0];
    auto task = std::get<Task>(parse_task(raw, decision, d.id));
    auto prompt = render_prompt(templates, TemplateFamily::OctoThinker, task.question);
    for (const auto& c : generate(solver, request(prompt, 4, 1)))
      EXPECT_EQ(grade_completion(c, task.gold, type), 1) << to_string(type) << ": " << c;
    for (const auto& c : generate(wrong, request(prompt, 4, 1)))
      EXPECT_EQ(grade_completion(c, task.gold, type), 0) << to_string(type) << ": " << c;
  }
}

TEST(MakeClient, KindsAndValidation) {
  EXPECT_NE(make_client({{"kind", "scripted_reasoner"}, {"accuracy", 0.5}}), nullptr);
  EXPECT_NE(make_client({{"kind", "scripted_challenger"}, {"difficulty", 0.9}}), nullptr);
  EXPECT_NE(make_client({{"kind", "table"}, {"table", {{"P", {"x"}}}}}), nullptr);
  EXPECT_NE(make_client({{"kind", "remote"}, {"base_url", "http://127.0.0.1:1/v1"}, {"model", "m"}}), nullptr);
  EXPECT_THROW(make_client({{"kind", "nope"}}), ConfigError);
  EXPECT_THROW(make_client({{"kind", "scripted_reasoner"}, {"bogus", 1}}), ConfigError);
  EXPECT_THROW(make_client({{"kind", "scripted_reasoner"}, {"accuracy", 2.0}}), ConfigError);
  EXPECT_THROW(make_client({{"kind", "scripted_reasoner"}, {"skill", "high"}}), ConfigError);
  EXPECT_THROW(make_client({{"kind", "remote"}, {"base_url", "ftp://x"}, {"model", "m"}}), ConfigError);
  EXPECT_THROW(make_client(nlohmann::json::object()), ConfigError);
}
