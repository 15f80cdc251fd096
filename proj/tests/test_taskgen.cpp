#include <gtest/gtest.h>

#include "corpusplay/random.hpp"
#include "corpusplay/taskgen.hpp"

using namespace corpusplay;

namespace {

template <class T>
InvalidReason reason_of(const ParseResult<T>& r) {
  EXPECT_FALSE(is_valid(r));
  return is_valid(r) ? InvalidReason::NoObject : std::get<Invalid>(r).reason;
}

const FormatDecision kMcq = FormatDecision::mcq();
const FormatDecision kInt = FormatDecision::free_form(AnswerType::Integer);

const char* kGoodMcq = R"({"multiple_choice_question": "How far is the Sun?\nA) 1 km\nB) 149,600,000 km\nC) 5 km\nD) 7 km", "multiple_choice_correct": "B"})";

}  // namespace

TEST(ExtractJson, SkipsProseAndFences) {
  auto j = extract_json_object("Sure!\n```json\n{\"a\": {\"b\": \"}\"}}\n```\nbye {\"c\": 1}");
  ASSERT_TRUE(j);
  EXPECT_EQ((*j)["a"]["b"], "}");
  EXPECT_FALSE(extract_json_object("no braces at all"));
  EXPECT_FALSE(extract_json_object("{not json}"));
  auto k = extract_json_object("{broken {\"ok\": true}");
  ASSERT_TRUE(k);
  EXPECT_EQ((*k)["ok"], true);
}

TEST(FormatDecision, ParsesBothShapes) {
  auto m = parse_format_decision(R"({"suitable_for_mcq": true, "suitable_for_free_form": false, "reason": "r"})");
  ASSERT_TRUE(is_valid(m));
  EXPECT_EQ(std::get<FormatDecision>(m).task_type(), AnswerType::MCQ);

  auto f = parse_format_decision(
      "Thinking...\n```json\n{\"suitable_for_mcq\": false, \"suitable_for_free_form\": true, "
      "\"best_answer_type\": \"Expression\"}\n```");
  ASSERT_TRUE(is_valid(f));
  EXPECT_EQ(std::get<FormatDecision>(f).task_type(), AnswerType::Expression);
}

TEST(FormatDecision, Invalids) {
  EXPECT_EQ(reason_of(parse_format_decision("I think MCQ.")), InvalidReason::NoObject);
  EXPECT_EQ(reason_of(parse_format_decision(R"({"suitable_for_mcq": "yes", "suitable_for_free_form": false})")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_format_decision(R"({"suitable_for_mcq": true, "suitable_for_free_form": true})")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_format_decision(R"({"suitable_for_mcq": false, "suitable_for_free_form": false})")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_format_decision(R"({"suitable_for_mcq": false, "suitable_for_free_form": true})")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_format_decision(
                R"({"suitable_for_mcq": false, "suitable_for_free_form": true, "best_answer_type": "List"})")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_format_decision(
                R"({"suitable_for_mcq": false, "suitable_for_free_form": true, "best_answer_type": "MCQ"})")),
            InvalidReason::SchemaViolation);
}

TEST(Prompts, SubstituteDocumentAndType) {
  auto t = TemplateSet::builtin();
  Document d{"d1", "The Sun is a star.", "web", 5};
  auto fp = build_format_prompt(t, d);
  EXPECT_NE(fp.find("The Sun is a star."), std::string::npos);
  auto ip = build_task_prompt(t, d, FormatDecision::free_form(AnswerType::Float));
  EXPECT_NE(ip.find("You must generate a question with answer type: Float"), std::string::npos);
  EXPECT_NE(ip.find("The Sun is a star."), std::string::npos);
  auto mp = build_task_prompt(t, d, kMcq);
  EXPECT_NE(mp.find("Multiple Choice"), std::string::npos);
  EXPECT_NE(mp.find("The Sun is a star."), std::string::npos);
}

TEST(ParseTask, ValidMcq) {
  auto r = parse_task(std::string("```json\n") + kGoodMcq + "\n```", kMcq, "d1");
  ASSERT_TRUE(is_valid(r));
  const auto& t = std::get<Task>(r);
  EXPECT_EQ(t.gold, "B");
  EXPECT_EQ(t.answer_type, AnswerType::MCQ);
  EXPECT_EQ(t.source_doc, "d1");
  EXPECT_NE(t.question.find("D) 7 km"), std::string::npos);
}

TEST(ParseTask, McqInvalids) {
  EXPECT_EQ(reason_of(parse_task("no json", kMcq, "d")), InvalidReason::NoObject);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": "B"})", kMcq, "d")), InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(R"({"multiple_choice_question": "", "multiple_choice_correct": ""})", kMcq, "d")),
            InvalidReason::EmptyBailout);
  EXPECT_EQ(reason_of(parse_task(
                R"({"multiple_choice_question": "Q?\nA) 1\nB) 2\nC) 3", "multiple_choice_correct": "A"})", kMcq, "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(
                R"({"multiple_choice_question": "Q?\nA) 1\nB) 2\nC) 3\nD) 4\nE) 5", "multiple_choice_correct": "A"})",
                kMcq, "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(
                R"({"multiple_choice_question": "A) 1\nB) 2\nC) 3\nD) 4", "multiple_choice_correct": "A"})", kMcq, "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(
                R"({"multiple_choice_question": "Q?\nA) 1\nB) 2\nC) 3\nD) 4", "multiple_choice_correct": "E"})", kMcq,
                "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(
                R"({"multiple_choice_question": ["Q?", "A) 1"], "multiple_choice_correct": "A"})", kMcq, "d")),
            InvalidReason::SchemaViolation);
}

TEST(ParseTask, FreeFormCases) {
  auto ok = parse_task(R"({"question": "2+2?", "answer": 4, "answer_type": "Integer"})", kInt, "d");
  ASSERT_TRUE(is_valid(ok));
  EXPECT_EQ(std::get<Task>(ok).gold, "4");
  auto ok2 = parse_task(R"({"question": "2+2?", "answer": "4.0", "answer_type": "Integer"})", kInt, "d");
  ASSERT_TRUE(is_valid(ok2));
  EXPECT_EQ(std::get<Task>(ok2).gold, "4");

  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": [1, 2], "answer_type": "Integer"})", kInt, "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(R"({"question": ["a", "b"], "answer": 1, "answer_type": "Integer"})", kInt, "d")),
            InvalidReason::SchemaViolation);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "", "answer": "", "answer_type": "Integer"})", kInt, "d")),
            InvalidReason::EmptyBailout);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": 4, "answer_type": "Float"})", kInt, "d")),
            InvalidReason::TypeMismatch);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": 4})", kInt, "d")), InvalidReason::TypeMismatch);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": "0.5", "answer_type": "Integer"})", kInt, "d")),
            InvalidReason::UnparseableGold);
  EXPECT_EQ(reason_of(parse_task(R"({"question": "q", "answer": "x + * 2", "answer_type": "Expression"})",
                                 FormatDecision::free_form(AnswerType::Expression), "d")),
            InvalidReason::UnparseableGold);
}

TEST(ParseTask, BooleanAndFloatScalars) {
  auto b = parse_task(R"({"question": "q", "answer": true, "answer_type": "Boolean"})",
                      FormatDecision::free_form(AnswerType::Boolean), "d");
  ASSERT_TRUE(is_valid(b));
  EXPECT_EQ(std::get<Task>(b).gold, "true");
  auto f = parse_task(R"({"question": "q", "answer": 2.5, "answer_type": "Float"})",
                      FormatDecision::free_form(AnswerType::Float), "d");
  ASSERT_TRUE(is_valid(f));
}

// Every valid task survives a render/parse round trip unchanged.
TEST(Property, RenderRoundTrip) {
  Rng rng = make_rng(3);
  const std::vector<std::pair<AnswerType, std::vector<std::string>>> golds = {
      {AnswerType::Integer, {"7", "-12", "1391000"}},
      {AnswerType::Float, {"2.5", "0.001", "-3.75"}},
      {AnswerType::Expression, {"2*x+1", "\\frac{a}{b}", "x^2"}},
      {AnswerType::String, {"Paris", "red giant"}},
      {AnswerType::Boolean, {"true", "false"}},
  };
  for (int i = 0; i < 200; ++i) {
    const auto& [type, pool] = golds[uniform_index(rng, golds.size())];
    std::string gold = pool[uniform_index(rng, pool.size())];
    auto decision = FormatDecision::free_form(type);
    std::string gen = nlohmann::json{{"question", "Q" + std::to_string(i) + "?"},
                                     {"answer", gold},
                                     {"answer_type", std::string(to_string(type))}}
                          .dump();
    auto first = parse_task(gen, decision, "d");
    ASSERT_TRUE(is_valid(first)) << gen;
    auto second = parse_task(render_task_json(std::get<Task>(first)), decision, "d");
    ASSERT_TRUE(is_valid(second));
    EXPECT_EQ(std::get<Task>(first).question, std::get<Task>(second).question);
    EXPECT_EQ(std::get<Task>(first).gold, std::get<Task>(second).gold);
  }
  auto m = parse_task(kGoodMcq, kMcq, "d");
  ASSERT_TRUE(is_valid(m));
  auto m2 = parse_task(render_task_json(std::get<Task>(m)), kMcq, "d");
  ASSERT_TRUE(is_valid(m2));
  EXPECT_EQ(std::get<Task>(m).question, std::get<Task>(m2).question);
  EXPECT_EQ(std::get<Task>(m2).gold, "B");
}

// Validity depends on the generation alone.
TEST(Property, ParseIsPure) {
  const std::string gen = R"({"question": "q", "answer": 3, "answer_type": "Integer"})";
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(is_valid(parse_task(gen, kInt, "doc" + std::to_string(i))));
}
