#include "corpusplay/templates.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "corpusplay/error.hpp"
#include "test_util.hpp"

using namespace corpusplay;

TEST(Substitute, FillsPlaceholdersAndUnescapesBraces) {
  EXPECT_EQ(substitute("a {x} b {{lit}} {y}", {{"x", "1"}, {"y", "2"}}), "a 1 b {lit} 2");
}

TEST(Substitute, InsertedValuesAreNotRescanned) {
  EXPECT_EQ(substitute("<{x}>", {{"x", "{y} }}"}}), "<{y} }}>");
}

TEST(Substitute, Errors) {
  EXPECT_THROW(substitute("{missing}", {}), ConfigError);
  EXPECT_THROW(substitute("open {x", {{"x", "1"}}), ConfigError);
  EXPECT_THROW(substitute("lone } brace", {}), ConfigError);
}

TEST(TemplateSet, BuiltinMatchesTemplateFiles) {
  const auto builtin = TemplateSet::builtin();
  const auto files = TemplateSet::from_directory(CPTEST_TEMPLATES);
  EXPECT_EQ(builtin.format_selection, files.format_selection);
  EXPECT_EQ(builtin.mcq, files.mcq);
  EXPECT_EQ(builtin.free_form, files.free_form);
  EXPECT_EQ(builtin.reasoner_qwen3, files.reasoner_qwen3);
  EXPECT_EQ(builtin.reasoner_octothinker, files.reasoner_octothinker);
  EXPECT_EQ(TemplateSet::from_key("default").mcq, builtin.mcq);
}

TEST(TemplateSet, BuiltinTemplatesRenderWithTheirPlaceholders) {
  const auto t = TemplateSet::builtin();
  EXPECT_NO_THROW(substitute(t.format_selection, {{"document", "D"}}));
  EXPECT_NO_THROW(substitute(t.mcq, {{"text", "D"}}));
  EXPECT_NO_THROW(substitute(t.free_form, {{"text", "D"}, {"answer_type", "Integer"}}));
  EXPECT_NO_THROW(substitute(t.reasoner_qwen3, {{"question", "Q"}}));
  EXPECT_NO_THROW(substitute(t.reasoner_octothinker, {{"question", "Q"}}));
  // Missing any placeholder is an error, so each template uses only its own names.
  EXPECT_THROW(substitute(t.free_form, {{"text", "D"}}), ConfigError);
}

TEST(TemplateSet, FormatSelectionSchemaFields) {
  const auto rendered = substitute(TemplateSet::builtin().format_selection, {{"document", "D"}});
  EXPECT_NE(rendered.find("\"suitable_for_mcq\": <true or false>"), std::string::npos);
  EXPECT_NE(rendered.find("\"suitable_for_free_form\": <true or false>"), std::string::npos);
  EXPECT_NE(rendered.find("\"best_answer_type\""), std::string::npos);
}

TEST(TemplateSet, DirectoryOverride) {
  cptest::TempDir dir;
  for (const char* name : {"format_selection", "mcq", "free_form", "reasoner_qwen3", "reasoner_octothinker"})
    std::ofstream(dir / (std::string(name) + ".txt")) << name << " {x}\n";
  auto t = TemplateSet::from_key(dir.path().string());
  EXPECT_EQ(t.mcq, "mcq {x}");
  EXPECT_EQ(t.reasoner_qwen3, "reasoner_qwen3 {x}");
}

TEST(TemplateSet, MissingDirectoryIsConfigError) {
  EXPECT_THROW(TemplateSet::from_key("/nonexistent/templates"), ConfigError);
}
