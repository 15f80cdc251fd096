#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace corpusplay {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

// Fills `{name}` placeholders; `{{` and `}}` are literal braces. Inserted
// values are not rescanned. Unknown names and unpaired braces throw
// ConfigError.
std::string substitute(std::string_view tpl, const TemplateVars& vars);

// The five prompt templates the engine renders.
struct TemplateSet {
  std::string format_selection;      // {document}
  std::string mcq;                   // {text}
  std::string free_form;             // {text}, {answer_type}
  std::string reasoner_qwen3;        // {question}
  std::string reasoner_octothinker;  // {question}

  // The set compiled into the library.
  static TemplateSet builtin();

  // Reads <dir>/{format_selection,mcq,free_form,reasoner_qwen3,reasoner_octothinker}.txt.
  static TemplateSet from_directory(const std::filesystem::path& dir);

  // "default" selects the built-in set; anything else is a directory.
  static TemplateSet from_key(std::string_view key);
};

}  // namespace corpusplay
