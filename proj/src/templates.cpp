#include "corpusplay/templates.hpp"

#include <fstream>
#include <sstream>

#include "corpusplay/embedded_templates.hpp"
#include "corpusplay/error.hpp"

namespace corpusplay {
namespace {

// Template files end with a newline by convention; it is not part of the prompt.
std::string strip_final_newline(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return std::string(s);
}

std::string read_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read template: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return strip_final_newline(buf.str());
}

}  // namespace

std::string substitute(std::string_view tpl, const TemplateVars& vars) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    char c = tpl[i];
    if (c == '{') {
      if (i + 1 < tpl.size() && tpl[i + 1] == '{') {
        out.push_back('{');
        ++i;
        continue;
      }
      std::size_t close = tpl.find('}', i + 1);
      if (close == std::string_view::npos)
        throw ConfigError("unterminated placeholder in template at byte " + std::to_string(i));
      std::string_view name = tpl.substr(i + 1, close - i - 1);
      auto it = vars.find(name);
      if (it == vars.end()) throw ConfigError("template placeholder has no value: {" + std::string(name) + "}");
      out += it->second;
      i = close;
    } else if (c == '}') {
      if (i + 1 < tpl.size() && tpl[i + 1] == '}') {
        out.push_back('}');
        ++i;
        continue;
      }
      throw ConfigError("single '}' in template at byte " + std::to_string(i));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

TemplateSet TemplateSet::builtin() {
  return TemplateSet{
      strip_final_newline(embedded::format_selection),
      strip_final_newline(embedded::mcq),
      strip_final_newline(embedded::free_form),
      strip_final_newline(embedded::reasoner_qwen3),
      strip_final_newline(embedded::reasoner_octothinker),
  };
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  return TemplateSet{
      read_template(dir / "format_selection.txt"),
      read_template(dir / "mcq.txt"),
      read_template(dir / "free_form.txt"),
      read_template(dir / "reasoner_qwen3.txt"),
      read_template(dir / "reasoner_octothinker.txt"),
  };
}

TemplateSet TemplateSet::from_key(std::string_view key) {
  if (key == "default") return builtin();
  return from_directory(std::filesystem::path(key));
}

}  // namespace corpusplay
