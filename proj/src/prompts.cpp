#include "cag/prompts.hpp"

#include <fstream>
#include <sstream>

#include "cag/corpus.hpp"
#include "cag/text.hpp"

namespace cag {

namespace {

std::string read_template(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw corpus::MissingFile("missing prompt template: " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string content = buffer.str();
  // Editors append trailing newlines; the templates are single prompts.
  while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
    content.pop_back();
  }
  return content;
}

}  // namespace

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  PromptSet prompts;
  prompts.generic = read_template(dir / "generic.txt");
  prompts.reasoner = read_template(dir / "reasoner.txt");
  prompts.aggregator = read_template(dir / "aggregator.txt");
  prompts.decompose = read_template(dir / "decompose.txt");
  prompts.judge = read_template(dir / "judge.txt");
  prompts.extract = read_template(dir / "extract.txt");
  return prompts;
}

std::map<std::string, std::string> PromptSet::hashes() const {
  return {
      {"generic", text::fnv1a_hex(generic)},
      {"reasoner", text::fnv1a_hex(reasoner)},
      {"aggregator", text::fnv1a_hex(aggregator)},
      {"decompose", text::fnv1a_hex(decompose)},
      {"judge", text::fnv1a_hex(judge)},
      {"extract", text::fnv1a_hex(extract)},
  };
}

std::string render_prompt(std::string_view tmpl,
                          const std::map<std::string, std::string>& values) {
  std::string out(tmpl);
  for (const auto& [key, value] : values) {
    out = text::replace_all(std::move(out), "{" + key + "}", value);
  }
  return out;
}

}  // namespace cag
