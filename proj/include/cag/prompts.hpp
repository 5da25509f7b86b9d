#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace cag {

/// Prompt templates loaded from plain-text files. Placeholders are
/// {event_name}, {summary}, {paragraph}, {sentence}, {question}, {article},
/// {claim}, {evidence} depending on the template.
struct PromptSet {
  std::string generic;     // video summarizer, first pass
  std::string reasoner;    // relevance feedback
  std::string aggregator;  // article synthesis system prompt
  std::string decompose;   // claim decomposition
  std::string judge;       // grounding judge
  std::string extract;     // answer extraction

  /// Reads generic.txt, reasoner.txt, aggregator.txt, decompose.txt,
  /// judge.txt and extract.txt from `dir`. Throws corpus::MissingFile.
  static PromptSet load(const std::filesystem::path& dir);

  /// Template-name -> content fingerprint, recorded in provenance.
  std::map<std::string, std::string> hashes() const;
};

std::string render_prompt(std::string_view tmpl,
                          const std::map<std::string, std::string>& values);

}  // namespace cag
