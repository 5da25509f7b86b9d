#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cag/engine.hpp"
#include "cag/errors.hpp"
#include "cag/gateway.hpp"

namespace cag::app {

/// Bad flags, missing files, inconsistent method/budget. Mapped to exit 2.
class ConfigInvalid : public Error {
public:
  using Error::Error;
};

class MissingRuns : public Error {
public:
  using Error::Error;
};

struct AppConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path prompts_dir = "prompts";
  std::filesystem::path questions_file;  // empty: try data/questions.json, skip Arg if absent
  engine::RunConfig run;
  bool rag = false;
  std::filesystem::path run_file;   // RAG ranked run
  std::filesystem::path qrels_file; // optional explicit qrels
  std::filesystem::path mock_script;
  std::filesystem::path out_dir = "out";
  std::filesystem::path runs_dir = "runs";  // evaluate input; generate writes here too
  std::string grounding = "off";            // off | human | llm
  std::filesystem::path judgments_file;
  std::string scorer_url;
  int max_retries = 2;
  int retry_backoff_ms = 250;

  /// Flat dotted keys from the config file (weakest precedence layer).
  std::map<std::string, std::string> file_settings;
};

/// `key = value` lines, '#' comments, optional quotes around values.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& file);

/// Applies non-gateway settings from the config file onto defaults.
/// Callers overlay environment and flags afterwards.
void apply_file_settings(AppConfig& config);

/// Exit codes: 0 all events succeeded, 1 some event failed.
/// Throws ConfigInvalid for unusable configuration (exit 2 at the CLI).
int cmd_generate(const AppConfig& config);
int cmd_evaluate(const AppConfig& config);
int cmd_stats(const AppConfig& config, const std::filesystem::path& json_out = {});
int cmd_ndcg(const AppConfig& config, const std::filesystem::path& json_out = {});

}  // namespace cag::app
