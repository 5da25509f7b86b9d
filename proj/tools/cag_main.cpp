#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cag/app.hpp"
#include "cag/engine.hpp"

namespace {

using cag::app::AppConfig;

// Shared flag wiring; each subcommand picks the subset it documents.
struct Flags {
  std::string corpus;
  std::string prompts;
  std::string questions;
  std::string method;
  int budget = -1;
  bool oracle = false;
  bool rag = false;
  std::string run;
  std::string qrels;
  int top_k = -1;
  bool transcripts = false;
  std::string mock;
  std::string out;
  std::string runs;
  std::string grounding;
  std::string judgments;
  std::string scorer_url;
  std::string config_file;
  std::string json_out;
  int concurrency = -1;
};

AppConfig build_config(const Flags& flags) {
  AppConfig config;
  if (!flags.config_file.empty()) {
    config.file_settings = cag::app::parse_config_file(flags.config_file);
    cag::app::apply_file_settings(config);
  }
  // Flags win over config file and environment.
  if (!flags.corpus.empty()) config.corpus_root = flags.corpus;
  if (!flags.prompts.empty()) config.prompts_dir = flags.prompts;
  if (!flags.questions.empty()) config.questions_file = flags.questions;
  if (!flags.method.empty()) {
    const auto method = cag::engine::method_from_token(flags.method);
    if (!method) throw cag::app::ConfigInvalid("unknown method: " + flags.method);
    config.run.method = *method;
  }
  if (flags.budget >= 0) config.run.budget_r = flags.budget;
  if (flags.top_k >= 0) config.run.top_k = flags.top_k;
  if (flags.transcripts) config.run.include_transcripts = true;
  if (flags.oracle) config.rag = false;
  if (flags.rag) config.rag = true;
  if (!flags.run.empty()) config.run_file = flags.run;
  if (!flags.qrels.empty()) config.qrels_file = flags.qrels;
  if (!flags.mock.empty()) config.mock_script = flags.mock;
  if (!flags.out.empty()) config.out_dir = flags.out;
  if (!flags.runs.empty()) config.runs_dir = flags.runs;
  if (!flags.grounding.empty()) config.grounding = flags.grounding;
  if (!flags.judgments.empty()) config.judgments_file = flags.judgments;
  if (!flags.scorer_url.empty()) config.scorer_url = flags.scorer_url;
  if (flags.concurrency > 0) config.run.parallelism = flags.concurrency;
  return config;
}

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--corpus", flags.corpus, "Corpus root directory");
  cmd->add_option("--config", flags.config_file, "Key-value config file (cag.toml style)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Article generation from multiple event videos, plus its metric suite"};
  app.require_subcommand(1);

  Flags flags;

  CLI::App* generate = app.add_subcommand("generate", "Generate articles for every event");
  add_common(generate, flags);
  generate->add_option("--prompts", flags.prompts, "Prompt template directory");
  generate->add_option("--method", flags.method, "concat0 | concatr | cag0 | cagr");
  generate->add_option("--budget", flags.budget, "Reprompt iteration budget R");
  generate->add_flag("--oracle", flags.oracle, "Use each event's annotated video set (default)");
  generate->add_flag("--rag", flags.rag, "Use top-k videos from a ranked run file");
  generate->add_option("--run", flags.run, "Ranked run file (RAG mode)");
  generate->add_option("--top-k", flags.top_k, "Videos per event in RAG mode");
  generate->add_flag("--transcripts", flags.transcripts, "Feed transcripts to the aggregator");
  generate->add_option("--mock", flags.mock, "Scripted gateway JSON (offline)");
  generate->add_option("--out", flags.runs, "Directory for run artifacts");
  generate->add_option("--concurrency", flags.concurrency, "Per-event trace parallelism");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score run artifacts against references");
  add_common(evaluate, flags);
  evaluate->add_option("--runs", flags.runs, "Directory holding run artifacts");
  evaluate->add_option("--out", flags.out, "Directory for report.json / report.txt");
  evaluate->add_option("--prompts", flags.prompts, "Prompt template directory");
  evaluate->add_option("--questions", flags.questions, "Question bank JSON");
  evaluate->add_option("--mock", flags.mock, "Scripted gateway JSON (offline)");
  evaluate->add_option("--grounding", flags.grounding, "off | human | llm");
  evaluate->add_option("--judgments", flags.judgments, "Human judgments file");
  evaluate->add_option("--scorer", flags.scorer_url, "External scorer base URL");
  evaluate->add_flag("--rag", flags.rag, "Also score retrieval (nDCG) from --run");
  evaluate->add_option("--run", flags.run, "Ranked run file for nDCG");
  evaluate->add_option("--qrels", flags.qrels, "Explicit qrels file");
  evaluate->add_option("--top-k", flags.top_k, "nDCG cutoff k");

  CLI::App* stats = app.add_subcommand("stats", "Corpus statistics and annotation agreement");
  add_common(stats, flags);
  stats->add_option("--json", flags.json_out, "Also write the report as JSON");

  CLI::App* ndcg = app.add_subcommand("ndcg", "nDCG@k for a ranked run file");
  add_common(ndcg, flags);
  ndcg->add_option("--run", flags.run, "Ranked run file")->required();
  ndcg->add_option("--qrels", flags.qrels, "Explicit qrels file");
  ndcg->add_option("--top-k", flags.top_k, "Cutoff k");
  ndcg->add_option("--json", flags.json_out, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    const AppConfig config = build_config(flags);
    if (generate->parsed()) return cag::app::cmd_generate(config);
    if (evaluate->parsed()) return cag::app::cmd_evaluate(config);
    if (stats->parsed()) return cag::app::cmd_stats(config, flags.json_out);
    if (ndcg->parsed()) return cag::app::cmd_ndcg(config, flags.json_out);
  } catch (const cag::app::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
