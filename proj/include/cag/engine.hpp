#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cag/corpus.hpp"
#include "cag/errors.hpp"
#include "cag/gateway.hpp"
#include "cag/prompts.hpp"

namespace cag::engine {

/// Aggregator output lacked the lead marker twice in a row.
class MissingLeadMarker : public Error {
public:
  using Error::Error;
};

/// Reprompt-only concatenation where no video produced any round.
class EmptyOutput : public Error {
public:
  using Error::Error;
};

enum class Method { Concat0, ConcatReprompt, Cag0, CagR };

std::string method_token(Method method);  // concat0 | concatr | cag0 | cagr
std::optional<Method> method_from_token(const std::string& token);

struct RunConfig {
  Method method = Method::Cag0;
  int budget_r = 0;
  bool include_transcripts = false;
  int top_k = 5;        // RAG only
  int parallelism = 1;  // per-video trace concurrency

  /// Enforces method/budget consistency; throws std::invalid_argument.
  void validate() const;
};

struct RepromptRound {
  std::string reprompt;
  std::string summary;

  bool operator==(const RepromptRound&) const = default;
};

enum class Termination { Sufficient, BudgetExhausted };

std::string termination_name(Termination termination);

struct SummaryTrace {
  std::string video_id;
  std::string generic_summary;
  std::vector<RepromptRound> rounds;
  Termination terminated_by = Termination::BudgetExhausted;

  bool operator==(const SummaryTrace&) const = default;
};

struct Provenance {
  RunConfig config;
  std::map<std::string, std::string> models;         // role tag -> model id
  std::map<std::string, std::string> prompt_hashes;  // template -> fingerprint
  std::vector<int> ungrounded_sentences;             // no trace overlap at all
  std::string citation_scheme = "lexical-unigram-recall";
  std::string generated_at;  // set when the artifact is written, never by the engine
};

struct Article {
  std::string event_id;
  std::string body;
  std::vector<std::vector<std::string>> citations;  // per sentence, sorted video ids
  Provenance provenance;
};

struct Feedback {
  enum class Kind { Sufficient, RePrompt };
  Kind kind = Kind::Sufficient;
  std::string query;     // full reprompt line when kind == RePrompt
  bool fallback = false; // reply fit neither shape; degraded to Sufficient
};

inline constexpr std::string_view kRepromptPrefix = "Describe the video in detail and focus on";
inline constexpr std::string_view kSentinel = "no new query";
inline constexpr std::string_view kLeadMarker = "<lead>";

/// One pass of the fixed generic prompt over the video. Gateway errors are
/// rethrown with the video id prepended.
std::string generic_summarize(const corpus::VideoRecord& video, gateway::Gateway& gw,
                              const PromptSet& prompts);

/// Asks the reasoner whether `summary` suffices for `event_name`. The reply
/// is reduced to its final blank-line-separated block, then routed: the
/// sentinel means Sufficient, the mandated prefix means RePrompt, anything
/// else degrades to Sufficient with a logged warning.
Feedback relevance_feedback(const std::string& event_name, const std::string& summary,
                            gateway::Gateway& gw, const PromptSet& prompts);

/// Generic summary plus at most budget_r reprompt rounds; stops early on
/// Sufficient. Summarizer calls = 1 + |rounds|; reasoner calls <= budget_r.
SummaryTrace reprompt_loop(const corpus::VideoRecord& video, const std::string& event_name,
                           int budget_r, gateway::Gateway& gw, const PromptSet& prompts);

/// Aggregates traces (and optional transcripts, keyed by video id) into the
/// lead article. The reply must start with the lead marker; one retry,
/// then MissingLeadMarker.
Article synthesize_article(const std::vector<SummaryTrace>& traces,
                           const std::map<std::string, std::string>& transcripts,
                           const corpus::EventTopic& event, gateway::Gateway& gw,
                           const PromptSet& prompts, const RunConfig& config);

/// Attributes each sentence to the video whose trace text (generic plus
/// round summaries) covers most of the sentence's unigrams; ties go to the
/// lowest video id; zero overlap everywhere leaves the citation set empty
/// and marks the sentence ungrounded.
std::vector<std::vector<std::string>> cite_sentences(const std::string& body,
                                                     const std::vector<SummaryTrace>& traces,
                                                     std::vector<int>* ungrounded = nullptr);

// Run artifacts: runs/{event_id}/{method}.json

struct RunArtifact {
  Article article;
  std::vector<SummaryTrace> traces;
};

/// Runs one method end to end over the event's videos (in input order) and
/// keeps the per-video traces alongside the article.
RunArtifact execute_run(const RunConfig& config, const corpus::EventTopic& event,
                        const std::vector<corpus::VideoRecord>& videos, gateway::Gateway& gw,
                        const PromptSet& prompts);

/// execute_run without the trace record.
Article run_method(const RunConfig& config, const corpus::EventTopic& event,
                   const std::vector<corpus::VideoRecord>& videos, gateway::Gateway& gw,
                   const PromptSet& prompts);

nlohmann::json run_artifact_to_json(const RunArtifact& artifact);
RunArtifact run_artifact_from_json(const nlohmann::json& spec);

std::filesystem::path write_run_artifact(const std::filesystem::path& runs_dir,
                                         const RunArtifact& artifact);
RunArtifact load_run_artifact(const std::filesystem::path& file);

}  // namespace cag::engine
