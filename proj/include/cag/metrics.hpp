#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cag/errors.hpp"
#include "cag/gateway.hpp"

namespace cag::metrics {

/// Token sequence produced only by the canonical tokenizer (lowercase,
/// split on non-alphanumeric runs).
class TokenSeq {
public:
  static TokenSeq tokenize(std::string_view s);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

private:
  TokenSeq() = default;
  std::vector<std::string> tokens_;
};

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // an n-gram denominator was empty
};

/// Clipped n-gram overlap F1, n in {1, 2}. No stemming, no stopword removal.
PrfScore rouge_n(std::string_view pred, std::string_view ref, int n);

/// Longest-common-subsequence F1 over token sequences.
PrfScore rouge_l(std::string_view pred, std::string_view ref);

/// Fraction of `reference` unigrams covered by `candidate` (clipped counts).
/// Sentence-to-trace attribution runs on this.
double unigram_recall(const TokenSeq& candidate, const TokenSeq& reference);

/// Unit-cost Levenshtein distance (byte-level).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Levenshtein over normalized spans (lowercase, collapsed whitespace,
/// stripped edge punctuation) divided by the longer normalized length.
/// Both empty => 0.
double normalized_edit_distance(std::string_view a, std::string_view b);

struct AlignedPair {
  std::size_t pred_index = 0;
  std::size_t ref_index = 0;
  double similarity = 0.0;  // 1 - normalized_edit_distance
};

struct AnswerAlignment {
  std::vector<AlignedPair> pairs;  // ordered by pred_index; zero-weight pairs omitted
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_ref;

  double total_weight() const;
};

/// Maximum-weight bipartite matching between answer lists under
/// edit-distance similarity. O(n^3) assignment on the zero-padded square
/// matrix.
AnswerAlignment align_answers(const std::vector<std::string>& pred,
                              const std::vector<std::string>& ref);

class UnknownEventType : public Error {
public:
  using Error::Error;
};

class BadQuestionBank : public Error {
public:
  using Error::Error;
};

/// Role-focused questions per event-type label, loaded from questions.json.
struct QuestionBank {
  std::map<std::string, std::vector<std::string>> questions_by_type;

  static QuestionBank load(const std::filesystem::path& file);

  const std::vector<std::string>& questions_for(const std::string& event_type) const;

  /// Stable fingerprint of the bank contents, recorded in reports.
  std::string content_hash() const;
};

struct ArgScore {
  double edit_f1 = 0.0;
  double exact_f1 = 0.0;
  bool defined = false;       // false when no question had reference answers
  int questions_scored = 0;
  int questions_skipped = 0;  // both answer lists empty
  int questions_failed = 0;   // extractor reply unusable after retry
};

/// Answer-span F1 over the event type's questions. Answers are extracted
/// from both articles via the EXTRACTOR role (strict JSON string-array
/// replies), aligned per question by align_answers, and scored twice from
/// the same matching: edit (matched similarity mass) and exact (normalized
/// string equality). Macro-averaged over questions with non-empty reference
/// answers.
ArgScore arg_f1(std::string_view pred_article, std::string_view ref_article,
                const std::string& event_type, const QuestionBank& bank,
                gateway::Gateway& gw, const std::string& extract_template);

/// Extractor-facing helper: asks one question against one article and
/// parses the JSON array reply. nullopt = unusable after one retry.
std::optional<std::vector<std::string>> extract_answers(const std::string& question,
                                                        std::string_view article,
                                                        gateway::Gateway& gw,
                                                        const std::string& extract_template);

enum class Scorer { BertScore, AlignScore };

std::string scorer_name(Scorer scorer);

struct ScorerEndpoint {
  std::string base_url;
  int timeout_s = 120;
};

struct ExternalScore {
  double score = 0.0;
  std::string version;
};

/// POST {base_url}/score with {pred, ref, scorer}; returns the service's
/// scalar and version string.
ExternalScore external_score(std::string_view pred, std::string_view ref, Scorer scorer,
                             const ScorerEndpoint& endpoint);

}  // namespace cag::metrics
