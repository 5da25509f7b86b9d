#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cag/errors.hpp"
#include "cag/gateway.hpp"

namespace cag::claims {

class EmptyClaimSet : public Error {
public:
  using Error::Error;
};

class IncompleteJudgments : public Error {
public:
  using Error::Error;
};

class BadJudgmentsFile : public Error {
public:
  using Error::Error;
};

/// Atomic claims decomposed from one article, in sentence order.
struct ClaimSet {
  std::string event_id;
  std::string method;
  std::vector<std::string> claims;
  std::vector<int> source_sentences;  // per claim, originating sentence index
  std::vector<bool> fallback;         // sentence kept whole after a bad reply
};

enum class JudgeKind { HumanFile, LlmJudge };

std::string judge_kind_name(JudgeKind kind);

struct GroundingJudgment {
  JudgeKind kind = JudgeKind::HumanFile;
  /// supported[claim_index][video_id] in {0, 1}. Every claim needs at least
  /// one judged video before groundedness can be scored.
  std::vector<std::map<std::string, int>> supported;
  /// (claim_index, video_id) pairs whose verdict never parsed; counted
  /// unsupported.
  std::vector<std::pair<std::size_t, std::string>> unparseable;
};

/// Splits the article into sentences and asks the EXTRACTOR role to
/// decompose each one (few-shot JSON prompt, article as paragraph context).
/// A sentence whose reply stays unusable after one retry is kept whole as a
/// single flagged claim, so sentence coverage always holds.
ClaimSet decompose(const std::string& article_body, gateway::Gateway& gw,
                   const std::string& decompose_template);

/// Binary verdicts from a human judgments file:
/// [{claim_index, video_id, supported}]. Throws IncompleteJudgments when a
/// claim has no judged video.
GroundingJudgment load_judgments(const std::filesystem::path& file, std::size_t claim_count);

/// LLM judge: one strict YES/NO question per (claim, video), evidence text
/// per video supplied by the caller (trace text plus transcript). Verdicts
/// that never parse count as unsupported and are flagged.
GroundingJudgment judge_grounding(const ClaimSet& claims,
                                  const std::vector<std::string>& video_ids,
                                  const std::map<std::string, std::string>& evidence,
                                  gateway::Gateway& gw, const std::string& judge_template);

/// Fraction of claims supported by at least one video. Throws EmptyClaimSet
/// for an empty claim set (never returns 0 by convention) and
/// IncompleteJudgments when a claim lacks judgments.
double groundedness(const GroundingJudgment& judgment, const ClaimSet& claims);

}  // namespace cag::claims
