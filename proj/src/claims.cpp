#include "cag/claims.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "cag/logging.hpp"
#include "cag/prompts.hpp"
#include "cag/text.hpp"

namespace cag::claims {

namespace {

using nlohmann::json;

std::optional<std::vector<std::string>> parse_claim_array(const std::string& reply) {
  std::string body = text::trim(reply);
  json parsed;
  bool ok = false;
  try {
    parsed = json::parse(body);
    ok = true;
  } catch (const json::exception&) {
    const auto open = body.find('[');
    const auto close = body.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      try {
        parsed = json::parse(body.substr(open, close - open + 1));
        ok = true;
      } catch (const json::exception&) {
      }
    }
  }
  if (!ok || !parsed.is_array()) return std::nullopt;
  std::vector<std::string> claims;
  for (const auto& item : parsed) {
    if (!item.is_object() || !item.contains("claim") || !item["claim"].is_string()) {
      return std::nullopt;
    }
    std::string claim = text::trim(item["claim"].get<std::string>());
    if (!claim.empty()) claims.push_back(std::move(claim));
  }
  // An empty decomposition would break sentence coverage; let the caller
  // fall back to the whole sentence.
  if (claims.empty()) return std::nullopt;
  return claims;
}

/// Final YES/NO token of a judge reply, ignoring case and punctuation.
std::optional<bool> parse_verdict(const std::string& reply) {
  const auto tokens = text::tokenize(text::last_block(reply));
  if (tokens.empty()) return std::nullopt;
  const std::string& last = tokens.back();
  if (last == "yes") return true;
  if (last == "no") return false;
  return std::nullopt;
}

}  // namespace

std::string judge_kind_name(JudgeKind kind) {
  return kind == JudgeKind::HumanFile ? "HUMAN_FILE" : "LLM_JUDGE";
}

ClaimSet decompose(const std::string& article_body, gateway::Gateway& gw,
                   const std::string& decompose_template) {
  ClaimSet set;
  const auto sentences = text::split_sentences(article_body);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const std::string prompt =
        render_prompt(decompose_template,
                      {{"paragraph", article_body}, {"sentence", sentences[s]}});
    gateway::ChatRequest request;
    request.role = gateway::Role::Extractor;
    request.messages.push_back({gateway::Speaker::User, prompt});

    std::optional<std::vector<std::string>> claims;
    for (int attempt = 0; attempt < 2 && !claims; ++attempt) {
      claims = parse_claim_array(gw.complete(request).text);
    }
    if (claims) {
      for (auto& claim : *claims) {
        set.claims.push_back(std::move(claim));
        set.source_sentences.push_back(static_cast<int>(s));
        set.fallback.push_back(false);
      }
    } else {
      logging::warn("decomposition unusable for sentence " + std::to_string(s) +
                    "; keeping it whole");
      set.claims.push_back(sentences[s]);
      set.source_sentences.push_back(static_cast<int>(s));
      set.fallback.push_back(true);
    }
  }
  return set;
}

GroundingJudgment load_judgments(const std::filesystem::path& file, std::size_t claim_count) {
  std::ifstream in(file);
  if (!in) throw BadJudgmentsFile("cannot open judgments file: " + file.string());
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw BadJudgmentsFile("judgments file is not valid JSON: " + std::string(e.what()));
  }
  if (!spec.is_array()) throw BadJudgmentsFile("judgments file must be a JSON array");

  GroundingJudgment judgment;
  judgment.kind = JudgeKind::HumanFile;
  judgment.supported.resize(claim_count);
  for (const auto& entry : spec) {
    if (!entry.is_object() || !entry.contains("claim_index") || !entry.contains("video_id") ||
        !entry.contains("supported")) {
      throw BadJudgmentsFile("each judgment needs claim_index, video_id and supported");
    }
    const auto index = entry["claim_index"].get<long>();
    if (index < 0 || static_cast<std::size_t>(index) >= claim_count) {
      throw BadJudgmentsFile("claim_index " + std::to_string(index) + " out of range");
    }
    const int supported = entry["supported"].get<int>();
    if (supported != 0 && supported != 1) {
      throw BadJudgmentsFile("supported must be 0 or 1");
    }
    judgment.supported[static_cast<std::size_t>(index)][entry["video_id"].get<std::string>()] =
        supported;
  }
  for (std::size_t i = 0; i < claim_count; ++i) {
    if (judgment.supported[i].empty()) {
      throw IncompleteJudgments("claim " + std::to_string(i) + " has no judged video");
    }
  }
  return judgment;
}

GroundingJudgment judge_grounding(const ClaimSet& claims,
                                  const std::vector<std::string>& video_ids,
                                  const std::map<std::string, std::string>& evidence,
                                  gateway::Gateway& gw, const std::string& judge_template) {
  if (video_ids.empty()) {
    throw IncompleteJudgments("judge_grounding needs at least one video");
  }
  GroundingJudgment judgment;
  judgment.kind = JudgeKind::LlmJudge;
  judgment.supported.resize(claims.claims.size());

  for (std::size_t c = 0; c < claims.claims.size(); ++c) {
    for (const auto& video_id : video_ids) {
      std::string video_evidence;
      auto it = evidence.find(video_id);
      if (it != evidence.end()) video_evidence = it->second;
      const std::string prompt = render_prompt(
          judge_template, {{"claim", claims.claims[c]}, {"evidence", video_evidence}});
      gateway::ChatRequest request;
      request.role = gateway::Role::Judge;
      request.messages.push_back({gateway::Speaker::User, prompt});

      std::optional<bool> verdict;
      for (int attempt = 0; attempt < 2 && !verdict; ++attempt) {
        verdict = parse_verdict(gw.complete(request).text);
      }
      if (!verdict) {
        logging::warn("unparseable judge verdict for claim " + std::to_string(c) + " video " +
                      video_id + "; counting unsupported");
        judgment.unparseable.emplace_back(c, video_id);
        judgment.supported[c][video_id] = 0;
      } else {
        judgment.supported[c][video_id] = *verdict ? 1 : 0;
      }
    }
  }
  return judgment;
}

double groundedness(const GroundingJudgment& judgment, const ClaimSet& claims) {
  if (claims.claims.empty()) {
    throw EmptyClaimSet("groundedness is undefined for an empty claim set");
  }
  if (judgment.supported.size() < claims.claims.size()) {
    throw IncompleteJudgments("judgment covers " + std::to_string(judgment.supported.size()) +
                              " of " + std::to_string(claims.claims.size()) + " claims");
  }
  double supported = 0.0;
  for (std::size_t c = 0; c < claims.claims.size(); ++c) {
    if (judgment.supported[c].empty()) {
      throw IncompleteJudgments("claim " + std::to_string(c) + " has no judged video");
    }
    for (const auto& [video_id, value] : judgment.supported[c]) {
      if (value != 0) {
        supported += 1.0;
        break;
      }
    }
  }
  return supported / static_cast<double>(claims.claims.size());
}

}  // namespace cag::claims
