#include "cag/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cag/logging.hpp"
#include "cag/text.hpp"

namespace cag::metrics {

namespace {

using nlohmann::json;

constexpr char kGramSep = '\x1f';

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (n <= 0 || tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key.push_back(kGramSep);
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

PrfScore prf_from_counts(double overlap, double pred_total, double ref_total) {
  PrfScore score;
  if (pred_total <= 0.0 || ref_total <= 0.0) {
    score.degenerate = true;
    return score;
  }
  score.precision = overlap / pred_total;
  score.recall = overlap / ref_total;
  if (score.precision + score.recall > 0.0) {
    score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  }
  return score;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

// Assignment on a square cost matrix (minimization) via potentials,
// O(n^3). Returns row -> column.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::optional<std::vector<std::string>> parse_string_array(const std::string& reply) {
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
  std::vector<std::string> answers;
  for (const auto& item : parsed) {
    if (!item.is_string()) return std::nullopt;
    answers.push_back(item.get<std::string>());
  }
  return answers;
}

}  // namespace

TokenSeq TokenSeq::tokenize(std::string_view s) {
  TokenSeq seq;
  seq.tokens_ = text::tokenize(s);
  return seq;
}

PrfScore rouge_n(std::string_view pred, std::string_view ref, int n) {
  const auto pred_tokens = text::tokenize(pred);
  const auto ref_tokens = text::tokenize(ref);
  const auto pred_grams = ngram_counts(pred_tokens, n);
  const auto ref_grams = ngram_counts(ref_tokens, n);

  double pred_total = 0.0, ref_total = 0.0, overlap = 0.0;
  for (const auto& [gram, count] : pred_grams) pred_total += count;
  for (const auto& [gram, count] : ref_grams) ref_total += count;
  for (const auto& [gram, count] : pred_grams) {
    auto it = ref_grams.find(gram);
    if (it != ref_grams.end()) overlap += std::min(count, it->second);
  }
  return prf_from_counts(overlap, pred_total, ref_total);
}

PrfScore rouge_l(std::string_view pred, std::string_view ref) {
  const auto pred_tokens = text::tokenize(pred);
  const auto ref_tokens = text::tokenize(ref);
  const double lcs = static_cast<double>(lcs_length(pred_tokens, ref_tokens));
  return prf_from_counts(lcs, static_cast<double>(pred_tokens.size()),
                         static_cast<double>(ref_tokens.size()));
}

double unigram_recall(const TokenSeq& candidate, const TokenSeq& reference) {
  if (reference.empty()) return 0.0;
  std::unordered_map<std::string, int> available;
  for (const auto& token : candidate.tokens()) ++available[token];
  double covered = 0.0;
  for (const auto& token : reference.tokens()) {
    auto it = available.find(token);
    if (it != available.end() && it->second > 0) {
      --it->second;
      covered += 1.0;
    }
  }
  return covered / static_cast<double>(reference.size());
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  std::vector<std::size_t> prev(b.size() + 1), curr(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const std::string na = text::normalize_span(a);
  const std::string nb = text::normalize_span(b);
  const std::size_t longest = std::max(na.size(), nb.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
}

double AnswerAlignment::total_weight() const {
  double total = 0.0;
  for (const auto& pair : pairs) total += pair.similarity;
  return total;
}

AnswerAlignment align_answers(const std::vector<std::string>& pred,
                              const std::vector<std::string>& ref) {
  AnswerAlignment alignment;
  const std::size_t n = std::max(pred.size(), ref.size());
  if (n == 0) return alignment;

  // Pad to square with zero similarity; minimize negated similarity.
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      cost[i][j] = -(1.0 - normalized_edit_distance(pred[i], ref[j]));
    }
  }
  const auto row_to_col = solve_assignment(cost);

  std::vector<bool> ref_matched(ref.size(), false);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t j = row_to_col[i];
    const double similarity = j < ref.size() ? -cost[i][j] : 0.0;
    if (j < ref.size() && similarity > 0.0) {
      alignment.pairs.push_back(AlignedPair{i, j, similarity});
      ref_matched[j] = true;
    } else {
      alignment.unmatched_pred.push_back(i);
    }
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (!ref_matched[j]) alignment.unmatched_ref.push_back(j);
  }
  return alignment;
}

QuestionBank QuestionBank::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw BadQuestionBank("cannot open question bank: " + file.string());
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw BadQuestionBank("question bank is not valid JSON: " + std::string(e.what()));
  }
  if (!spec.is_object()) throw BadQuestionBank("question bank must be a JSON object");
  QuestionBank bank;
  for (const auto& [event_type, questions] : spec.items()) {
    if (!questions.is_array() || questions.empty()) {
      throw BadQuestionBank("event type " + event_type + " needs a non-empty question list");
    }
    for (const auto& question : questions) {
      bank.questions_by_type[event_type].push_back(question.get<std::string>());
    }
  }
  return bank;
}

const std::vector<std::string>& QuestionBank::questions_for(const std::string& event_type) const {
  auto it = questions_by_type.find(event_type);
  if (it == questions_by_type.end()) {
    throw UnknownEventType("no questions for event type: " + event_type);
  }
  return it->second;
}

std::string QuestionBank::content_hash() const {
  json canonical = json::object();
  for (const auto& [event_type, questions] : questions_by_type) {
    canonical[event_type] = questions;
  }
  return text::fnv1a_hex(canonical.dump());
}

std::optional<std::vector<std::string>> extract_answers(const std::string& question,
                                                        std::string_view article,
                                                        gateway::Gateway& gw,
                                                        const std::string& extract_template) {
  std::string prompt = text::replace_all(extract_template, "{question}", question);
  prompt = text::replace_all(std::move(prompt), "{article}", std::string(article));

  gateway::ChatRequest request;
  request.role = gateway::Role::Extractor;
  request.messages.push_back({gateway::Speaker::User, prompt});

  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto response = gw.complete(request);
    if (auto answers = parse_string_array(response.text)) return answers;
  }
  return std::nullopt;
}

ArgScore arg_f1(std::string_view pred_article, std::string_view ref_article,
                const std::string& event_type, const QuestionBank& bank,
                gateway::Gateway& gw, const std::string& extract_template) {
  const auto& questions = bank.questions_for(event_type);

  ArgScore score;
  double edit_sum = 0.0, exact_sum = 0.0;
  for (const auto& question : questions) {
    const auto pred_answers = extract_answers(question, pred_article, gw, extract_template);
    const auto ref_answers = extract_answers(question, ref_article, gw, extract_template);
    if (!pred_answers || !ref_answers) {
      ++score.questions_failed;
      logging::warn("answer extraction unusable for question: " + question);
      continue;
    }
    if (ref_answers->empty()) {
      // No reference answers: nothing to recall against.
      ++score.questions_skipped;
      continue;
    }

    const auto alignment = align_answers(*pred_answers, *ref_answers);
    double edit_mass = 0.0, exact_mass = 0.0;
    for (const auto& pair : alignment.pairs) {
      edit_mass += pair.similarity;
      if (text::normalize_span((*pred_answers)[pair.pred_index]) ==
          text::normalize_span((*ref_answers)[pair.ref_index])) {
        exact_mass += 1.0;
      }
    }
    const auto f1 = [](double mass, double pred_n, double ref_n) {
      const double p = pred_n > 0.0 ? mass / pred_n : 0.0;
      const double r = ref_n > 0.0 ? mass / ref_n : 0.0;
      return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    };
    const double pred_n = static_cast<double>(pred_answers->size());
    const double ref_n = static_cast<double>(ref_answers->size());
    edit_sum += f1(edit_mass, pred_n, ref_n);
    exact_sum += f1(exact_mass, pred_n, ref_n);
    ++score.questions_scored;
  }

  if (score.questions_scored > 0) {
    score.defined = true;
    score.edit_f1 = edit_sum / score.questions_scored;
    score.exact_f1 = exact_sum / score.questions_scored;
  }
  return score;
}

std::string scorer_name(Scorer scorer) {
  return scorer == Scorer::BertScore ? "BERTSCORE" : "ALIGNSCORE";
}

ExternalScore external_score(std::string_view pred, std::string_view ref, Scorer scorer,
                             const ScorerEndpoint& endpoint) {
  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(endpoint.timeout_s, 0);
  client.set_read_timeout(endpoint.timeout_s, 0);

  const json body = {
      {"pred", std::string(pred)},
      {"ref", std::string(ref)},
      {"scorer", scorer_name(scorer)},
  };
  auto result = client.Post("/score", body.dump(), "application/json");
  if (!result) {
    throw Transport("scorer service unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Transport("scorer service returned status " + std::to_string(result->status));
  }
  json reply;
  try {
    reply = json::parse(result->body);
  } catch (const json::exception& e) {
    throw ProtocolViolation(std::string("scorer reply is not JSON: ") + e.what());
  }
  if (!reply.contains("score") || !reply["score"].is_number()) {
    throw ProtocolViolation("scorer reply has no numeric score");
  }
  ExternalScore external;
  external.score = reply["score"].get<double>();
  external.version = reply.value("version", "");
  return external;
}

}  // namespace cag::metrics
