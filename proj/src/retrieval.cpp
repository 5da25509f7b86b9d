#include "cag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cag/logging.hpp"
#include "cag/text.hpp"

namespace cag::retrieval {

bool RankedRun::has_event(const std::string& event_id) const {
  return by_event_.count(event_id) > 0;
}

const std::vector<RunEntry>& RankedRun::ranking(const std::string& event_id) const {
  auto it = by_event_.find(event_id);
  if (it == by_event_.end()) throw UnknownEvent("run has no event \"" + event_id + "\"");
  return it->second;
}

RankedRun load_run(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MalformedLine("cannot open run file: " + file.string());

  RankedRun run;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;

    std::istringstream fields(trimmed);
    std::string event_id, q0, video_id, rank_field, score_field, tag;
    if (!(fields >> event_id >> q0 >> video_id >> rank_field >> score_field >> tag)) {
      throw MalformedLine(file.filename().string() + " line " + std::to_string(line_number) +
                          ": expected six whitespace-separated columns");
    }
    double score = 0.0;
    try {
      std::size_t consumed = 0;
      score = std::stod(score_field, &consumed);
      if (consumed != score_field.size()) throw std::invalid_argument(score_field);
    } catch (const std::exception&) {
      throw MalformedLine(file.filename().string() + " line " + std::to_string(line_number) +
                          ": score \"" + score_field + "\" is not a number");
    }
    if (!seen.emplace(event_id, video_id).second) {
      throw DuplicateEntry(file.filename().string() + " line " + std::to_string(line_number) +
                           ": duplicate entry for event \"" + event_id + "\" video \"" +
                           video_id + "\"");
    }
    if (run.tag_.empty()) run.tag_ = tag;
    if (!run.by_event_.count(event_id)) run.event_order_.push_back(event_id);
    run.by_event_[event_id].push_back(RunEntry{video_id, score});
  }

  for (auto& [event_id, entries] : run.by_event_) {
    const bool sorted = std::is_sorted(
        entries.begin(), entries.end(),
        [](const RunEntry& a, const RunEntry& b) { return a.score > b.score; });
    if (!sorted) {
      logging::warn(file.filename().string() + ": scores out of order for event \"" + event_id +
                    "\"; re-sorting");
      std::stable_sort(entries.begin(), entries.end(),
                       [](const RunEntry& a, const RunEntry& b) { return a.score > b.score; });
    }
  }
  return run;
}

std::vector<std::string> top_k(const RankedRun& run, const std::string& event_id, std::size_t k) {
  const auto& entries = run.ranking(event_id);
  std::vector<std::string> ids;
  ids.reserve(std::min(k, entries.size()));
  for (std::size_t i = 0; i < entries.size() && i < k; ++i) {
    ids.push_back(entries[i].video_id);
  }
  return ids;
}

Qrels Qrels::from_corpus(const corpus::Corpus& corpus) {
  Qrels qrels;
  for (const auto& event : corpus.events()) {
    for (const auto& video_id : event.relevant_video_ids) {
      qrels.grades[event.id][video_id] = 1;
    }
  }
  return qrels;
}

Qrels Qrels::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MalformedLine("cannot open qrels file: " + file.string());
  Qrels qrels;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream fields(trimmed);
    std::string event_id, zero, video_id;
    int grade = 0;
    if (!(fields >> event_id >> zero >> video_id >> grade) || grade < 0) {
      throw MalformedLine(file.filename().string() + " line " + std::to_string(line_number) +
                          ": expected `event_id 0 video_id grade` with grade >= 0");
    }
    qrels.grades[event_id][video_id] = grade;
  }
  return qrels;
}

NdcgReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
  NdcgReport report;
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& event_id : run.event_ids()) {
    auto graded = qrels.grades.find(event_id);
    std::vector<int> grades;
    if (graded != qrels.grades.end()) {
      for (const auto& [video_id, grade] : graded->second) {
        if (grade > 0) grades.push_back(grade);
      }
    }
    if (grades.empty()) {
      report.skipped.push_back(event_id);
      continue;
    }

    const auto& ranking = run.ranking(event_id);
    double dcg = 0.0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
      int grade = 0;
      auto it = graded->second.find(ranking[i].video_id);
      if (it != graded->second.end()) grade = it->second;
      dcg += static_cast<double>(grade) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < grades.size() && i < k; ++i) {
      idcg += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    const double ndcg = dcg / idcg;
    report.per_event[event_id] = ndcg;
    sum += ndcg;
    ++scored;
  }
  if (scored > 0) report.macro_average = sum / static_cast<double>(scored);
  return report;
}

}  // namespace cag::retrieval
