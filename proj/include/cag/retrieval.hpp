#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cag/corpus.hpp"
#include "cag/errors.hpp"

namespace cag::retrieval {

class MalformedLine : public Error {
public:
  using Error::Error;
};

class DuplicateEntry : public Error {
public:
  using Error::Error;
};

class UnknownEvent : public Error {
public:
  using Error::Error;
};

struct RunEntry {
  std::string video_id;
  double score = 0.0;
};

/// A retriever's ranked output: per event, entries in non-increasing score
/// order (ties keep file order), no duplicate video per event.
class RankedRun {
public:
  const std::string& tag() const { return tag_; }
  const std::vector<std::string>& event_ids() const { return event_order_; }
  bool has_event(const std::string& event_id) const;
  const std::vector<RunEntry>& ranking(const std::string& event_id) const;

private:
  friend RankedRun load_run(const std::filesystem::path&);
  std::string tag_;
  std::vector<std::string> event_order_;  // first-appearance order
  std::map<std::string, std::vector<RunEntry>> by_event_;
};

/// Parses the six-column run format: `event_id Q0 video_id rank score tag`.
/// '#' lines are comments. Out-of-order scores are stably re-sorted with a
/// logged warning; duplicate (event, video) pairs are errors.
RankedRun load_run(const std::filesystem::path& file);

/// First min(k, available) video ids for the event, in rank order.
std::vector<std::string> top_k(const RankedRun& run, const std::string& event_id, std::size_t k);

/// Relevance grades per event. Binary grade 1 when derived from an event's
/// relevant video set; an explicit qrels file may carry larger grades.
struct Qrels {
  std::map<std::string, std::map<std::string, int>> grades;

  static Qrels from_corpus(const corpus::Corpus& corpus);
  /// `event_id 0 video_id grade` lines.
  static Qrels load(const std::filesystem::path& file);
};

struct NdcgReport {
  std::map<std::string, double> per_event;
  std::vector<std::string> skipped;  // scored events with no relevant videos
  double macro_average = 0.0;
};

/// nDCG@k with linear gain and log2(i+1) discount. Events whose qrels hold
/// no relevant video are skipped and listed, not scored.
NdcgReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);

}  // namespace cag::retrieval
