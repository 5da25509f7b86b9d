#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cag/agreement.hpp"
#include "cag/errors.hpp"

namespace cag::corpus {

class MissingFile : public Error {
public:
  using Error::Error;
};

/// A field is absent, has the wrong type, or holds an out-of-range value.
/// The message names the offending field.
class SchemaViolation : public Error {
public:
  using Error::Error;
};

/// A cross-reference points at an id that does not exist. Names the id.
class DanglingReference : public Error {
public:
  using Error::Error;
};

class EmptyCorpus : public Error {
public:
  using Error::Error;
};

class UnknownId : public Error {
public:
  using Error::Error;
};

/// Evidence modality of one subclaim within one video.
enum class Modality { Audio, Video, Ocr };

std::string modality_name(Modality modality);
std::optional<Modality> modality_from_string(const std::string& name);

/// The seven event ontology labels, in canonical order.
const std::vector<std::string>& event_type_labels();

struct EventTopic {
  std::string id;
  std::string name;  // doubles as the query Q
  std::string event_type;
  std::string reference_article;
  std::vector<std::string> relevant_video_ids;
  int year = 0;

  bool operator==(const EventTopic&) const = default;
};

struct VideoRecord {
  std::string id;
  std::string uri;
  double duration_s = 0.0;
  std::optional<std::string> transcript;
  bool ocr_present = false;

  bool operator==(const VideoRecord&) const = default;
};

struct Subclaim {
  std::string id;
  std::string event_id;
  std::string text;
  std::map<std::string, std::set<Modality>> support;  // video id -> modalities
  bool unsupported_everywhere = false;

  bool operator==(const Subclaim&) const = default;
};

/// Immutable after load; safe to share across readers.
class Corpus {
public:
  const std::vector<EventTopic>& events() const { return events_; }
  const std::vector<VideoRecord>& videos() const { return videos_; }
  const std::vector<Subclaim>& subclaims() const { return subclaims_; }
  const std::optional<AnnotationMatrix>& annotations() const { return annotations_; }

  const EventTopic& event(const std::string& id) const;
  const VideoRecord& video(const std::string& id) const;
  bool has_video(const std::string& id) const;

  bool operator==(const Corpus& other) const;

private:
  friend Corpus load_corpus(const std::filesystem::path&);
  void index();

  std::vector<EventTopic> events_;
  std::vector<VideoRecord> videos_;
  std::vector<Subclaim> subclaims_;
  std::optional<AnnotationMatrix> annotations_;
  std::map<std::string, std::size_t> event_index_;
  std::map<std::string, std::size_t> video_index_;
};

/// Loads events.json, videos.json and subclaims.json (plus optional
/// annotations.json) from `root`, resolving every cross-reference.
/// Transcript files named by videos.json are read eagerly.
Corpus load_corpus(const std::filesystem::path& root);

/// Writes the corpus back out in the same schema; transcripts land under
/// transcripts/<video_id>.txt. load_corpus(save_corpus(c)) == c.
void save_corpus(const Corpus& corpus, const std::filesystem::path& root);

struct StatsReport {
  std::size_t event_count = 0;
  std::size_t video_count = 0;
  std::size_t subclaim_count = 0;
  double mean_video_length_s = 0.0;
  double mean_article_tokens = 0.0;  // whitespace tokenization
  double mean_videos_per_event = 0.0;
  double mean_audio_subclaims = 0.0;
  double mean_video_subclaims = 0.0;
  double mean_ocr_subclaims = 0.0;
  double mean_all_modality_subclaims = 0.0;  // supported by all three
  double mean_total_subclaims = 0.0;
};

StatsReport corpus_stats(const Corpus& corpus);

}  // namespace cag::corpus
