#include "cag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cag/logging.hpp"
#include "cag/text.hpp"

namespace cag::corpus {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingFile("missing file: " + file.string());
  json parsed;
  try {
    in >> parsed;
  } catch (const json::exception& e) {
    throw SchemaViolation(file.filename().string() + ": invalid JSON: " + e.what());
  }
  return parsed;
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingFile("missing file: " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& file, std::string_view content) {
  std::ofstream out(file, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void warn_unknown_fields(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!known.count(key)) {
      logging::warn(where + ": ignoring unknown field \"" + key + "\"");
    }
  }
}

const json& require(const json& object, const char* field, const std::string& where) {
  if (!object.contains(field)) {
    throw SchemaViolation(where + ": missing field \"" + field + "\"");
  }
  return object[field];
}

std::string require_string(const json& object, const char* field, const std::string& where) {
  const json& value = require(object, field, where);
  if (!value.is_string()) {
    throw SchemaViolation(where + ": field \"" + field + "\" must be a string");
  }
  return value.get<std::string>();
}

}  // namespace

std::string modality_name(Modality modality) {
  switch (modality) {
    case Modality::Audio: return "AUDIO";
    case Modality::Video: return "VIDEO";
    case Modality::Ocr: return "OCR";
  }
  return "UNKNOWN";
}

std::optional<Modality> modality_from_string(const std::string& name) {
  if (name == "AUDIO") return Modality::Audio;
  if (name == "VIDEO") return Modality::Video;
  if (name == "OCR") return Modality::Ocr;
  return std::nullopt;
}

const std::vector<std::string>& event_type_labels() {
  static const std::vector<std::string> labels = {
      "sporting_event",        "natural_disaster", "election", "social_event",
      "demonstration",         "discovery_launch", "political_development",
  };
  return labels;
}

const EventTopic& Corpus::event(const std::string& id) const {
  auto it = event_index_.find(id);
  if (it == event_index_.end()) throw UnknownId("unknown event id: " + id);
  return events_[it->second];
}

const VideoRecord& Corpus::video(const std::string& id) const {
  auto it = video_index_.find(id);
  if (it == video_index_.end()) throw UnknownId("unknown video id: " + id);
  return videos_[it->second];
}

bool Corpus::has_video(const std::string& id) const { return video_index_.count(id) > 0; }

bool Corpus::operator==(const Corpus& other) const {
  return events_ == other.events_ && videos_ == other.videos_ &&
         subclaims_ == other.subclaims_ && annotations_ == other.annotations_;
}

void Corpus::index() {
  event_index_.clear();
  video_index_.clear();
  for (std::size_t i = 0; i < events_.size(); ++i) event_index_[events_[i].id] = i;
  for (std::size_t i = 0; i < videos_.size(); ++i) video_index_[videos_[i].id] = i;
}

Corpus load_corpus(const std::filesystem::path& root) {
  Corpus corpus;

  const json events = read_json_file(root / "events.json");
  if (!events.is_array()) throw SchemaViolation("events.json: top level must be an array");
  const std::set<std::string> event_fields = {"id",   "name",
                                              "event_type", "reference_article",
                                              "relevant_video_ids", "year"};
  for (std::size_t i = 0; i < events.size(); ++i) {
    const json& entry = events[i];
    const std::string where = "events.json: event[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw SchemaViolation(where + " must be an object");
    warn_unknown_fields(entry, event_fields, where);

    EventTopic event;
    event.id = require_string(entry, "id", where);
    event.name = require_string(entry, "name", where);
    event.event_type = require_string(entry, "event_type", where);
    const auto& labels = event_type_labels();
    if (std::find(labels.begin(), labels.end(), event.event_type) == labels.end()) {
      throw SchemaViolation(where + ": field \"event_type\" has unknown label \"" +
                            event.event_type + "\"");
    }
    event.reference_article = require_string(entry, "reference_article", where);
    if (text::trim(event.reference_article).empty()) {
      throw SchemaViolation(where + ": field \"reference_article\" must be non-empty");
    }
    const json& ids = require(entry, "relevant_video_ids", where);
    if (!ids.is_array() || ids.empty()) {
      throw SchemaViolation(where + ": field \"relevant_video_ids\" must be a non-empty array");
    }
    std::set<std::string> seen_relevant;
    for (const auto& id : ids) {
      const std::string video_id = id.get<std::string>();
      if (!seen_relevant.insert(video_id).second) {
        throw SchemaViolation(where + ": duplicate relevant video id \"" + video_id + "\"");
      }
      event.relevant_video_ids.push_back(video_id);
    }
    const json& year = require(entry, "year", where);
    if (!year.is_number_integer()) {
      throw SchemaViolation(where + ": field \"year\" must be an integer");
    }
    event.year = year.get<int>();
    corpus.events_.push_back(std::move(event));
  }

  const json videos = read_json_file(root / "videos.json");
  if (!videos.is_array()) throw SchemaViolation("videos.json: top level must be an array");
  const std::set<std::string> video_fields = {"id", "uri", "duration_s", "transcript_path",
                                              "ocr_present"};
  std::set<std::string> seen_video_ids;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const json& entry = videos[i];
    const std::string where = "videos.json: video[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw SchemaViolation(where + " must be an object");
    warn_unknown_fields(entry, video_fields, where);

    VideoRecord video;
    video.id = require_string(entry, "id", where);
    if (!seen_video_ids.insert(video.id).second) {
      throw SchemaViolation(where + ": duplicate video id \"" + video.id + "\"");
    }
    video.uri = require_string(entry, "uri", where);
    if (text::trim(video.uri).empty()) {
      throw SchemaViolation(where + ": field \"uri\" must be non-empty");
    }
    const json& duration = require(entry, "duration_s", where);
    if (!duration.is_number()) {
      throw SchemaViolation(where + ": field \"duration_s\" must be a number");
    }
    video.duration_s = duration.get<double>();
    if (video.duration_s < 0.0) {
      throw SchemaViolation(where + ": field \"duration_s\" must be >= 0");
    }
    if (entry.contains("transcript_path")) {
      const std::string rel = require_string(entry, "transcript_path", where);
      video.transcript = read_text_file(root / rel);
    }
    if (entry.contains("ocr_present")) {
      if (!entry["ocr_present"].is_boolean()) {
        throw SchemaViolation(where + ": field \"ocr_present\" must be a boolean");
      }
      video.ocr_present = entry["ocr_present"].get<bool>();
    }
    corpus.videos_.push_back(std::move(video));
  }

  const json subclaims = read_json_file(root / "subclaims.json");
  if (!subclaims.is_array()) throw SchemaViolation("subclaims.json: top level must be an array");
  const std::set<std::string> claim_fields = {"id", "event_id", "text", "support"};
  for (std::size_t i = 0; i < subclaims.size(); ++i) {
    const json& entry = subclaims[i];
    const std::string where = "subclaims.json: subclaim[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw SchemaViolation(where + " must be an object");
    warn_unknown_fields(entry, claim_fields, where);

    Subclaim claim;
    claim.id = require_string(entry, "id", where);
    claim.event_id = require_string(entry, "event_id", where);
    claim.text = require_string(entry, "text", where);
    if (text::trim(claim.text).empty()) {
      throw SchemaViolation(where + ": field \"text\" must be non-empty");
    }
    const json& support = require(entry, "support", where);
    if (!support.is_object()) {
      throw SchemaViolation(where + ": field \"support\" must be an object");
    }
    for (const auto& [video_id, modalities] : support.items()) {
      if (!modalities.is_array()) {
        throw SchemaViolation(where + ": support for \"" + video_id + "\" must be an array");
      }
      std::set<Modality> parsed;
      for (const auto& value : modalities) {
        const auto modality = modality_from_string(value.get<std::string>());
        if (!modality) {
          throw SchemaViolation(where + ": unknown modality \"" + value.get<std::string>() +
                                "\" for video \"" + video_id + "\"");
        }
        parsed.insert(*modality);
      }
      claim.support[video_id] = std::move(parsed);
    }
    claim.unsupported_everywhere = true;
    for (const auto& [video_id, modalities] : claim.support) {
      if (!modalities.empty()) {
        claim.unsupported_everywhere = false;
        break;
      }
    }
    corpus.subclaims_.push_back(std::move(claim));
  }

  const std::filesystem::path annotations_file = root / "annotations.json";
  if (std::filesystem::exists(annotations_file)) {
    const json spec = read_json_file(annotations_file);
    const std::string where = "annotations.json";
    AnnotationMatrix matrix;
    const json& annotators = require(spec, "annotators", where);
    for (const auto& a : annotators) matrix.annotators.push_back(a.get<std::string>());
    const json& items = require(spec, "items", where);
    for (const auto& item : items) {
      matrix.items.emplace_back(require_string(item, "claim_id", where + ": item"),
                                require_string(item, "video_id", where + ": item"));
    }
    const json& judgments = require(spec, "judgments", where);
    for (const auto& [annotator, entries] : judgments.items()) {
      if (std::find(matrix.annotators.begin(), matrix.annotators.end(), annotator) ==
          matrix.annotators.end()) {
        logging::warn(where + ": ignoring judgments for unlisted annotator \"" + annotator +
                      "\"");
      }
    }
    matrix.judgments.resize(matrix.annotators.size());
    for (std::size_t a = 0; a < matrix.annotators.size(); ++a) {
      const std::string& annotator = matrix.annotators[a];
      auto& row = matrix.judgments[a];
      row.assign(matrix.items.size(), std::nullopt);
      if (!judgments.contains(annotator)) continue;
      const json& entries = judgments[annotator];
      if (!entries.is_array() || entries.size() != matrix.items.size()) {
        throw SchemaViolation(where + ": judgments for \"" + annotator +
                              "\" must be an array aligned with items");
      }
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].is_null()) continue;
        AnnotationMatrix::ItemJudgment judgment{};
        for (const Channel channel :
             {Channel::Audio, Channel::Video, Channel::Ocr, Channel::None}) {
          const std::string key = channel_name(channel);
          const json& value = require(entries[i], key.c_str(),
                                      where + ": judgments[" + annotator + "][" +
                                          std::to_string(i) + "]");
          const int binary = value.get<int>();
          if (binary != 0 && binary != 1) {
            throw SchemaViolation(where + ": judgment values must be 0 or 1");
          }
          judgment[static_cast<std::size_t>(channel)] = binary;
        }
        row[i] = judgment;
      }
    }
    corpus.annotations_ = std::move(matrix);
  }

  corpus.index();

  // Cross-reference resolution: every referenced id must exist.
  for (const auto& event : corpus.events_) {
    for (const auto& video_id : event.relevant_video_ids) {
      if (!corpus.has_video(video_id)) {
        throw DanglingReference("event " + event.id + " references unknown video id \"" +
                                video_id + "\"");
      }
    }
  }
  std::set<std::string> claim_ids;
  for (const auto& claim : corpus.subclaims_) {
    claim_ids.insert(claim.id);
    if (!corpus.event_index_.count(claim.event_id)) {
      throw DanglingReference("subclaim " + claim.id + " references unknown event id \"" +
                              claim.event_id + "\"");
    }
    for (const auto& [video_id, modalities] : claim.support) {
      if (!corpus.has_video(video_id)) {
        throw DanglingReference("subclaim " + claim.id + " references unknown video id \"" +
                                video_id + "\"");
      }
    }
  }
  if (corpus.annotations_) {
    for (const auto& [claim_id, video_id] : corpus.annotations_->items) {
      if (!claim_ids.count(claim_id)) {
        throw DanglingReference("annotations reference unknown claim id \"" + claim_id + "\"");
      }
      if (!corpus.has_video(video_id)) {
        throw DanglingReference("annotations reference unknown video id \"" + video_id + "\"");
      }
    }
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);

  json events = json::array();
  for (const auto& event : corpus.events()) {
    events.push_back({
        {"id", event.id},
        {"name", event.name},
        {"event_type", event.event_type},
        {"reference_article", event.reference_article},
        {"relevant_video_ids", event.relevant_video_ids},
        {"year", event.year},
    });
  }
  write_text_file(root / "events.json", events.dump(2) + "\n");

  bool any_transcript = false;
  for (const auto& video : corpus.videos()) {
    if (video.transcript) any_transcript = true;
  }
  if (any_transcript) std::filesystem::create_directories(root / "transcripts");

  json videos = json::array();
  for (const auto& video : corpus.videos()) {
    json entry = {
        {"id", video.id},
        {"uri", video.uri},
        {"duration_s", video.duration_s},
    };
    if (video.ocr_present) entry["ocr_present"] = true;
    if (video.transcript) {
      const std::string rel = "transcripts/" + video.id + ".txt";
      write_text_file(root / rel, *video.transcript);
      entry["transcript_path"] = rel;
    }
    videos.push_back(std::move(entry));
  }
  write_text_file(root / "videos.json", videos.dump(2) + "\n");

  json subclaims = json::array();
  for (const auto& claim : corpus.subclaims()) {
    json support = json::object();
    for (const auto& [video_id, modalities] : claim.support) {
      json list = json::array();
      for (const auto modality : modalities) list.push_back(modality_name(modality));
      support[video_id] = std::move(list);
    }
    subclaims.push_back({
        {"id", claim.id},
        {"event_id", claim.event_id},
        {"text", claim.text},
        {"support", std::move(support)},
    });
  }
  write_text_file(root / "subclaims.json", subclaims.dump(2) + "\n");

  if (corpus.annotations()) {
    const AnnotationMatrix& matrix = *corpus.annotations();
    json items = json::array();
    for (const auto& [claim_id, video_id] : matrix.items) {
      items.push_back({{"claim_id", claim_id}, {"video_id", video_id}});
    }
    json judgments = json::object();
    for (std::size_t a = 0; a < matrix.annotators.size(); ++a) {
      json row = json::array();
      for (const auto& slot : matrix.judgments[a]) {
        if (!slot) {
          row.push_back(nullptr);
          continue;
        }
        row.push_back({
            {"AUDIO", (*slot)[static_cast<std::size_t>(Channel::Audio)]},
            {"VIDEO", (*slot)[static_cast<std::size_t>(Channel::Video)]},
            {"OCR", (*slot)[static_cast<std::size_t>(Channel::Ocr)]},
            {"NONE", (*slot)[static_cast<std::size_t>(Channel::None)]},
        });
      }
      judgments[matrix.annotators[a]] = std::move(row);
    }
    const json spec = {
        {"annotators", matrix.annotators},
        {"items", std::move(items)},
        {"judgments", std::move(judgments)},
    };
    write_text_file(root / "annotations.json", spec.dump(2) + "\n");
  }
}

StatsReport corpus_stats(const Corpus& corpus) {
  if (corpus.events().empty() || corpus.videos().empty()) {
    throw EmptyCorpus("corpus_stats needs at least one event and one video");
  }

  StatsReport report;
  report.event_count = corpus.events().size();
  report.video_count = corpus.videos().size();
  report.subclaim_count = corpus.subclaims().size();

  double total_duration = 0.0;
  for (const auto& video : corpus.videos()) total_duration += video.duration_s;
  report.mean_video_length_s = total_duration / static_cast<double>(report.video_count);

  double total_article_tokens = 0.0;
  double total_videos_per_event = 0.0;
  for (const auto& event : corpus.events()) {
    total_article_tokens +=
        static_cast<double>(text::whitespace_token_count(event.reference_article));
    total_videos_per_event += static_cast<double>(event.relevant_video_ids.size());
  }
  const double event_count = static_cast<double>(report.event_count);
  report.mean_article_tokens = total_article_tokens / event_count;
  report.mean_videos_per_event = total_videos_per_event / event_count;

  double audio = 0.0, video = 0.0, ocr = 0.0, all_three = 0.0, total = 0.0;
  for (const auto& claim : corpus.subclaims()) {
    total += 1.0;
    std::set<Modality> anywhere;
    for (const auto& [video_id, modalities] : claim.support) {
      anywhere.insert(modalities.begin(), modalities.end());
    }
    if (anywhere.count(Modality::Audio)) audio += 1.0;
    if (anywhere.count(Modality::Video)) video += 1.0;
    if (anywhere.count(Modality::Ocr)) ocr += 1.0;
    if (anywhere.size() == 3) all_three += 1.0;
  }
  report.mean_audio_subclaims = audio / event_count;
  report.mean_video_subclaims = video / event_count;
  report.mean_ocr_subclaims = ocr / event_count;
  report.mean_all_modality_subclaims = all_three / event_count;
  report.mean_total_subclaims = total / event_count;
  return report;
}

}  // namespace cag::corpus
