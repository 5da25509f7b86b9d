#include "cag/gateway.hpp"

namespace cag::gateway {

std::string role_name(Role role) {
  switch (role) {
    case Role::VideoSummarizer: return "VIDEO_SUMMARIZER";
    case Role::Reasoner: return "REASONER";
    case Role::Aggregator: return "AGGREGATOR";
    case Role::Extractor: return "EXTRACTOR";
    case Role::Judge: return "JUDGE";
    case Role::ExternalScorer: return "EXTERNAL_SCORER";
  }
  return "UNKNOWN";
}

std::optional<Role> role_from_string(const std::string& name) {
  if (name == "VIDEO_SUMMARIZER") return Role::VideoSummarizer;
  if (name == "REASONER") return Role::Reasoner;
  if (name == "AGGREGATOR") return Role::Aggregator;
  if (name == "EXTRACTOR") return Role::Extractor;
  if (name == "JUDGE") return Role::Judge;
  if (name == "EXTERNAL_SCORER") return Role::ExternalScorer;
  return std::nullopt;
}

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw InvalidRequest("chat request has no messages");
  }
  if (request.messages.back().speaker != Speaker::User) {
    throw InvalidRequest("last message must come from the user");
  }
  if (!request.media.empty() && request.role != Role::VideoSummarizer) {
    throw InvalidRequest("media attachments are only valid for VIDEO_SUMMARIZER, got " +
                         role_name(request.role));
  }
  for (const auto& m : request.media) {
    if (m.fps && *m.fps <= 0.0) {
      throw InvalidRequest("fps hint must be > 0");
    }
  }
  if (request.decoding.temperature < 0.0) {
    throw InvalidRequest("temperature must be >= 0");
  }
  if (request.decoding.max_tokens <= 0) {
    throw InvalidRequest("max_tokens must be positive");
  }
}

std::string request_text(const ChatRequest& request) {
  std::string out;
  for (const auto& message : request.messages) {
    if (!out.empty()) out.push_back('\n');
    out += message.content;
  }
  for (const auto& media : request.media) {
    out.push_back('\n');
    out += media.uri;
  }
  return out;
}

}  // namespace cag::gateway
