#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cag/errors.hpp"

namespace cag::gateway {

enum class Role {
  VideoSummarizer,
  Reasoner,
  Aggregator,
  Extractor,
  Judge,
  ExternalScorer,
};

/// Canonical role tag, e.g. "VIDEO_SUMMARIZER". Also the infix of the
/// CAG_GATEWAY_<ROLE>_{URL,MODEL,KEY} environment variables.
std::string role_name(Role role);
std::optional<Role> role_from_string(const std::string& name);

enum class Speaker { System, User, Assistant };

struct Message {
  Speaker speaker = Speaker::User;
  std::string content;
};

struct MediaRef {
  std::string uri;
  std::optional<double> fps;  // frames-per-second hint for the serving layer
};

struct Decoding {
  double temperature = 0.0;
  int max_tokens = 2048;
  std::optional<long> seed;
};

struct ChatRequest {
  Role role = Role::VideoSummarizer;
  std::vector<Message> messages;
  std::vector<MediaRef> media;  // only valid for Role::VideoSummarizer
  Decoding decoding;
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  Usage usage;
  long latency_ms = 0;
};

class InvalidRequest : public Error {
public:
  using Error::Error;
};

/// Checks the request invariants (non-empty messages, user speaks last,
/// media only for the video summarizer, sane decoding). Throws
/// InvalidRequest; called before anything touches the network.
void validate_request(const ChatRequest& request);

/// One contract for every model role. The engine cannot tell a live
/// endpoint from a scripted mock.
class Gateway {
public:
  virtual ~Gateway() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string model_id(Role role) const = 0;
};

/// Flattens message contents (and media URIs) into one searchable string.
/// Mock matchers and tests key off this.
std::string request_text(const ChatRequest& request);

}  // namespace cag::gateway
