#include "cag/http_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <condition_variable>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cag/logging.hpp"
#include "cag/text.hpp"

namespace cag::gateway {

namespace {

using nlohmann::json;

std::string speaker_name(Speaker speaker) {
  switch (speaker) {
    case Speaker::System: return "system";
    case Speaker::User: return "user";
    case Speaker::Assistant: return "assistant";
  }
  return "user";
}

json build_body(const ChatRequest& request, const EndpointConfig& endpoint) {
  json messages = json::array();
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const Message& message = request.messages[i];
    json entry = {{"role", speaker_name(message.speaker)}};
    const bool is_last_user = (i + 1 == request.messages.size());
    if (is_last_user && !request.media.empty()) {
      json parts = json::array();
      parts.push_back({{"type", "text"}, {"text", message.content}});
      for (const auto& media : request.media) {
        json part = {{"type", "video_url"}, {"video_url", {{"url", media.uri}}}};
        if (media.fps) part["video_url"]["fps"] = *media.fps;
        parts.push_back(std::move(part));
      }
      entry["content"] = std::move(parts);
    } else {
      entry["content"] = message.content;
    }
    messages.push_back(std::move(entry));
  }
  json body = {
      {"model", endpoint.model},
      {"messages", std::move(messages)},
      {"temperature", request.decoding.temperature},
      {"max_tokens", request.decoding.max_tokens},
  };
  if (request.decoding.seed) body["seed"] = *request.decoding.seed;
  return body;
}

bool looks_like_context_overflow(const std::string& body) {
  const std::string lowered = text::to_lower(body);
  return lowered.find("context_length_exceeded") != std::string::npos ||
         lowered.find("context length") != std::string::npos ||
         lowered.find("maximum context") != std::string::npos;
}

ChatResponse parse_response(const std::string& body) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolViolation(std::string("response is not JSON: ") + e.what());
  }
  if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
    throw ProtocolViolation("response has no choices");
  }
  const json& message = reply["choices"][0].value("message", json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw ProtocolViolation("first choice has no message content");
  }
  ChatResponse response;
  response.text = message["content"].get<std::string>();
  if (response.text.empty()) {
    logging::warn("endpoint returned empty content");
  }
  if (reply.contains("usage") && reply["usage"].is_object()) {
    response.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
    response.usage.completion_tokens = reply["usage"].value("completion_tokens", 0L);
  }
  return response;
}

}  // namespace

// Counting gate sized at runtime; bounds in-flight requests per endpoint.
struct HttpGateway::Slot {
  explicit Slot(EndpointConfig config_in)
      : config(std::move(config_in)), available(config.max_inflight > 0 ? config.max_inflight : 1) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex);
    cv.wait(lock, [this] { return available > 0; });
    --available;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      ++available;
    }
    cv.notify_one();
  }

  EndpointConfig config;
  int available;
  std::mutex mutex;
  std::condition_variable cv;
};

EndpointConfig endpoint_from_env(Role role) {
  const std::string tag = role_name(role);
  EndpointConfig config;
  if (const char* url = std::getenv(("CAG_GATEWAY_" + tag + "_URL").c_str())) config.base_url = url;
  if (const char* model = std::getenv(("CAG_GATEWAY_" + tag + "_MODEL").c_str())) config.model = model;
  if (const char* key = std::getenv(("CAG_GATEWAY_" + tag + "_KEY").c_str())) config.api_key = key;
  return config;
}

HttpGateway::HttpGateway(std::map<Role, EndpointConfig> endpoints) {
  for (auto& [role, config] : endpoints) {
    if (config.base_url.empty()) continue;
    slots_.emplace(role, std::make_unique<Slot>(std::move(config)));
  }
}

HttpGateway::~HttpGateway() = default;

bool HttpGateway::has_endpoint(Role role) const { return slots_.count(role) > 0; }

std::string HttpGateway::model_id(Role role) const {
  auto it = slots_.find(role);
  return it == slots_.end() ? "" : it->second->config.model;
}

ChatResponse HttpGateway::complete(const ChatRequest& request) {
  validate_request(request);
  auto it = slots_.find(request.role);
  if (it == slots_.end()) {
    throw Transport("no endpoint configured for role " + role_name(request.role));
  }
  Slot& slot = *it->second;
  const EndpointConfig& config = slot.config;

  const json body = build_body(request, config);
  const std::string payload = body.dump();

  slot.acquire();
  struct Release {
    Slot& slot;
    ~Release() { slot.release(); }
  } release{slot};

  std::string last_error;
  int backoff_ms = config.retry_backoff_ms;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_s, 0);
    client.set_read_timeout(config.timeout_s, 0);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config.api_key);
    }

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post("/chat/completions", headers, payload, "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;  // transient, retry
    }
    if (result->status >= 500) {
      last_error = "server error " + std::to_string(result->status);
      continue;  // transient, retry
    }
    if (result->status != 200) {
      if (looks_like_context_overflow(result->body)) {
        throw ContextOverflow("endpoint signalled token limit: " + result->body);
      }
      // Schema-level rejection; retrying cannot help.
      throw ProtocolViolation("endpoint returned status " + std::to_string(result->status) +
                              ": " + result->body);
    }
    ChatResponse response = parse_response(result->body);
    response.latency_ms = static_cast<long>(elapsed);
    return response;
  }
  throw Transport(role_name(request.role) + " endpoint " + config.base_url +
                  " failed after " + std::to_string(config.max_retries + 1) +
                  " attempts: " + last_error);
}

}  // namespace cag::gateway
