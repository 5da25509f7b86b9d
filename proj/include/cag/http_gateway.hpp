#pragma once

#include <map>
#include <memory>
#include <string>

#include "cag/gateway.hpp"

namespace cag::gateway {

struct EndpointConfig {
  std::string base_url;  // e.g. http://host:port (path /chat/completions is appended)
  std::string model;
  std::string api_key;
  int max_retries = 2;        // transient transport failures only
  int retry_backoff_ms = 250; // doubled per attempt
  int timeout_s = 120;
  int max_inflight = 4;       // per-endpoint concurrency cap
};

/// Reads CAG_GATEWAY_<ROLE>_URL / _MODEL / _KEY. Empty base_url means the
/// role is unconfigured.
EndpointConfig endpoint_from_env(Role role);

/// Chat-completion client speaking the de-facto JSON schema:
/// POST {base_url}/chat/completions with {model, messages, temperature,
/// max_tokens, seed?}; video URIs ride as video_url content parts inside the
/// user message. The first choice's message content is the reply.
class HttpGateway : public Gateway {
public:
  explicit HttpGateway(std::map<Role, EndpointConfig> endpoints);
  ~HttpGateway() override;

  ChatResponse complete(const ChatRequest& request) override;
  std::string model_id(Role role) const override;

  bool has_endpoint(Role role) const;

private:
  struct Slot;
  std::map<Role, std::unique_ptr<Slot>> slots_;
};

}  // namespace cag::gateway
