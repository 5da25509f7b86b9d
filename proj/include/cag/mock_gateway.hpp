#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cag/gateway.hpp"

namespace cag::gateway {

/// A request arrived and no matching rule had a reply left.
class ScriptExhausted : public Error {
public:
  using Error::Error;
};

class BadScript : public Error {
public:
  using Error::Error;
};

/// One routing rule: requests for `role` whose text/media contains `match`
/// consume `replies` in order. With repeat_last the final reply answers
/// forever; otherwise running past the end raises ScriptExhausted.
struct MockRule {
  Role role = Role::VideoSummarizer;
  std::string match;  // substring matcher; empty matches everything
  std::vector<std::string> replies;
  bool repeat_last = false;
};

struct MockScript {
  std::vector<MockRule> rules;

  static MockScript load(const std::filesystem::path& file);
  static MockScript from_json(const nlohmann::json& spec);
};

struct LoggedCall {
  ChatRequest request;
  std::string response_text;
};

/// Deterministic scripted gateway. First matching rule wins; every call is
/// recorded in order for test assertions.
class MockGateway : public Gateway {
public:
  explicit MockGateway(MockScript script);

  ChatResponse complete(const ChatRequest& request) override;
  std::string model_id(Role role) const override;

  const std::vector<LoggedCall>& log() const { return log_; }

  /// Rewind consumption cursors and clear the call log.
  void reset();

private:
  MockScript script_;
  std::vector<std::size_t> cursors_;
  std::vector<LoggedCall> log_;
  mutable std::mutex mutex_;
};

}  // namespace cag::gateway
