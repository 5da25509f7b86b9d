#include "cag/mock_gateway.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cag::gateway {

MockScript MockScript::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw BadScript("cannot open mock script: " + file.string());
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw BadScript("mock script " + file.string() + " is not valid JSON: " + e.what());
  }
  return from_json(spec);
}

MockScript MockScript::from_json(const nlohmann::json& spec) {
  MockScript script;
  if (!spec.is_object() || !spec.contains("rules") || !spec["rules"].is_array()) {
    throw BadScript("mock script must be an object with a \"rules\" array");
  }
  for (const auto& entry : spec["rules"]) {
    MockRule rule;
    const auto role = role_from_string(entry.value("role", ""));
    if (!role) throw BadScript("mock rule has unknown role: " + entry.value("role", ""));
    rule.role = *role;
    rule.match = entry.value("match", "");
    if (!entry.contains("replies") || !entry["replies"].is_array() || entry["replies"].empty()) {
      throw BadScript("mock rule needs a non-empty \"replies\" array");
    }
    for (const auto& reply : entry["replies"]) {
      rule.replies.push_back(reply.get<std::string>());
    }
    rule.repeat_last = entry.value("repeat_last", false);
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockGateway::MockGateway(MockScript script)
    : script_(std::move(script)), cursors_(script_.rules.size(), 0) {}

ChatResponse MockGateway::complete(const ChatRequest& request) {
  validate_request(request);
  const std::string haystack = request_text(request);

  std::lock_guard<std::mutex> lock(mutex_);
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const MockRule& rule = script_.rules[i];
    if (rule.role != request.role) continue;
    if (!rule.match.empty() && haystack.find(rule.match) == std::string::npos) continue;

    std::size_t& cursor = cursors_[i];
    if (cursor >= rule.replies.size()) {
      if (!rule.repeat_last) {
        throw ScriptExhausted("no replies left for role " + role_name(request.role) +
                              (rule.match.empty() ? "" : " (match \"" + rule.match + "\")"));
      }
      cursor = rule.replies.size() - 1;
    }
    ChatResponse response;
    response.text = rule.replies[cursor];
    ++cursor;
    log_.push_back(LoggedCall{request, response.text});
    return response;
  }
  throw ScriptExhausted("no rule matches request for role " + role_name(request.role));
}

std::string MockGateway::model_id(Role) const { return "mock"; }

void MockGateway::reset() {
  std::lock_guard<std::mutex> lock(mutex_);
  std::fill(cursors_.begin(), cursors_.end(), 0);
  log_.clear();
}

}  // namespace cag::gateway
