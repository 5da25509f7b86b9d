#include "cag/logging.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace cag::logging {

namespace {

std::mutex g_mutex;
Sink g_sink;

const char* level_tag(Level level) {
  return level == Level::Warn ? "WARN" : "INFO";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_sink = std::move(sink);
}

void log(Level level, const std::string& message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (g_sink) {
    g_sink(level, message);
    return;
  }
  std::cerr << level_tag(level) << ": " << message << '\n';
}

void info(const std::string& message) { log(Level::Info, message); }

void warn(const std::string& message) { log(Level::Warn, message); }

}  // namespace cag::logging
