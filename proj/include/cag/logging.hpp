#pragma once

#include <functional>
#include <string>

namespace cag::logging {

enum class Level { Info, Warn };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the default stderr sink; pass nullptr to restore it.
// Tests use this to assert on warning lines.
void set_sink(Sink sink);

void log(Level level, const std::string& message);
void info(const std::string& message);
void warn(const std::string& message);

}  // namespace cag::logging
