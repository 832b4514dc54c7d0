#pragma once

#include <string>

namespace mtorl::logging {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Current level; initialized from MTORL_LOG_LEVEL on first use
// (one of "error", "warn", "info", "debug"), default "warn".
Level level();
void set_level(Level lvl);

void error(const std::string& msg);
void warn(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace mtorl::logging
