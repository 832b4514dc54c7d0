#include "mtorl/common/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace mtorl::logging {

namespace {

Level g_level = Level::kWarn;
std::once_flag g_init;
std::mutex g_mutex;

void init_from_env() {
  const char* env = std::getenv("MTORL_LOG_LEVEL");
  if (env == nullptr) return;
  std::string v(env);
  if (v == "error") {
    g_level = Level::kError;
  } else if (v == "warn") {
    g_level = Level::kWarn;
  } else if (v == "info") {
    g_level = Level::kInfo;
  } else if (v == "debug") {
    g_level = Level::kDebug;
  }
}

void emit(Level lvl, const char* tag, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[mtorl " << tag << "] " << msg << "\n";
}

}  // namespace

Level level() {
  std::call_once(g_init, init_from_env);
  return g_level;
}

void set_level(Level lvl) {
  std::call_once(g_init, init_from_env);
  g_level = lvl;
}

void error(const std::string& msg) { emit(Level::kError, "error", msg); }
void warn(const std::string& msg) { emit(Level::kWarn, "warn", msg); }
void info(const std::string& msg) { emit(Level::kInfo, "info", msg); }
void debug(const std::string& msg) { emit(Level::kDebug, "debug", msg); }

}  // namespace mtorl::logging
