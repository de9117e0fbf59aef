#include "fedmap/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace fedmap::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("FEDMAP_LOG");
  if (env == nullptr) return Level::kWarn;
  if (std::strcmp(env, "debug") == 0) return Level::kDebug;
  if (std::strcmp(env, "info") == 0) return Level::kInfo;
  if (std::strcmp(env, "warn") == 0) return Level::kWarn;
  if (std::strcmp(env, "error") == 0) return Level::kError;
  return Level::kWarn;
}

const char* tag(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "?";
}

std::mutex g_mutex;

}  // namespace

Level threshold() {
  static Level cached = parse_level();
  return cached;
}

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) < static_cast<int>(threshold())) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[fedmap %s] %s\n", tag(level), message.c_str());
}

}  // namespace fedmap::log
