#pragma once

#include <string>

namespace fedmap::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

// Level comes from the FEDMAP_LOG environment variable (debug|info|warn|error),
// default warn. Resolved once per process.
Level threshold();

void write(Level level, const std::string& message);

inline void debug(const std::string& m) { write(Level::kDebug, m); }
inline void info(const std::string& m) { write(Level::kInfo, m); }
inline void warn(const std::string& m) { write(Level::kWarn, m); }
inline void error(const std::string& m) { write(Level::kError, m); }

}  // namespace fedmap::log
