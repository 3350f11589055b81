#pragma once

#include <sstream>
#include <string>

namespace vxae::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Initial level comes from the VERBOSITY environment variable: a number 0-3 or one
// of error, warn, info, debug. Defaults to warn.
Level level();
void set_level(Level level);
bool enabled(Level level);
void write(Level level, const std::string& message);

template <typename... Args>
void emit(Level lvl, const Args&... args) {
  if (!enabled(lvl)) return;
  std::ostringstream os;
  (os << ... << args);
  write(lvl, os.str());
}

template <typename... Args>
void warn(const Args&... args) {
  emit(Level::Warn, args...);
}
template <typename... Args>
void info(const Args&... args) {
  emit(Level::Info, args...);
}
template <typename... Args>
void debug(const Args&... args) {
  emit(Level::Debug, args...);
}
template <typename... Args>
void error(const Args&... args) {
  emit(Level::Error, args...);
}

}  // namespace vxae::log
