#include "vxae/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace vxae::log {

namespace {

Level level_from_env() {
  const char* env = std::getenv("VERBOSITY");
  if (env == nullptr) return Level::Warn;
  const std::string_view v(env);
  if (v == "0" || v == "error") return Level::Error;
  if (v == "1" || v == "warn" || v == "warning") return Level::Warn;
  if (v == "2" || v == "info") return Level::Info;
  if (v == "3" || v == "debug") return Level::Debug;
  return Level::Warn;
}

std::atomic<int>& current() {
  static std::atomic<int> value{static_cast<int>(level_from_env())};
  return value;
}

const char* tag(Level lvl) {
  switch (lvl) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }
bool enabled(Level lvl) { return static_cast<int>(lvl) <= current().load(); }

void write(Level lvl, const std::string& message) {
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[vxae " << tag(lvl) << "] " << message << '\n';
}

}  // namespace vxae::log
