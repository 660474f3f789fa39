#include "alviz/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace alviz::log {
namespace {

Level from_env() {
  const char* raw = std::getenv("ALVIZ_LOG");
  if (raw == nullptr) return Level::info;
  const std::string value(raw);
  if (value == "error") return Level::error;
  if (value == "warn") return Level::warn;
  if (value == "debug") return Level::debug;
  return Level::info;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

constexpr std::string_view tag(Level level) {
  switch (level) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }

void set_threshold(Level level) { current().store(static_cast<int>(level)); }

void write(Level level, std::string_view message) {
  if (static_cast<int>(level) > current().load()) return;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[alviz:" << tag(level) << "] " << message << '\n';
}

}  // namespace alviz::log
