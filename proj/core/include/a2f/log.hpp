#pragma once

#include <sstream>
#include <string_view>

namespace a2f::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();
// Throws ConfigError for unknown names.
Level parse_level(std::string_view name);
void write(Level level, std::string_view message);

template <typename... Args>
void emit(Level at, const Args&... args) {
  if (level() > at) return;
  std::ostringstream os;
  (os << ... << args);
  write(at, os.str());
}

template <typename... Args>
void debug(const Args&... args) { emit(Level::debug, args...); }
template <typename... Args>
void info(const Args&... args) { emit(Level::info, args...); }
template <typename... Args>
void warn(const Args&... args) { emit(Level::warn, args...); }
template <typename... Args>
void error(const Args&... args) { emit(Level::error, args...); }

}  // namespace a2f::log
