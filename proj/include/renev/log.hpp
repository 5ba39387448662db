#pragma once

#include <atomic>
#include <iostream>
#include <sstream>
#include <utility>

namespace renev::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

inline std::atomic<int>& level_storage() {
  static std::atomic<int> level{static_cast<int>(Level::Quiet)};
  return level;
}

inline void set_level(Level l) { level_storage().store(static_cast<int>(l)); }

inline bool enabled(Level l) {
  return level_storage().load(std::memory_order_relaxed) >= static_cast<int>(l);
}

template <typename... Args>
void write(Level l, Args&&... args) {
  if (!enabled(l)) return;
  std::ostringstream oss;
  (oss << ... << std::forward<Args>(args));
  std::clog << oss.str() << '\n';
}

template <typename... Args>
void debug(Args&&... args) {
  write(Level::Debug, "[debug] ", std::forward<Args>(args)...);
}

template <typename... Args>
void info(Args&&... args) {
  write(Level::Info, "[info] ", std::forward<Args>(args)...);
}

}  // namespace renev::log
