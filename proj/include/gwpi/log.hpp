#pragma once

#include <string_view>

#include <fmt/format.h>

namespace gwpi::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Reads GWPI_KIT_LOG once (error | info | debug); defaults to warn.
Level threshold();
void set_threshold(Level level);
void write(Level level, std::string_view message);

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
  if (threshold() >= Level::warn) write(Level::warn, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (threshold() >= Level::info) write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  if (threshold() >= Level::debug) write(Level::debug, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace gwpi::log
