#pragma once

#include <string>

namespace terra::log {

enum class Level { Debug, Info, Warning, Error };

/// Messages below this level are dropped. Default: Info.
void set_level(Level level);
Level level();

void write(Level level, const std::string& message);

inline void info(const std::string& message) { write(Level::Info, message); }
inline void warn(const std::string& message) { write(Level::Warning, message); }
inline void debug(const std::string& message) { write(Level::Debug, message); }

} // namespace terra::log
