#include "terra/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace terra::log {

namespace {
std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warning: return "warning";
    case Level::Error: return "error";
    }
    return "";
}
} // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, const std::string& message) {
    if (level < g_level.load()) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[terra " << tag(level) << "] " << message << '\n';
}

} // namespace terra::log
