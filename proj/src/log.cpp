#include "mpgk/log.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>

namespace mpgk {

namespace {

std::atomic<LogLevel> g_level{LogLevel::warn};
std::mutex g_mutex;

void emit(LogLevel level, const char* tag, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(g_level.load())) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[mpgk " << tag << "] " << msg << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warn(std::string_view msg) { emit(LogLevel::warn, "warn", msg); }
void log_info(std::string_view msg) { emit(LogLevel::info, "info", msg); }
void log_debug(std::string_view msg) { emit(LogLevel::debug, "debug", msg); }

}  // namespace mpgk

namespace mpgk {

PhaseTimer::~PhaseTimer() {
    if (static_cast<int>(log_level()) < static_cast<int>(LogLevel::info)) return;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", seconds());
    log_info(phase_ + ": " + buf + " s");
}

}  // namespace mpgk
