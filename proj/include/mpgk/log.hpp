#pragma once

#include <string_view>

namespace mpgk {

enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warn(std::string_view msg);
void log_info(std::string_view msg);
void log_debug(std::string_view msg);

}  // namespace mpgk

#include <chrono>
#include <string>

namespace mpgk {

/// Logs the wall time of a phase at info level when it goes out of scope.
class PhaseTimer {
public:
    explicit PhaseTimer(std::string phase) : phase_(std::move(phase)), start_(std::chrono::steady_clock::now()) {}
    PhaseTimer(const PhaseTimer&) = delete;
    PhaseTimer& operator=(const PhaseTimer&) = delete;
    ~PhaseTimer();

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::string phase_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace mpgk
