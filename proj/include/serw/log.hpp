#pragma once

#include <string>

namespace serw {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Current level, initialized once from the SERW_LOG environment
/// variable ("error", "info" or "debug"; default "info").
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace serw
