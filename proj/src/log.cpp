#include "serw/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace serw {

namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("SERW_LOG");
  if (env == nullptr) return LogLevel::Info;
  std::string s(env);
  if (s == "error") return LogLevel::Error;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

LogLevel& level_ref() {
  static LogLevel level = level_from_env();
  return level;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << "[serw " << tag << "] " << msg << "\n";
}

}  // namespace

LogLevel log_level() { return level_ref(); }
void set_log_level(LogLevel level) { level_ref() = level; }

void log_error(const std::string& msg) {
  if (log_level() >= LogLevel::Error) emit("error", msg);
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

}  // namespace serw
