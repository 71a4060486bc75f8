#include "cookar/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>

namespace cookar {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("COOKAR_LOG");
  const std::string_view v = env ? env : "warn";
  if (v == "error") return spdlog::level::err;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("cookar", sink);
    l->set_level(level_from_env());
    l->set_pattern("[%H:%M:%S.%e] [%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace cookar
