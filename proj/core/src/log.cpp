#include "lexsimp/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

namespace lexsimp {

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto existing = spdlog::get("lexsimp");
    if (existing) return existing;
    auto created = spdlog::stderr_color_mt("lexsimp");
    created->set_pattern("[%l] %v");
    return created;
  }();
  return *logger;
}

}  // namespace lexsimp
