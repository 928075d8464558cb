#pragma once

#include <spdlog/spdlog.h>

namespace lexsimp {

/// Library logger. Writes to standard error so results on stdout stay clean.
spdlog::logger& log();

}  // namespace lexsimp
