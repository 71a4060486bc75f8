#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace cookar {

/// Shared stderr logger. COOKAR_LOG in {error, warn, info, debug} sets the
/// level (default warn).
spdlog::logger& log();

}  // namespace cookar
