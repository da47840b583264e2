#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace epifamily {

/// Shared stderr logger. Level is read once from EPIFAMILY_LOG
/// (trace|debug|info|warn|error|off, default warn).
spdlog::logger& logger();

} // namespace epifamily
