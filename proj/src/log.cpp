#include "epifamily/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace epifamily {

spdlog::logger& logger()
{
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
        auto log = std::make_shared<spdlog::logger>("epifamily", sink);
        log->set_pattern("[%l] %v");
        auto level = spdlog::level::info;
        if (const char* env = std::getenv("EPIFAMILY_LOG")) {
            level = spdlog::level::from_str(env);
        }
        log->set_level(level);
        return log;
    }();
    return *instance;
}

} // namespace epifamily
