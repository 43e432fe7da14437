#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>

#include "neuromap/log.hpp"

namespace
{

spdlog::level::level_enum level_from_env()
{
    const char *env = std::getenv("NEUROMAP_LOG");
    const std::string value = env == nullptr ? "" : env;
    if (value == "quiet")
    {
        return spdlog::level::err;
    }
    if (value == "debug")
    {
        return spdlog::level::debug;
    }
    return spdlog::level::info;
}

} // namespace

spdlog::logger &neuromap::log()
{
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
        auto created = std::make_shared<spdlog::logger>("neuromap", sink);
        created->set_pattern("[%l] %v");
        created->set_level(level_from_env());
        return created;
    }();
    return *logger;
}
