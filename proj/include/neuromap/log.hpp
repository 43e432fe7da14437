#ifndef NEUROMAP_LOG_HPP
#define NEUROMAP_LOG_HPP

#include <spdlog/spdlog.h>

namespace neuromap
{

// Shared logger writing to stderr. Level comes from NEUROMAP_LOG
// (quiet|info|debug, default info) the first time it is requested.
spdlog::logger &log();

} // namespace neuromap

#endif
