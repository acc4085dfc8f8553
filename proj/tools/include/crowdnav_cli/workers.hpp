#pragma once

#include <cstddef>
#include <functional>

namespace crowdnav::app {

/// Worker count from CROWDNAV_WORKERS (default 1, clamped to [1, 64]).
int worker_count();

/// Runs body(i) for i in [0, count) on `workers` threads. Each index is
/// handled exactly once, so callers writing into slot i get a result that does
/// not depend on scheduling. The first exception is rethrown after joining.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace crowdnav::app
