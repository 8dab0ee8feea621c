#pragma once

#include <cstddef>
#include <functional>

namespace fgd {

/// Worker count used by parallel_for. Resolution order: set_jobs() value,
/// FGD_JOBS environment variable, hardware concurrency.
int job_count();

/// Override the worker count. n < 1 resets to the environment default.
void set_jobs(int n);

/// Invokes fn(lo, hi) on disjoint chunks of [begin, end), possibly from
/// multiple threads. Callers must only write inside their chunk; results
/// must not depend on the partition.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace fgd
