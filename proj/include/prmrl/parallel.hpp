#pragma once

#include <cstddef>
#include <functional>

namespace prmrl {

// Worker count: set_worker_count() override, else PRMRL_WORKERS, else hardware concurrency.
std::size_t worker_count();
void set_worker_count(std::size_t workers);  // 0 restores the default

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker;
// callers write results into index-addressed storage so the reduction order
// never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace prmrl
