// parallel.hpp — Minimal worker pool over an index range

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace fluor {

struct TaskFailure {
    std::size_t index;
    std::string message;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is run
// exactly once; exceptions are caught per index and returned, never dropped.
std::vector<TaskFailure> parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// 0 means one worker per hardware thread.
int resolve_workers(int requested);

} // namespace fluor
