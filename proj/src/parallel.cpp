// parallel.cpp — Atomic-index worker pool

#include "fluor/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace fluor {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TaskFailure> parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::vector<TaskFailure> failures;
    std::mutex failures_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({i, e.what()});
            } catch (...) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({i, "unknown exception"});
            }
        }
    };
    const int w = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < w; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return failures;
}

} // namespace fluor
