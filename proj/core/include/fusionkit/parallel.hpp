#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fusionkit {

/// Runs fn(i) for i in [0, n) on at most max_workers threads.
/// The first exception thrown by any task is rethrown after all workers join;
/// remaining tasks are skipped once a failure is observed.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_workers, Fn&& fn)
{
    if (n == 0) {
        return;
    }
    const std::size_t workers = std::max<std::size_t>(1, std::min(n, max_workers));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n && !failed.load();
                     i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) {
                            first_error = std::current_exception();
                        }
                        failed.store(true);
                    }
                }
            });
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace fusionkit
