#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ood::detail {

/// Runs body(i) for i in [0, count) on up to hardware_concurrency threads,
/// interleaved by index. The first exception is rethrown on the caller.
template <typename Body>
void parallel_for(long count, Body &&body, bool enabled = true) {
    const long workers = enabled ? std::min<long>(count, std::max(1u, std::thread::hardware_concurrency())) : 1;
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) { body(i); }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (long t = 0; t < workers; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (long i = t; i < count; i += workers) { body(i); }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) { failure = std::current_exception(); }
            }
        });
    }
    for (auto &thread : threads) { thread.join(); }
    if (failure) { std::rethrow_exception(failure); }
}

}  // namespace ood::detail
