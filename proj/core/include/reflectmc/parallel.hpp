// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace reflectmc {

/// Worker count: REFLECTMC_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("REFLECTMC_THREADS")) {
        const long requested = std::strtol(env, nullptr, 10);
        if (requested > 0) {
            return static_cast<unsigned>(requested);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for every i in [0, n). Indices are handed out in blocks to
/// worker threads; body must only write state owned by index i, so results
/// never depend on scheduling. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(blocks, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t block = next.fetch_add(1);
            if (block >= blocks) {
                return;
            }
            const std::size_t end = std::min(n, (block + 1) * kBlock);
            try {
                for (std::size_t i = block * kBlock; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(blocks);
                return;
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(work);
        }
        work();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace reflectmc
