#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace crsf {

// Worker count from CRSF_THREADS, defaulting to the hardware concurrency.
inline int thread_count() {
    if (const char* s = std::getenv("CRSF_THREADS")) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) across workers; results must be written to
// per-index slots so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(long long n, Body body, int threads = thread_count()) {
    threads = static_cast<int>(std::min<long long>(threads, std::max(1LL, n)));
    if (threads <= 1) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            try {
                for (long long i; (i = next.fetch_add(1)) < n;) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace crsf
