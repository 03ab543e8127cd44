#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "provgraph/common.hpp"

namespace provgraph {

// Runs fn(0..count-1) on the worker pool. Work items must write to disjoint
// slots; results are therefore identical for any schedule. The first
// exception thrown by a worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(size_t count, Fn&& fn) {
    unsigned workers = worker_count();
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<size_t>(workers, count));
    pool.reserve(spawn);
    for (unsigned t = 1; t < spawn; ++t) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace provgraph
