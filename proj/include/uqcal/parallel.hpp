#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace uqcal {

/// Runs fn(worker_id, index) for index = 0..count-1 on up to `jobs` threads.
/// Indices are claimed from a shared counter; callers store results by index,
/// so output ordering never depends on scheduling. The first exception (by
/// lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t count, std::size_t jobs,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (jobs < 1) jobs = 1;
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(0, i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(jobs, {count, nullptr});
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(w, i);
                } catch (...) {
                    if (!errors[w].second || i < errors[w].first)
                        errors[w] = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    std::exception_ptr first;
    std::size_t first_idx = count;
    for (const auto& [idx, err] : errors)
        if (err && idx < first_idx) {
            first_idx = idx;
            first = err;
        }
    if (first) std::rethrow_exception(first);
}

} // namespace uqcal
