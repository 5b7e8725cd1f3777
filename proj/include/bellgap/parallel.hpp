#ifndef BELLGAP_PARALLEL_HPP
#define BELLGAP_PARALLEL_HPP

#include <atomic>
#include <thread>
#include <vector>

namespace bellgap {

// Run fn(0..n-1) across hardware threads. Each index owns its output slot,
// so results are identical to the sequential order regardless of scheduling.
template <class Fn>
void parallel_for_index(int n, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = static_cast<int>(std::min<unsigned>(hw == 0 ? 1 : hw, n));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace bellgap

#endif
