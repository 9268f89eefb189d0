#include "foldcert/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace foldcert {

void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn,
                        unsigned max_threads) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads == 0) max_threads = 8;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(n, std::min(hw, max_threads)));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace foldcert
