#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dga {

/* Runs fn(i) for i in [0, n) on up to `threads` workers. Results are meant
 * to be stored by index, so the output order never depends on scheduling.
 * The first exception (lowest index) is rethrown after all workers stop. */
template<typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; i++)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mtx;
    std::exception_ptr first_error;
    std::size_t first_index = n;

    auto worker = [&]() {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(mtx);
                if (i < first_index)
                {
                    first_index = i;
                    first_error = std::current_exception();
                }
                failed = true;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; t++)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace dga
