#include "levytrade/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace levytrade {

std::size_t resolve_threads(std::size_t requested)
{
    if (requested > 0)
        return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_blocks(std::size_t count, std::size_t block_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn)
{
    std::size_t const blocks = block_count(count, block_size);
    std::size_t const workers = std::min(resolve_threads(threads), std::max<std::size_t>(1, blocks));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;)
        {
            std::size_t const b = next.fetch_add(1);
            if (b >= blocks || failed.load())
                return;
            try
            {
                std::size_t const begin = b * block_size;
                fn(b, begin, std::min(count, begin + block_size));
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };

    if (workers <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8)
    {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    std::size_t const half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace levytrade
