#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace levytrade {

/// Fixed block size for path-level work. Per-block partial results are
/// combined in block order, so totals do not depend on the thread count.
inline constexpr std::size_t kPathBlock = 256;

/// 0 means "all hardware threads".
std::size_t resolve_threads(std::size_t requested);

/// Calls fn(block, begin, end) for the blocks [k*block_size, ...) covering
/// [0, count) on up to `threads` workers. Blocks are handed out dynamically;
/// fn must write only block-local state. The first exception thrown by any
/// block is rethrown after all workers stop.
void parallel_blocks(std::size_t count, std::size_t block_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t block_count(std::size_t count, std::size_t block_size)
{
    return (count + block_size - 1) / block_size;
}

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace levytrade
