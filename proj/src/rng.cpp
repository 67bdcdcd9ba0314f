#include "levytrade/rng.hpp"

namespace levytrade {

Engine make_substream(std::uint64_t seed, std::uint64_t stream)
{
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), 0x6c65767au};
    return Engine(seq);
}

}  // namespace levytrade
