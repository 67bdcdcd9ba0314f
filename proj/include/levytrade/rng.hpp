#pragma once

#include <cstdint>
#include <random>

namespace levytrade {

using Engine = std::mt19937_64;

/// Independent generator for stream `stream` under master seed `seed`.
/// Path j of a run always draws from make_substream(seed, j), so results do
/// not depend on which worker simulates it or in what order.
Engine make_substream(std::uint64_t seed, std::uint64_t stream);

}  // namespace levytrade
