#pragma once

#include <array>
#include <cstdint>

namespace rsm {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A pure function of (counter, key): the same inputs always produce the same
/// four 32-bit words, so any element of a random stream can be computed
/// directly from its index without generating its predecessors.
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

/// SplitMix64 finalizer. Bijective 64-bit mixing function.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent sub-seed for stream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Two standard normal variates for element `index` of stream `stream`
/// under `seed` (Box-Muller on the Philox output).
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t index);

}  // namespace rsm
