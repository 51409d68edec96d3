#pragma once

#include <cstdint>
#include <vector>

#include "loadcast/series.hpp"

namespace loadcast {

// Draws n_repetitions disjoint communities of h households each from the
// pool, without replacement across repetitions. Deterministic in the seed.
std::vector<CommunityProfile> sample_communities(const std::vector<LoadSeries>& pool,
                                                 std::size_t h, std::size_t n_repetitions,
                                                 std::uint64_t seed);

}  // namespace loadcast
