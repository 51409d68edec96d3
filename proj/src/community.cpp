#include "loadcast/community.hpp"

#include <numeric>

#include "loadcast/errors.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

std::vector<CommunityProfile> sample_communities(const std::vector<LoadSeries>& pool,
                                                 std::size_t h, std::size_t n_repetitions,
                                                 std::uint64_t seed) {
    if (h == 0) throw DataError("community size h must be at least 1");
    const std::size_t required = h * n_repetitions;
    if (pool.size() < required) {
        throw DataError("pool holds " + std::to_string(pool.size()) +
                        " households but sampling without replacement needs " +
                        std::to_string(required) + " (= " + std::to_string(h) + " x " +
                        std::to_string(n_repetitions) + ")");
    }

    std::vector<std::size_t> indices(pool.size());
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(seed);
    rng.shuffle(indices);

    std::vector<CommunityProfile> communities;
    communities.reserve(n_repetitions);
    for (std::size_t rep = 0; rep < n_repetitions; ++rep) {
        CommunityProfile community;
        community.size = h;
        std::vector<const LoadSeries*> members;
        members.reserve(h);
        for (std::size_t k = 0; k < h; ++k) {
            const LoadSeries& member = pool[indices[rep * h + k]];
            community.household_ids.push_back(member.id);
            members.push_back(&member);
        }
        community.aggregate =
            aggregate_members(members, "community_h" + std::to_string(h) + "_r" + std::to_string(rep));
        communities.push_back(std::move(community));
    }
    return communities;
}

}  // namespace loadcast
