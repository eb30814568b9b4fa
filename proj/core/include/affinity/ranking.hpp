#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affinity/types.hpp"

namespace affinity {

struct ItemProfile {
    std::string item_id;
    EmotionVector profile;
};

struct RankedItem {
    std::string item_id;
    double score = 0.0;
    int rank = 1;

    friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

// Items by descending profile_affinity with the reader; equal scores keep
// item_id order. Rank 1 is the best item. Throws EmptyItemSet.
std::vector<RankedItem> rank_items(const EmotionVector& reader, std::span<const ItemProfile> items);

// Rank of the recommended item. Throws UnknownItem.
int expected_rank(std::string_view recommended_item_id, std::span<const RankedItem> ranking);

} // namespace affinity
