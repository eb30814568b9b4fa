#include "affinity/ranking.hpp"

#include <algorithm>

#include "affinity/affinity.hpp"
#include "affinity/error.hpp"

namespace affinity {

std::vector<RankedItem> rank_items(const EmotionVector& reader, std::span<const ItemProfile> items) {
    if (items.empty()) fail(ErrorCode::EmptyItemSet, "no items to rank");
    std::vector<RankedItem> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back({item.item_id, profile_affinity(reader, item.profile), 0});
    std::stable_sort(out.begin(), out.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
    return out;
}

int expected_rank(std::string_view recommended_item_id, std::span<const RankedItem> ranking) {
    auto it = std::find_if(ranking.begin(), ranking.end(),
                           [&](const RankedItem& r) { return r.item_id == recommended_item_id; });
    if (it == ranking.end())
        fail(ErrorCode::UnknownItem, "item '" + std::string(recommended_item_id) + "' is not in the ranking");
    return it->rank;
}

} // namespace affinity
