#include "affinity/affinity.hpp"

#include <algorithm>
#include <cstdlib>

#include "affinity/error.hpp"

namespace affinity {

ResponseIndex::ResponseIndex(std::span<const ResponseExpression> responses) {
    entries_.reserve(responses.size());
    for (const auto& r : responses) entries_.emplace_back(r.key(), r.rating.value);
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                  [](const auto& x, const auto& y) { return x.first == y.first; });
    if (dup != entries_.end()) {
        fail(ErrorCode::DuplicateResponse,
             "duplicate response for stimulus '" + dup->first.stimulus_id + "', variant '" +
                 dup->first.variant_id + "', context '" + dup->first.context_id + "'");
    }
}

double ResponseIndex::affinity_with(const ResponseIndex& other, int rating_max) const {
    std::size_t shared = 0;
    long long diff_total = 0;
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            diff_total += std::abs(a->second - b->second);
            ++shared;
            ++a;
            ++b;
        }
    }
    if (shared == 0) fail(ErrorCode::NoSharedStimuli, "response lists share no stimulus key");
    // mean(1 - d/R) == 1 - sum(d) / (R * n); the integer sum keeps a == b exact.
    return 1.0 - static_cast<double>(diff_total) /
                     (static_cast<double>(rating_max) * static_cast<double>(shared));
}

std::size_t ResponseIndex::shared_keys(const ResponseIndex& other) const {
    std::size_t shared = 0;
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            ++shared;
            ++a;
            ++b;
        }
    }
    return shared;
}

double candidate_affinity(std::span<const ResponseExpression> a,
                          std::span<const ResponseExpression> b,
                          const EngineConfig& config) {
    const ResponseIndex ia(a);
    const ResponseIndex ib(b);
    return ia.affinity_with(ib, config.rating_max);
}

double profile_affinity(const EmotionVector& reader, const EmotionVector& item) {
    if (reader.size() != item.size()) {
        fail(ErrorCode::DimensionMismatch,
             "emotion vectors have " + std::to_string(reader.size()) + " and " +
                 std::to_string(item.size()) + " dimensions");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < reader.size(); ++i) dot += reader[i] * item[i];
    return std::clamp(dot, 0.0, 1.0);
}

} // namespace affinity
