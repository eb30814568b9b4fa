#pragma once

#include <span>

#include "affinity/config.hpp"
#include "affinity/types.hpp"

namespace affinity {

// Affinity index between two candidates: mean over shared stimulus keys of
// 1 - |rating_a - rating_b| / R.
//
// Throws NoSharedStimuli when the lists share no key and DuplicateResponse
// when either list repeats a key.
double candidate_affinity(std::span<const ResponseExpression> a,
                          std::span<const ResponseExpression> b,
                          const EngineConfig& config);

// Affinity index between a reader and an item: the dot product of two
// simplex vectors. Throws DimensionMismatch.
double profile_affinity(const EmotionVector& reader, const EmotionVector& item);

} // namespace affinity

namespace affinity {

// One candidate's responses keyed by stimulus key, sorted for merge joins.
// Building the index validates key uniqueness once so repeated pairwise
// affinity evaluations (clustering, classification) skip that work.
class ResponseIndex {
public:
    ResponseIndex() = default;

    // Throws DuplicateResponse when a key repeats.
    explicit ResponseIndex(std::span<const ResponseExpression> responses);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    // Throws NoSharedStimuli when the two indexes share no key.
    double affinity_with(const ResponseIndex& other, int rating_max) const;

    // Number of keys present in both indexes.
    std::size_t shared_keys(const ResponseIndex& other) const;

private:
    std::vector<std::pair<StimulusKey, int>> entries_;
};

} // namespace affinity
