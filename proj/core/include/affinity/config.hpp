#pragma once

#include <cstddef>

namespace affinity {

struct EngineConfig {
    int emotion_dims = 5;      // m
    int num_classes = 5;       // k
    int rating_max = 4;        // R, ratings live in [0, R]
    double tolerance = 1e-9;

    // embed_headline switches from exhaustive search to greedy per-slot
    // selection above this many word combinations.
    std::size_t exhaustive_limit = 4096;
    int max_swap_iterations = 100;

    // Throws ValidationError when a field is out of its domain.
    void validate() const;
};

} // namespace affinity
