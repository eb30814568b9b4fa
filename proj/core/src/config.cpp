#include "affinity/config.hpp"

#include <cmath>

#include "affinity/error.hpp"

namespace affinity {

void EngineConfig::validate() const {
    if (emotion_dims < 1) fail(ErrorCode::ValidationError, "emotion_dims must be >= 1");
    if (num_classes < 1) fail(ErrorCode::ValidationError, "num_classes must be >= 1");
    if (rating_max < 1) fail(ErrorCode::ValidationError, "rating_max must be >= 1");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
        fail(ErrorCode::ValidationError, "tolerance must be a positive finite number");
    if (exhaustive_limit < 1) fail(ErrorCode::ValidationError, "exhaustive_limit must be >= 1");
    if (max_swap_iterations < 0) fail(ErrorCode::ValidationError, "max_swap_iterations must be >= 0");
}

} // namespace affinity
