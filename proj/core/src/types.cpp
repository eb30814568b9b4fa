#include "affinity/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "affinity/error.hpp"

namespace affinity {

Rating make_rating(int raw, int rating_max) {
    if (raw < 0 || raw > rating_max) {
        fail(ErrorCode::OutOfRangeRating,
             "rating " + std::to_string(raw) + " outside [0, " + std::to_string(rating_max) + "]");
    }
    return Rating{raw};
}

ClampedRating clamp_rating(int raw, int rating_max) noexcept {
    const int v = std::clamp(raw, 0, rating_max);
    return {Rating{v}, raw, v != raw};
}

void ResponseExpression::validate() const {
    if (candidate_id.empty() || stimulus_id.empty() || variant_id.empty() || context_id.empty())
        fail(ErrorCode::ValidationError, "response has an empty identifier");
}

EmotionVector EmotionVector::from_weights(std::span<const double> weights, double tolerance) {
    if (weights.empty()) fail(ErrorCode::ValidationError, "emotion vector must have at least one dimension");
    std::vector<double> v(weights.begin(), weights.end());
    double total = 0.0;
    for (double& x : v) {
        if (!std::isfinite(x)) fail(ErrorCode::ValidationError, "emotion weight is not finite");
        if (x < 0.0) {
            if (x < -tolerance) fail(ErrorCode::ValidationError, "emotion weight is negative");
            x = 0.0;
        }
        total += x;
    }
    if (!(total > 0.0)) fail(ErrorCode::ValidationError, "emotion weights sum to zero");
    for (double& x : v) x /= total;
    return EmotionVector(std::move(v));
}

EmotionVector EmotionVector::from_simplex(std::span<const double> values, double slack) {
    if (values.empty()) fail(ErrorCode::ValidationError, "emotion vector must have at least one dimension");
    double total = 0.0;
    for (double x : values) {
        if (!std::isfinite(x) || x < 0.0)
            fail(ErrorCode::ValidationError, "emotion vector entries must be finite and non-negative");
        total += x;
    }
    if (std::abs(total - 1.0) > slack) {
        std::ostringstream msg;
        msg << "emotion vector sums to " << total << ", expected 1";
        fail(ErrorCode::ValidationError, msg.str());
    }
    // Values already normalized to working precision are kept bit-for-bit so
    // stored vectors reload unchanged.
    if (std::abs(total - 1.0) <= 1e-12) return EmotionVector(std::vector<double>(values.begin(), values.end()));
    return from_weights(values);
}

EmotionVector EmotionVector::uniform(int dims) {
    if (dims < 1) fail(ErrorCode::ValidationError, "emotion vector must have at least one dimension");
    return EmotionVector(std::vector<double>(static_cast<std::size_t>(dims), 1.0 / dims));
}

EmotionVector EmotionVector::one_hot(int dims, int dim) {
    if (dims < 1 || dim < 0 || dim >= dims)
        fail(ErrorCode::ValidationError, "one-hot dimension out of range");
    std::vector<double> v(static_cast<std::size_t>(dims), 0.0);
    v[static_cast<std::size_t>(dim)] = 1.0;
    return EmotionVector(std::move(v));
}

int EmotionVector::dominant() const {
    if (values_.empty()) fail(ErrorCode::ValidationError, "empty emotion vector");
    return static_cast<int>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

EmotionalClass make_class(int value, int num_classes) {
    if (value < 1 || value > num_classes)
        fail(ErrorCode::ValidationError,
             "class " + std::to_string(value) + " outside [1, " + std::to_string(num_classes) + "]");
    return EmotionalClass{value};
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::Color: return "color";
    case FeatureKind::Shape: return "shape";
    case FeatureKind::Background: return "background";
    }
    return "color";
}

FeatureKind feature_kind_from_string(const std::string& name) {
    if (name == "color") return FeatureKind::Color;
    if (name == "shape") return FeatureKind::Shape;
    if (name == "background") return FeatureKind::Background;
    fail(ErrorCode::ParseError, "unknown feature kind '" + name + "'");
}

const std::optional<std::string>& VariantFeatures::feature(FeatureKind kind) const {
    switch (kind) {
    case FeatureKind::Color: return color;
    case FeatureKind::Shape: return shape;
    case FeatureKind::Background: return background;
    }
    return color;
}

std::optional<std::string>& VariantFeatures::feature(FeatureKind kind) {
    return const_cast<std::optional<std::string>&>(std::as_const(*this).feature(kind));
}

bool VariantFeatures::empty() const noexcept {
    return !color && !shape && !background && !presentation_order && !text_cluster &&
           inscribed_words.empty();
}

void VariantFeatures::validate(int num_classes) const {
    if (empty()) fail(ErrorCode::ValidationError, "variant has no features");
    if (text_cluster && (*text_cluster < 1 || *text_cluster > num_classes))
        fail(ErrorCode::ValidationError,
             "text_cluster " + std::to_string(*text_cluster) + " outside [1, " +
                 std::to_string(num_classes) + "]");
    if (presentation_order && *presentation_order < 0)
        fail(ErrorCode::ValidationError, "presentation_order must be non-negative");
}

std::string VariantFeatures::canonical_key() const {
    std::string key;
    auto add = [&key](std::string_view name, const std::string& value) {
        if (!key.empty()) key += ';';
        key += name;
        key += '=';
        key += value;
    };
    if (color) add("color", *color);
    if (shape) add("shape", *shape);
    if (background) add("background", *background);
    if (presentation_order) add("order", std::to_string(*presentation_order));
    if (context_id) add("context", *context_id);
    if (text_cluster) add("cluster", std::to_string(*text_cluster));
    if (!inscribed_words.empty()) {
        std::string words;
        for (const auto& w : inscribed_words) {
            if (!words.empty()) words += ',';
            words += w;
        }
        add("words", words);
    }
    return key;
}

} // namespace affinity
