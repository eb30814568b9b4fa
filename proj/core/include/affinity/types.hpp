#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affinity/config.hpp"

namespace affinity {

// A 0..R rating. Constructed only through make_rating / clamp_rating.
struct Rating {
    int value = 0;

    friend auto operator<=>(const Rating&, const Rating&) = default;
};

// Throws OutOfRangeRating when raw is outside [0, rating_max].
Rating make_rating(int raw, int rating_max);

struct ClampedRating {
    Rating rating;
    int raw = 0;
    bool clamped = false;
};

// Ingest path: out-of-range raw values are clamped into [0, rating_max]
// and flagged so the caller can warn.
ClampedRating clamp_rating(int raw, int rating_max) noexcept;

struct StimulusKey {
    std::string stimulus_id;
    std::string variant_id;
    std::string context_id;

    friend auto operator<=>(const StimulusKey&, const StimulusKey&) = default;
};

struct ResponseExpression {
    std::string candidate_id;
    std::string stimulus_id;
    std::string variant_id;
    std::string context_id;
    Rating rating;

    StimulusKey key() const { return {stimulus_id, variant_id, context_id}; }

    // Throws ValidationError on an empty identifier.
    void validate() const;

    friend bool operator==(const ResponseExpression&, const ResponseExpression&) = default;
};

// Per-dimension preference intensity in [0, 1]. Unsupported
// dimensions (no observed response) hold exactly 0.
struct PersonalityVector {
    std::vector<double> values;
    std::vector<bool> support;

    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const PersonalityVector&, const PersonalityVector&) = default;
};

// Point on the probability simplex over the emotion dimensions.
class EmotionVector {
public:
    EmotionVector() = default;

    // Normalizes non-negative weights to sum 1. Entries in [-tolerance, 0)
    // are treated as 0. Throws ValidationError on negative entries, non-finite
    // entries or a zero total.
    static EmotionVector from_weights(std::span<const double> weights, double tolerance = 1e-9);

    // Accepts values already on the simplex up to `slack` and renormalizes
    // them. Throws ValidationError otherwise.
    static EmotionVector from_simplex(std::span<const double> values, double slack);

    static EmotionVector uniform(int dims);
    static EmotionVector one_hot(int dims, int dim);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    // Lowest index among the maximal entries.
    int dominant() const;

    friend bool operator==(const EmotionVector&, const EmotionVector&) = default;

private:
    explicit EmotionVector(std::vector<double> values) : values_(std::move(values)) {}

    std::vector<double> values_;
};

struct EmotionalClass {
    int value = 1;

    friend auto operator<=>(const EmotionalClass&, const EmotionalClass&) = default;
};

// Throws ValidationError when value is outside [1, num_classes].
EmotionalClass make_class(int value, int num_classes);

enum class FeatureKind { Color, Shape, Background };

std::string to_string(FeatureKind kind);
// Throws ParseError for an unknown name.
FeatureKind feature_kind_from_string(const std::string& name);

// Affective features of one stimulus variant. `context_id` scopes the
// resolution of inscribed words and text_cluster to one lexicon context; when
// absent those resolve across every context.
struct VariantFeatures {
    std::optional<std::string> color;
    std::optional<std::string> shape;
    std::optional<std::string> background;
    std::optional<int> presentation_order;
    std::optional<int> text_cluster;
    std::vector<std::string> inscribed_words;
    std::optional<std::string> context_id;

    const std::optional<std::string>& feature(FeatureKind kind) const;
    std::optional<std::string>& feature(FeatureKind kind);

    bool empty() const noexcept;

    // Throws ValidationError when no field is set or text_cluster is out of
    // [1, num_classes].
    void validate(int num_classes) const;

    // Stable textual identity, used for duplicate detection and variant ids.
    std::string canonical_key() const;

    friend bool operator==(const VariantFeatures&, const VariantFeatures&) = default;
};

} // namespace affinity
