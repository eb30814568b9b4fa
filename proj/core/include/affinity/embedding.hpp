#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "affinity/config.hpp"
#include "affinity/lexicon.hpp"
#include "affinity/types.hpp"

namespace affinity {

struct TemplateSlot {
    std::string name;
    std::string context_id;

    friend bool operator==(const TemplateSlot&, const TemplateSlot&) = default;
};

// A literal token or a slot filled from the lexicon.
using TemplateToken = std::variant<std::string, TemplateSlot>;

struct HeadlineTemplate {
    std::vector<TemplateToken> tokens;

    // Throws ValidationError on an empty template, empty literal/slot fields
    // or a repeated slot name.
    void validate() const;

    std::vector<TemplateSlot> slots() const;

    friend bool operator==(const HeadlineTemplate&, const HeadlineTemplate&) = default;
};

// {version: 1, tokens: [{literal} | {slot, context}]}
HeadlineTemplate load_template(std::string_view document);
std::string serialize_template(const HeadlineTemplate& tmpl);

struct EmbeddedVariant {
    std::vector<std::string> headline;
    VariantFeatures features;
    EmotionVector profile;
    double score = 0.0;
    bool exhaustive = true;  // false when the greedy path ran

    std::string text() const;
};

// Fills every slot with a word of its context so that the variant profile
// (base feature components plus one component per chosen word) maximizes
// profile_affinity(target, profile). Searches exhaustively when the number
// of combinations is within config.exhaustive_limit, otherwise greedily per
// slot in template order. Ties go to the lexicographically smallest words.
//
// Throws EmptySlotVocabulary, MissingProfile (no slots and no resolvable
// base feature), DimensionMismatch.
EmbeddedVariant embed_headline(const HeadlineTemplate& tmpl, const EmotionVector& target, const Lexicon& lexicon,
                               const EngineConfig& config, const VariantFeatures& base = {});

// Per kind, the category maximizing affinity with target; ties go to the
// smaller label. Throws NoMappedCategory.
VariantFeatures select_features(const EmotionVector& target, const Lexicon& lexicon,
                                std::span<const FeatureKind> kinds);

struct BaseStimulus {
    std::string stimulus_id;
    std::string context_id;
};

struct RoundPolicy {
    enum class Kind { Coverage, Discrimination };

    Kind kind = Kind::Coverage;
    // Discrimination only: the two dimensions to split variants between.
    std::array<int, 2> focus{0, 1};

    static RoundPolicy coverage() { return {}; }
    static RoundPolicy discrimination(int first, int second) { return {Kind::Discrimination, {first, second}}; }
};

std::string to_string(RoundPolicy::Kind kind);

// `count` distinct variants of one stimulus built from the lexicon's colors,
// backgrounds and the context's text clusters. Coverage assigns dominant
// dimensions round-robin in index order; discrimination alternates between
// the two focus dimensions. Within a dimension the purest candidate wins,
// then the one with fewer components, then the smaller canonical key.
//
// Throws InvalidArgument (count < 2) and InsufficientVocabulary.
std::vector<VariantFeatures> generate_variant_set(const BaseStimulus& stimulus, const Lexicon& lexicon, int count,
                                                  const RoundPolicy& policy);

} // namespace affinity
