#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affinity/config.hpp"
#include "affinity/types.hpp"

namespace affinity {

struct EmotionTaxonomy {
    std::vector<std::string> names;

    int dims() const noexcept { return static_cast<int>(names.size()); }

    friend bool operator==(const EmotionTaxonomy&, const EmotionTaxonomy&) = default;
};

struct WordEntry {
    std::string word;
    std::string context_id;
    int cluster_id = 1;
    EmotionVector profile;

    friend bool operator==(const WordEntry&, const WordEntry&) = default;
};

// (kind, category) -> profile, e.g. (color, "white") -> peace.
class FeatureProfileMap {
public:
    // Throws ValidationError on a duplicate (kind, category).
    void insert(FeatureKind kind, const std::string& category, EmotionVector profile);

    const EmotionVector* find(FeatureKind kind, const std::string& category) const;

    // Categories of one kind in lexicographic order.
    std::vector<std::pair<std::string, const EmotionVector*>> categories(FeatureKind kind) const;

    std::size_t size() const noexcept { return entries_.size(); }
    const auto& entries() const noexcept { return entries_; }

    friend bool operator==(const FeatureProfileMap&, const FeatureProfileMap&) = default;

private:
    std::map<std::pair<FeatureKind, std::string>, EmotionVector> entries_;
};

class Lexicon {
public:
    // Validates taxonomy size, cluster ids, profile dimensions and (word,
    // context) uniqueness. `declared_clusters` lists, per context, cluster ids
    // that must be backed by at least one word.
    Lexicon(EmotionTaxonomy taxonomy, std::vector<WordEntry> words, FeatureProfileMap features,
            int num_classes,
            const std::map<std::string, std::vector<int>>& declared_clusters = {});

    const EmotionTaxonomy& taxonomy() const noexcept { return taxonomy_; }
    const std::vector<WordEntry>& words() const noexcept { return words_; }
    const FeatureProfileMap& features() const noexcept { return features_; }
    int dims() const noexcept { return taxonomy_.dims(); }
    int num_classes() const noexcept { return num_classes_; }

    std::vector<std::string> contexts() const;
    bool has_context(std::string_view context_id) const;

    // Entries of one context sorted by word. Throws UnknownContext.
    std::vector<const WordEntry*> words_in_context(std::string_view context_id) const;

    // Sorted distinct cluster ids used in a context. Throws UnknownContext.
    std::vector<int> clusters_in_context(std::string_view context_id) const;

    // Profiles of `word`, restricted to one context when given.
    std::vector<const EmotionVector*> word_profiles(std::string_view word,
                                                    const std::optional<std::string>& context_id) const;

    friend bool operator==(const Lexicon& a, const Lexicon& b) {
        return a.taxonomy_ == b.taxonomy_ && a.words_ == b.words_ && a.features_ == b.features_ &&
               a.num_classes_ == b.num_classes_;
    }

private:
    EmotionTaxonomy taxonomy_;
    std::vector<WordEntry> words_;  // sorted by (context, cluster, word)
    FeatureProfileMap features_;
    int num_classes_ = 5;
};

// Parses the versioned lexicon JSON document. Profiles within 1e-6 of the
// simplex are renormalized, anything else is rejected.
// Throws ParseError or ValidationError.
Lexicon load_lexicon(std::string_view document, const EngineConfig& config);
Lexicon load_lexicon_file(const std::filesystem::path& path, const EngineConfig& config);

std::string serialize_lexicon(const Lexicon& lexicon);

// Entries of (context, cluster) in lexicographic word order. Throws
// UnknownContext for a context with no entries and ValidationError for a
// cluster id outside [1, k].
std::vector<WordEntry> words_for_cluster(const Lexicon& lexicon, std::string_view context_id,
                                         int cluster_id);

// Relative weight of each component kind in variant_profile.
struct ComponentWeights {
    double color = 1.0;
    double shape = 1.0;
    double background = 1.0;
    double text = 1.0;

    double of(FeatureKind kind) const noexcept;
};

struct ProfileComponent {
    double weight = 1.0;
    EmotionVector profile;
};

// The resolvable components of a variant, in a fixed order: color, shape,
// background, then inscribed words sorted, or the text_cluster mean.
std::vector<ProfileComponent> resolve_components(const VariantFeatures& features, const Lexicon& lexicon,
                                                 const ComponentWeights& weights = {});

// Weighted mean of components, renormalized. Throws MissingProfile when
// empty.
EmotionVector combine_components(std::span<const ProfileComponent> components, int dims);

// Weighted mean (equal weights by default) of every resolvable component:
// mapped color/shape/background categories, each inscribed word found in the
// lexicon, or, without inscribed words, the mean profile of text_cluster's
// words. Throws MissingProfile when nothing resolves.
EmotionVector variant_profile(const VariantFeatures& features, const Lexicon& lexicon,
                              const ComponentWeights& weights = {});

// Shipped five-dimension taxonomy: devotion, peace, excitement, trust, urgency.
EmotionTaxonomy default_taxonomy();

} // namespace affinity
