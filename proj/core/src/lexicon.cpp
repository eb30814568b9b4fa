#include "affinity/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affinity/error.hpp"

namespace affinity {

using nlohmann::json;

namespace {

constexpr double kProfileSlack = 1e-6;

EmotionVector mean_profile(std::span<const EmotionVector* const> profiles) {
    std::vector<double> sum(profiles.front()->size(), 0.0);
    for (const auto* p : profiles)
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*p)[i];
    return EmotionVector::from_weights(sum);
}

EmotionVector parse_profile(const json& node, int dims, const std::string& where) {
    if (!node.is_array()) fail(ErrorCode::ParseError, where + ": profile must be an array");
    if (static_cast<int>(node.size()) != dims) {
        fail(ErrorCode::ValidationError, where + ": profile has " + std::to_string(node.size()) +
                                             " entries, taxonomy has " + std::to_string(dims));
    }
    std::vector<double> values;
    values.reserve(node.size());
    for (const auto& x : node) {
        if (!x.is_number()) fail(ErrorCode::ParseError, where + ": profile entries must be numbers");
        values.push_back(x.get<double>());
    }
    try {
        return EmotionVector::from_simplex(values, kProfileSlack);
    } catch (const Error& e) {
        fail(ErrorCode::ValidationError, where + ": " + e.what());
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorCode::ParseError, where + ": missing '" + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string() || v.get<std::string>().empty())
        fail(ErrorCode::ParseError, where + ": '" + key + "' must be a non-empty string");
    return v.get<std::string>();
}

json profile_json(const EmotionVector& v) {
    return json(std::vector<double>(v.values().begin(), v.values().end()));
}

} // namespace

void FeatureProfileMap::insert(FeatureKind kind, const std::string& category, EmotionVector profile) {
    if (category.empty()) fail(ErrorCode::ValidationError, "feature category must be non-empty");
    auto [it, inserted] = entries_.emplace(std::make_pair(kind, category), std::move(profile));
    if (!inserted)
        fail(ErrorCode::ValidationError, "duplicate feature " + to_string(kind) + "/" + category);
}

const EmotionVector* FeatureProfileMap::find(FeatureKind kind, const std::string& category) const {
    auto it = entries_.find({kind, category});
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, const EmotionVector*>>
FeatureProfileMap::categories(FeatureKind kind) const {
    std::vector<std::pair<std::string, const EmotionVector*>> out;
    for (const auto& [key, profile] : entries_)
        if (key.first == kind) out.emplace_back(key.second, &profile);
    return out;
}

Lexicon::Lexicon(EmotionTaxonomy taxonomy, std::vector<WordEntry> words, FeatureProfileMap features,
                 int num_classes, const std::map<std::string, std::vector<int>>& declared_clusters)
    : taxonomy_(std::move(taxonomy)),
      words_(std::move(words)),
      features_(std::move(features)),
      num_classes_(num_classes) {
    if (taxonomy_.names.empty()) fail(ErrorCode::ValidationError, "taxonomy is empty");
    std::set<std::string> seen_names;
    for (const auto& n : taxonomy_.names) {
        if (n.empty()) fail(ErrorCode::ValidationError, "taxonomy label is empty");
        if (!seen_names.insert(n).second)
            fail(ErrorCode::ValidationError, "duplicate taxonomy label '" + n + "'");
    }
    if (num_classes_ < 1) fail(ErrorCode::ValidationError, "num_classes must be >= 1");

    const auto dims = static_cast<std::size_t>(taxonomy_.dims());
    std::set<std::pair<std::string, std::string>> seen_words;
    for (const auto& w : words_) {
        if (w.word.empty() || w.context_id.empty())
            fail(ErrorCode::ValidationError, "word entry has an empty word or context");
        if (w.cluster_id < 1 || w.cluster_id > num_classes_)
            fail(ErrorCode::ValidationError, "word '" + w.word + "' has cluster " +
                                                 std::to_string(w.cluster_id) + " outside [1, " +
                                                 std::to_string(num_classes_) + "]");
        if (w.profile.size() != dims)
            fail(ErrorCode::ValidationError, "word '" + w.word + "' profile has wrong dimension");
        if (!seen_words.emplace(w.context_id, w.word).second)
            fail(ErrorCode::ValidationError,
                 "word '" + w.word + "' appears twice in context '" + w.context_id + "'");
    }
    for (const auto& [key, profile] : features_.entries())
        if (profile.size() != dims)
            fail(ErrorCode::ValidationError, "feature '" + key.second + "' profile has wrong dimension");

    std::sort(words_.begin(), words_.end(), [](const WordEntry& a, const WordEntry& b) {
        return std::tie(a.context_id, a.cluster_id, a.word) < std::tie(b.context_id, b.cluster_id, b.word);
    });

    for (const auto& [context, clusters] : declared_clusters) {
        for (int c : clusters) {
            const bool backed = std::any_of(words_.begin(), words_.end(), [&](const WordEntry& w) {
                return w.context_id == context && w.cluster_id == c;
            });
            if (!backed)
                fail(ErrorCode::ValidationError, "context '" + context + "' declares cluster " +
                                                     std::to_string(c) + " with no words");
        }
    }
}

std::vector<std::string> Lexicon::contexts() const {
    std::vector<std::string> out;
    for (const auto& w : words_)
        if (out.empty() || out.back() != w.context_id) out.push_back(w.context_id);
    return out;
}

bool Lexicon::has_context(std::string_view context_id) const {
    return std::any_of(words_.begin(), words_.end(),
                       [&](const WordEntry& w) { return w.context_id == context_id; });
}

std::vector<const WordEntry*> Lexicon::words_in_context(std::string_view context_id) const {
    std::vector<const WordEntry*> out;
    for (const auto& w : words_)
        if (w.context_id == context_id) out.push_back(&w);
    if (out.empty()) fail(ErrorCode::UnknownContext, "unknown context '" + std::string(context_id) + "'");
    std::sort(out.begin(), out.end(), [](const WordEntry* a, const WordEntry* b) { return a->word < b->word; });
    return out;
}

std::vector<int> Lexicon::clusters_in_context(std::string_view context_id) const {
    std::set<int> ids;
    for (const auto* w : words_in_context(context_id)) ids.insert(w->cluster_id);
    return {ids.begin(), ids.end()};
}

std::vector<const EmotionVector*> Lexicon::word_profiles(
    std::string_view word, const std::optional<std::string>& context_id) const {
    std::vector<const EmotionVector*> out;
    for (const auto& w : words_)
        if (w.word == word && (!context_id || w.context_id == *context_id)) out.push_back(&w.profile);
    return out;
}

Lexicon load_lexicon(std::string_view document, const EngineConfig& config) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("lexicon is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "lexicon must be a JSON object");
    const auto& version = require(doc, "version", "lexicon");
    if (!version.is_number_integer() || version.get<int>() != 1)
        fail(ErrorCode::ValidationError, "lexicon: unsupported version");

    EmotionTaxonomy taxonomy;
    const auto& tax = require(doc, "taxonomy", "lexicon");
    if (!tax.is_array()) fail(ErrorCode::ParseError, "lexicon: taxonomy must be an array");
    for (const auto& n : tax) {
        if (!n.is_string()) fail(ErrorCode::ParseError, "lexicon: taxonomy labels must be strings");
        taxonomy.names.push_back(n.get<std::string>());
    }
    if (taxonomy.dims() != config.emotion_dims) {
        fail(ErrorCode::ValidationError, "lexicon taxonomy has " + std::to_string(taxonomy.dims()) +
                                             " dimensions, engine expects " +
                                             std::to_string(config.emotion_dims));
    }
    const int dims = taxonomy.dims();

    std::vector<WordEntry> words;
    const auto& word_nodes = require(doc, "words", "lexicon");
    if (!word_nodes.is_array()) fail(ErrorCode::ParseError, "lexicon: words must be an array");
    for (std::size_t i = 0; i < word_nodes.size(); ++i) {
        const auto& w = word_nodes[i];
        const std::string where = "lexicon words[" + std::to_string(i) + "]";
        if (!w.is_object()) fail(ErrorCode::ParseError, where + ": must be an object");
        WordEntry entry;
        entry.word = require_string(w, "word", where);
        entry.context_id = require_string(w, "context", where);
        const auto& cluster = require(w, "cluster", where);
        if (!cluster.is_number_integer()) fail(ErrorCode::ParseError, where + ": cluster must be an integer");
        entry.cluster_id = cluster.get<int>();
        entry.profile = parse_profile(require(w, "profile", where), dims, where);
        words.push_back(std::move(entry));
    }

    FeatureProfileMap features;
    if (auto it = doc.find("features"); it != doc.end()) {
        if (!it->is_array()) fail(ErrorCode::ParseError, "lexicon: features must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& f = (*it)[i];
            const std::string where = "lexicon features[" + std::to_string(i) + "]";
            if (!f.is_object()) fail(ErrorCode::ParseError, where + ": must be an object");
            const auto kind = feature_kind_from_string(require_string(f, "kind", where));
            features.insert(kind, require_string(f, "category", where),
                            parse_profile(require(f, "profile", where), dims, where));
        }
    } else {
        fail(ErrorCode::ParseError, "lexicon: missing 'features'");
    }

    std::map<std::string, std::vector<int>> declared;
    if (auto it = doc.find("contexts"); it != doc.end()) {
        if (!it->is_array()) fail(ErrorCode::ParseError, "lexicon: contexts must be an array");
        for (const auto& c : *it) {
            const auto id = require_string(c, "id", "lexicon contexts");
            const auto& clusters = require(c, "clusters", "lexicon contexts");
            if (!clusters.is_array()) fail(ErrorCode::ParseError, "lexicon contexts: clusters must be an array");
            for (const auto& x : clusters) declared[id].push_back(x.get<int>());
        }
    }

    return Lexicon(std::move(taxonomy), std::move(words), std::move(features), config.num_classes, declared);
}

Lexicon load_lexicon_file(const std::filesystem::path& path, const EngineConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot open lexicon " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_lexicon(buf.str(), config);
}

std::string serialize_lexicon(const Lexicon& lexicon) {
    json doc;
    doc["version"] = 1;
    doc["taxonomy"] = lexicon.taxonomy().names;
    doc["words"] = json::array();
    for (const auto& w : lexicon.words()) {
        doc["words"].push_back(
            {{"word", w.word}, {"context", w.context_id}, {"cluster", w.cluster_id}, {"profile", profile_json(w.profile)}});
    }
    doc["features"] = json::array();
    for (const auto& [key, profile] : lexicon.features().entries()) {
        doc["features"].push_back(
            {{"kind", to_string(key.first)}, {"category", key.second}, {"profile", profile_json(profile)}});
    }
    return doc.dump(2);
}

std::vector<WordEntry> words_for_cluster(const Lexicon& lexicon, std::string_view context_id,
                                         int cluster_id) {
    if (cluster_id < 1 || cluster_id > lexicon.num_classes())
        fail(ErrorCode::ValidationError, "cluster " + std::to_string(cluster_id) + " outside [1, " +
                                             std::to_string(lexicon.num_classes()) + "]");
    std::vector<WordEntry> out;
    for (const auto* w : lexicon.words_in_context(context_id))
        if (w->cluster_id == cluster_id) out.push_back(*w);
    return out;
}

double ComponentWeights::of(FeatureKind kind) const noexcept {
    switch (kind) {
    case FeatureKind::Color: return color;
    case FeatureKind::Shape: return shape;
    case FeatureKind::Background: return background;
    }
    return 1.0;
}

std::vector<ProfileComponent> resolve_components(const VariantFeatures& features, const Lexicon& lexicon,
                                                 const ComponentWeights& weights) {
    std::vector<ProfileComponent> components;
    for (auto kind : {FeatureKind::Color, FeatureKind::Shape, FeatureKind::Background}) {
        const auto& category = features.feature(kind);
        if (!category) continue;
        if (const auto* p = lexicon.features().find(kind, *category))
            components.push_back({weights.of(kind), *p});
    }

    if (!features.inscribed_words.empty()) {
        // Sorted so the floating-point sum does not depend on word order.
        auto words = features.inscribed_words;
        std::sort(words.begin(), words.end());
        for (const auto& word : words) {
            auto profiles = lexicon.word_profiles(word, features.context_id);
            if (!profiles.empty()) components.push_back({weights.text, mean_profile(profiles)});
        }
    } else if (features.text_cluster) {
        std::vector<const EmotionVector*> profiles;
        for (const auto& w : lexicon.words())
            if (w.cluster_id == *features.text_cluster &&
                (!features.context_id || w.context_id == *features.context_id))
                profiles.push_back(&w.profile);
        if (!profiles.empty()) components.push_back({weights.text, mean_profile(profiles)});
    }
    return components;
}

EmotionVector combine_components(std::span<const ProfileComponent> components, int dims) {
    if (components.empty()) fail(ErrorCode::MissingProfile, "no component resolves to an emotion profile");
    std::vector<double> sum(static_cast<std::size_t>(dims), 0.0);
    double total_weight = 0.0;
    for (const auto& c : components) {
        if (c.profile.size() != sum.size())
            fail(ErrorCode::DimensionMismatch, "component profile dimension differs from lexicon");
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c.weight * c.profile[i];
        total_weight += c.weight;
    }
    if (!(total_weight > 0.0)) fail(ErrorCode::MissingProfile, "all resolved components carry zero weight");
    for (double& x : sum) x /= total_weight;
    return EmotionVector::from_weights(sum);
}

EmotionVector variant_profile(const VariantFeatures& features, const Lexicon& lexicon,
                              const ComponentWeights& weights) {
    const auto components = resolve_components(features, lexicon, weights);
    if (components.empty())
        fail(ErrorCode::MissingProfile, "no feature of variant '" + features.canonical_key() +
                                            "' resolves to an emotion profile");
    return combine_components(components, lexicon.dims());
}

EmotionTaxonomy default_taxonomy() {
    return EmotionTaxonomy{{"devotion", "peace", "excitement", "trust", "urgency"}};
}

} // namespace affinity
