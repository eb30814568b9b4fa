#include "affinity/embedding.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "affinity/affinity.hpp"
#include "affinity/error.hpp"
#include "affinity/json.hpp"

namespace affinity {

void HeadlineTemplate::validate() const {
    if (tokens.empty()) fail(ErrorCode::ValidationError, "headline template has no tokens");
    std::set<std::string> names;
    for (const auto& t : tokens) {
        if (const auto* lit = std::get_if<std::string>(&t)) {
            if (lit->empty()) fail(ErrorCode::ValidationError, "template literal is empty");
            continue;
        }
        const auto& slot = std::get<TemplateSlot>(t);
        if (slot.name.empty() || slot.context_id.empty())
            fail(ErrorCode::ValidationError, "template slot needs a name and a context");
        if (!names.insert(slot.name).second)
            fail(ErrorCode::ValidationError, "template slot '" + slot.name + "' appears twice");
    }
}

std::vector<TemplateSlot> HeadlineTemplate::slots() const {
    std::vector<TemplateSlot> out;
    for (const auto& t : tokens)
        if (const auto* slot = std::get_if<TemplateSlot>(&t)) out.push_back(*slot);
    return out;
}

HeadlineTemplate load_template(std::string_view document) {
    const Json doc = parse_json(document, "headline template");
    HeadlineTemplate tmpl;
    try {
        if (doc.at("version").get<int>() != 1) fail(ErrorCode::ValidationError, "template: unsupported version");
        for (const auto& node : doc.at("tokens")) {
            if (node.contains("literal")) {
                tmpl.tokens.emplace_back(node.at("literal").get<std::string>());
            } else {
                tmpl.tokens.emplace_back(
                    TemplateSlot{node.at("slot").get<std::string>(), node.at("context").get<std::string>()});
            }
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("template: ") + e.what());
    }
    tmpl.validate();
    return tmpl;
}

std::string serialize_template(const HeadlineTemplate& tmpl) {
    Json doc{{"version", 1}, {"tokens", Json::array()}};
    for (const auto& t : tmpl.tokens) {
        if (const auto* lit = std::get_if<std::string>(&t)) {
            doc["tokens"].push_back({{"literal", *lit}});
        } else {
            const auto& slot = std::get<TemplateSlot>(t);
            doc["tokens"].push_back({{"slot", slot.name}, {"context", slot.context_id}});
        }
    }
    return doc.dump(2);
}

std::string EmbeddedVariant::text() const {
    std::string out;
    for (const auto& t : headline) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

namespace {

std::size_t saturating_product(const std::vector<std::vector<const WordEntry*>>& vocab) {
    std::size_t total = 1;
    for (const auto& v : vocab) {
        if (total > std::numeric_limits<std::size_t>::max() / v.size()) return std::numeric_limits<std::size_t>::max();
        total *= v.size();
    }
    return total;
}

} // namespace

EmbeddedVariant embed_headline(const HeadlineTemplate& tmpl, const EmotionVector& target, const Lexicon& lexicon,
                               const EngineConfig& config, const VariantFeatures& base) {
    tmpl.validate();
    if (target.size() != static_cast<std::size_t>(lexicon.dims()))
        fail(ErrorCode::DimensionMismatch, "target emotion vector does not match the lexicon taxonomy");

    const auto slots = tmpl.slots();
    std::vector<std::vector<const WordEntry*>> vocab;
    for (const auto& slot : slots) {
        if (!lexicon.has_context(slot.context_id))
            fail(ErrorCode::EmptySlotVocabulary,
                 "slot '" + slot.name + "' context '" + slot.context_id + "' has no words");
        vocab.push_back(lexicon.words_in_context(slot.context_id));
    }

    const auto base_components = resolve_components(base, lexicon);
    std::vector<ProfileComponent> components = base_components;
    components.reserve(base_components.size() + slots.size());

    // Scores the base components followed by the chosen words of the first
    // `filled` slots.
    auto score_of = [&](const std::vector<std::size_t>& choice, std::size_t filled) {
        components.resize(base_components.size());
        for (std::size_t s = 0; s < filled; ++s) components.push_back({1.0, vocab[s][choice[s]]->profile});
        auto profile = combine_components(components, lexicon.dims());
        const double score = profile_affinity(target, profile);
        return std::make_pair(score, std::move(profile));
    };

    std::vector<std::size_t> best(slots.size(), 0);
    const bool exhaustive = saturating_product(vocab) <= config.exhaustive_limit;
    if (slots.empty()) {
        // Pass-through: only base features contribute.
    } else if (exhaustive) {
        // Odometer in lexicographic order; strict improvement keeps the
        // smallest word tuple among equal scores.
        std::vector<std::size_t> choice(slots.size(), 0);
        double best_score = -1.0;
        bool done = false;
        while (!done) {
            const double score = score_of(choice, slots.size()).first;
            if (score > best_score) {
                best_score = score;
                best = choice;
            }
            std::size_t pos = slots.size();
            for (;;) {
                if (pos == 0) {
                    done = true;
                    break;
                }
                --pos;
                if (++choice[pos] < vocab[pos].size()) break;
                choice[pos] = 0;
            }
        }
    } else {
        for (std::size_t s = 0; s < slots.size(); ++s) {
            double best_score = -1.0;
            auto choice = best;
            for (std::size_t w = 0; w < vocab[s].size(); ++w) {
                choice[s] = w;
                const double score = score_of(choice, s + 1).first;
                if (score > best_score) {
                    best_score = score;
                    best[s] = w;
                }
            }
        }
    }

    auto [score, profile] = score_of(best, slots.size());

    EmbeddedVariant out;
    out.exhaustive = exhaustive;
    out.features = base;
    std::size_t slot_index = 0;
    for (const auto& t : tmpl.tokens) {
        if (const auto* lit = std::get_if<std::string>(&t)) {
            out.headline.push_back(*lit);
        } else {
            const auto& word = vocab[slot_index][best[slot_index]]->word;
            out.headline.push_back(word);
            out.features.inscribed_words.push_back(word);
            ++slot_index;
        }
    }
    if (!slots.empty() && !out.features.context_id) {
        const bool single_context = std::all_of(slots.begin(), slots.end(), [&](const TemplateSlot& s) {
            return s.context_id == slots.front().context_id;
        });
        if (single_context) out.features.context_id = slots.front().context_id;
    }
    out.profile = std::move(profile);
    out.score = score;
    return out;
}

VariantFeatures select_features(const EmotionVector& target, const Lexicon& lexicon,
                                std::span<const FeatureKind> kinds) {
    VariantFeatures out;
    for (auto kind : kinds) {
        const auto categories = lexicon.features().categories(kind);
        if (categories.empty())
            fail(ErrorCode::NoMappedCategory, "lexicon maps no " + to_string(kind) + " category");
        double best_score = -1.0;
        const std::string* best = nullptr;
        for (const auto& [label, profile] : categories) {
            const double score = profile_affinity(target, *profile);
            if (score > best_score) {
                best_score = score;
                best = &label;
            }
        }
        out.feature(kind) = *best;
    }
    return out;
}

std::string to_string(RoundPolicy::Kind kind) {
    return kind == RoundPolicy::Kind::Coverage ? "coverage" : "discrimination";
}

namespace {

struct PoolEntry {
    VariantFeatures features;
    std::string key;
    int dominant = 0;
    double purity = 0.0;
    int components = 0;
};

std::vector<PoolEntry> build_pool(const BaseStimulus& stimulus, const Lexicon& lexicon) {
    std::vector<std::optional<std::string>> colors{std::nullopt};
    for (const auto& [label, p] : lexicon.features().categories(FeatureKind::Color)) colors.emplace_back(label);
    std::vector<std::optional<std::string>> backgrounds{std::nullopt};
    for (const auto& [label, p] : lexicon.features().categories(FeatureKind::Background))
        backgrounds.emplace_back(label);
    std::vector<std::optional<int>> clusters{std::nullopt};
    if (lexicon.has_context(stimulus.context_id))
        for (int c : lexicon.clusters_in_context(stimulus.context_id)) clusters.emplace_back(c);

    std::vector<PoolEntry> pool;
    for (const auto& color : colors) {
        for (const auto& background : backgrounds) {
            for (const auto& cluster : clusters) {
                PoolEntry e;
                e.features.color = color;
                e.features.background = background;
                e.features.text_cluster = cluster;
                if (cluster) e.features.context_id = stimulus.context_id;
                if (e.features.empty()) continue;
                const auto components = resolve_components(e.features, lexicon);
                if (components.empty()) continue;
                const auto profile = combine_components(components, lexicon.dims());
                e.key = e.features.canonical_key();
                e.dominant = profile.dominant();
                e.purity = profile[static_cast<std::size_t>(e.dominant)];
                e.components = static_cast<int>(components.size());
                pool.push_back(std::move(e));
            }
        }
    }
    return pool;
}

} // namespace

std::vector<VariantFeatures> generate_variant_set(const BaseStimulus& stimulus, const Lexicon& lexicon, int count,
                                                  const RoundPolicy& policy) {
    if (count < 2) fail(ErrorCode::InvalidArgument, "a variant set needs at least 2 variants");
    if (!lexicon.has_context(stimulus.context_id))
        fail(ErrorCode::UnknownContext, "unknown context '" + stimulus.context_id + "'");
    const int dims = lexicon.dims();

    // Candidates grouped by dominant dimension, best first.
    std::vector<std::vector<PoolEntry>> by_dim(static_cast<std::size_t>(dims));
    for (auto& e : build_pool(stimulus, lexicon)) by_dim[static_cast<std::size_t>(e.dominant)].push_back(std::move(e));
    for (auto& group : by_dim) {
        std::sort(group.begin(), group.end(), [](const PoolEntry& a, const PoolEntry& b) {
            if (a.purity != b.purity) return a.purity > b.purity;
            if (a.components != b.components) return a.components < b.components;
            return a.key < b.key;
        });
    }
    std::vector<std::size_t> next(static_cast<std::size_t>(dims), 0);
    auto available = [&](int d) { return next[static_cast<std::size_t>(d)] < by_dim[static_cast<std::size_t>(d)].size(); };
    auto take = [&](int d) { return by_dim[static_cast<std::size_t>(d)][next[static_cast<std::size_t>(d)]++].features; };

    std::vector<int> order;
    if (policy.kind == RoundPolicy::Kind::Coverage) {
        for (int d = 0; d < dims; ++d) order.push_back(d);
    } else {
        for (int d : policy.focus) {
            if (d < 0 || d >= dims) fail(ErrorCode::InvalidArgument, "discrimination focus dimension out of range");
            if (std::find(order.begin(), order.end(), d) == order.end()) order.push_back(d);
        }
    }

    std::vector<VariantFeatures> out;
    std::size_t cursor = 0;
    while (static_cast<int>(out.size()) < count) {
        bool picked = false;
        for (std::size_t step = 0; step < order.size(); ++step) {
            const int d = order[(cursor + step) % order.size()];
            if (!available(d)) continue;
            out.push_back(take(d));
            cursor = (cursor + step + 1) % order.size();
            picked = true;
            break;
        }
        if (!picked) {
            fail(ErrorCode::InsufficientVocabulary,
                 "lexicon supports only " + std::to_string(out.size()) + " distinct variants for stimulus '" +
                     stimulus.stimulus_id + "' under the " + to_string(policy.kind) + " policy, " +
                     std::to_string(count) + " requested");
        }
    }
    return out;
}

} // namespace affinity
