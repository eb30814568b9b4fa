#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <map>

#include "affinity/affinity.hpp"
#include "affinity/config.hpp"

#ifndef AFFINITY_FIXTURES_DIR
#define AFFINITY_FIXTURES_DIR "fixtures"
#endif

namespace fs = std::filesystem;

namespace affinity::testing {

fs::path fixtures_dir() { return AFFINITY_FIXTURES_DIR; }

const Lexicon& default_lexicon() {
    static const Lexicon lex = load_lexicon_file(fixtures_dir() / "lexicon" / "default.json", EngineConfig{});
    return lex;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("affinity-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ResponseExpression response(const std::string& candidate, const std::string& stimulus, const std::string& variant,
                            int rating, const std::string& context) {
    return {candidate, stimulus, variant, context, Rating{rating}};
}

CandidateResponses random_dataset(std::mt19937_64& rng, int candidates, int keys, int rating_max, double coverage) {
    std::uniform_int_distribution<int> rating(0, rating_max);
    std::bernoulli_distribution rated(coverage);
    CandidateResponses out;
    for (int c = 0; c < candidates; ++c) {
        const std::string id = "c" + std::to_string(c);
        auto& list = out[id];
        for (int s = 0; s < keys; ++s)
            if (s == 0 || rated(rng)) list.push_back(response(id, "s" + std::to_string(s), "v", rating(rng)));
    }
    return out;
}

EmotionVector random_simplex(std::mt19937_64& rng, int dims) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(static_cast<std::size_t>(dims));
    for (auto& x : w) x = e(rng) + 1e-12;
    return EmotionVector::from_weights(w);
}

Lexicon random_lexicon(std::mt19937_64& rng, int dims, int contexts, int words, int num_classes) {
    EmotionTaxonomy tax;
    for (int d = 0; d < dims; ++d) tax.names.push_back("dim" + std::to_string(d));
    std::uniform_int_distribution<int> cluster(1, num_classes);
    std::vector<WordEntry> entries;
    for (int c = 0; c < contexts; ++c)
        for (int w = 0; w < words; ++w)
            entries.push_back({"w" + std::to_string(c) + "_" + std::to_string(w), "ctx-" + std::to_string(c),
                               cluster(rng), random_simplex(rng, dims)});
    FeatureProfileMap features;
    for (int d = 0; d < dims; ++d) {
        features.insert(FeatureKind::Color, "color" + std::to_string(d), EmotionVector::one_hot(dims, d));
        features.insert(FeatureKind::Background, "bg" + std::to_string(d), EmotionVector::one_hot(dims, d));
    }
    features.insert(FeatureKind::Color, "mixed-a", random_simplex(rng, dims));
    features.insert(FeatureKind::Color, "mixed-b", random_simplex(rng, dims));
    return Lexicon(tax, std::move(entries), std::move(features), num_classes);
}

HeadlineTemplate random_template(std::mt19937_64& rng, const Lexicon& lexicon, std::size_t limit) {
    const auto contexts = lexicon.contexts();
    std::uniform_int_distribution<int> slot_count(1, 3);
    std::uniform_int_distribution<std::size_t> pick(0, contexts.size() - 1);
    for (;;) {
        HeadlineTemplate t;
        std::size_t product = 1;
        const int n = slot_count(rng);
        t.tokens.emplace_back(std::string("Head"));
        for (int s = 0; s < n; ++s) {
            const auto& ctx = contexts[pick(rng)];
            product *= lexicon.words_in_context(ctx).size();
            t.tokens.emplace_back(TemplateSlot{"slot" + std::to_string(s), ctx});
            t.tokens.emplace_back(std::string("and"));
        }
        if (product <= limit) return t;
    }
}

double oracle_candidate_affinity(const std::vector<ResponseExpression>& a, const std::vector<ResponseExpression>& b,
                                 int rating_max) {
    std::map<StimulusKey, int> lookup;
    for (const auto& r : b) lookup[r.key()] = r.rating.value;
    double total = 0.0;
    int shared = 0;
    for (const auto& r : a) {
        auto it = lookup.find(r.key());
        if (it == lookup.end()) continue;
        total += 1.0 - std::abs(r.rating.value - it->second) / static_cast<double>(rating_max);
        ++shared;
    }
    return shared ? total / shared : -1.0;
}

double oracle_best_objective(const CandidateResponses& dataset, int k, int rating_max) {
    std::vector<const std::vector<ResponseExpression>*> lists;
    for (const auto& [id, list] : dataset) lists.push_back(&list);
    const int n = static_cast<int>(lists.size());
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = oracle_candidate_affinity(*lists[i], *lists[j], rating_max);

    double best = -1.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double m = -1.0;
            for (int j = 0; j < n; ++j)
                if (mask & (1u << j)) m = std::max(m, a[i][j]);
            total += m;
        }
        best = std::max(best, total);
    }
    return best;
}

OracleEmbedding oracle_embedding(const HeadlineTemplate& tmpl, const EmotionVector& target, const Lexicon& lexicon,
                                 const std::vector<std::vector<double>>& base_profiles) {
    const auto dims = static_cast<std::size_t>(lexicon.dims());
    std::vector<std::vector<std::pair<std::string, std::vector<double>>>> vocab;
    for (const auto& token : tmpl.tokens) {
        const auto* slot = std::get_if<TemplateSlot>(&token);
        if (!slot) continue;
        std::vector<std::pair<std::string, std::vector<double>>> words;
        for (const auto& e : lexicon.words())
            if (e.context_id == slot->context_id)
                words.emplace_back(e.word, std::vector<double>(e.profile.values().begin(), e.profile.values().end()));
        std::sort(words.begin(), words.end());
        vocab.push_back(std::move(words));
    }

    OracleEmbedding best;
    std::vector<std::size_t> idx(vocab.size(), 0);
    auto evaluate = [&] {
        std::vector<double> sum(dims, 0.0);
        double count = 0.0;
        auto add = [&](const std::vector<double>& p) {
            for (std::size_t i = 0; i < dims; ++i) sum[i] += 1.0 * p[i];
            count += 1.0;
        };
        for (const auto& p : base_profiles) add(p);
        for (std::size_t s = 0; s < vocab.size(); ++s) add(vocab[s][idx[s]].second);
        for (auto& x : sum) x /= count;
        double total = 0.0;
        for (double x : sum) total += x;
        double dot = 0.0;
        for (std::size_t i = 0; i < dims; ++i) dot += target[i] * (sum[i] / total);
        dot = std::clamp(dot, 0.0, 1.0);
        std::vector<std::string> words;
        for (std::size_t s = 0; s < vocab.size(); ++s) words.push_back(vocab[s][idx[s]].first);
        if (dot > best.score || (dot == best.score && words < best.words)) best = {dot, words};
    };
    // Recursive enumeration over slots.
    auto recurse = [&](auto&& self, std::size_t s) -> void {
        if (s == vocab.size()) {
            evaluate();
            return;
        }
        for (std::size_t w = 0; w < vocab[s].size(); ++w) {
            idx[s] = w;
            self(self, s + 1);
        }
    };
    recurse(recurse, 0);
    return best;
}

std::vector<double> oracle_emotion_vector(const std::vector<std::pair<double, std::vector<double>>>& terms, int dims) {
    std::vector<double> sum(static_cast<std::size_t>(dims), 0.0);
    for (const auto& [w, p] : terms)
        for (int i = 0; i < dims; ++i) sum[i] += w * p[i];
    double total = 0.0;
    for (double x : sum) total += x;
    if (total == 0.0) return std::vector<double>(static_cast<std::size_t>(dims), 1.0 / dims);
    for (auto& x : sum) x /= total;
    return sum;
}

} // namespace affinity::testing
