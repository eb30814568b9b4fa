#include <random>

#include <benchmark/benchmark.h>

#include "affinity/embedding.hpp"
#include "affinity/evaluation.hpp"
#include "affinity/learning.hpp"
#include "affinity/lexicon.hpp"
#include "affinity/ranking.hpp"

using namespace affinity;

namespace {

const Lexicon& lexicon() {
    static const Lexicon lex =
        load_lexicon_file(std::filesystem::path(AFFINITY_FIXTURES_DIR) / "lexicon" / "default.json", EngineConfig{});
    return lex;
}

SyntheticPopulation population(int per_class, double noise) {
    PopulationParams p;
    p.per_class_count = per_class;
    p.noise_level = noise;
    p.seed = 1;
    return generate_population(p, lexicon(), EngineConfig{});
}

EmotionVector random_vector(std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(5);
    for (auto& x : w) x = e(rng);
    return EmotionVector::from_weights(w);
}

} // namespace

static void BM_ClusterCandidates(benchmark::State& state) {
    const auto data = group_by_candidate(population_responses(population(static_cast<int>(state.range(0)), 1.0)));
    const EngineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(cluster_candidates(data, 5, cfg));
    state.SetComplexityN(static_cast<long>(data.size()));
}
BENCHMARK(BM_ClusterCandidates)->Arg(10)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_ClassifyCandidate(benchmark::State& state) {
    const auto pop = population(20, 1.0);
    const auto data = group_by_candidate(population_responses(pop));
    const EngineConfig cfg;
    const auto model = cluster_candidates(data, 5, cfg);
    const auto& probe = data.begin()->second;
    for (auto _ : state) benchmark::DoNotOptimize(classify_candidate(probe, model, cfg));
}
BENCHMARK(BM_ClassifyCandidate);

static void BM_EmbedHeadline(benchmark::State& state) {
    // Slots share one 15-word context, so 1, 2 and 3 slots cover 15, 225 and
    // 3375 combinations; 4 slots exceed the exhaustive limit.
    HeadlineTemplate t;
    for (int s = 0; s < state.range(0); ++s) t.tokens.emplace_back(TemplateSlot{"s" + std::to_string(s), "politics"});
    std::mt19937_64 rng(3);
    const auto target = random_vector(rng);
    const EngineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(embed_headline(t, target, lexicon(), cfg));
}
BENCHMARK(BM_EmbedHeadline)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

static void BM_GenerateVariantSet(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_variant_set({"stim", "sports"}, lexicon(), 5, RoundPolicy::coverage()));
}
BENCHMARK(BM_GenerateVariantSet)->Unit(benchmark::kMicrosecond);

static void BM_RankItems(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<ItemProfile> items;
    for (int i = 0; i < state.range(0); ++i) items.push_back({"item-" + std::to_string(i), random_vector(rng)});
    const auto reader = random_vector(rng);
    for (auto _ : state) benchmark::DoNotOptimize(rank_items(reader, items));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RankItems)->RangeMultiplier(10)->Range(10, 100000)->Complexity();

static void BM_SyntheticExperiment(benchmark::State& state) {
    const auto pop = population(20, 1.0);
    ExperimentOptions options;
    options.headline = default_headline(lexicon());
    const EngineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(pop, lexicon(), cfg, options));
}
BENCHMARK(BM_SyntheticExperiment)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
