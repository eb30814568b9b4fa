#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affinity/config.hpp"
#include "affinity/embedding.hpp"
#include "affinity/json.hpp"
#include "affinity/learning.hpp"
#include "affinity/lexicon.hpp"
#include "affinity/types.hpp"

namespace affinity {

struct RankRow {
    int expected_rank = 1;
    int actual_rank = 1;

    friend bool operator==(const RankRow&, const RankRow&) = default;
};

struct RankComparison {
    std::vector<RankRow> rows;

    // Throws ValidationError when a rank is below 1.
    void validate() const;
};

// Fraction of rows whose actual rank equals the expected rank.
// Throws EmptyComparison.
double exact_match_rate(const RankComparison& cmp);

// Shares of rows by how many items the reader placed above the expected
// position: none, exactly one, two or more.
struct RankBreakdown {
    double exact = 0.0;
    double one_above = 0.0;
    double two_or_more_above = 0.0;
};

RankBreakdown rank_breakdown(const RankComparison& cmp);

struct ClassOutcome {
    std::string candidate_id;
    std::optional<int> class_label;
    bool success = false;
};

struct AccuracyReport {
    std::map<int, double> per_class;  // percentage in [0, 100]
    std::map<int, int> counts;
    double overall = 0.0;             // candidate-weighted mean of per_class
};

// Per class, the percentage of candidates whose recommended item reached
// its expected rank. Throws UnclassifiedCandidate, EmptyComparison.
AccuracyReport class_accuracy(std::span<const ClassOutcome> outcomes);

struct RankOutcome {
    std::string candidate_id;
    RankRow row;
};

// Classes are read from the model's assignments.
AccuracyReport class_accuracy(std::span<const RankOutcome> outcomes, const ClusterModel& model);

// Rebuilds per-candidate outcomes from published per-class percentages
// (`per_class_count` candidates per class) and reports on them.
AccuracyReport replay_class_accuracy(const std::map<int, double>& percentages, int per_class_count = 100);

struct SyntheticCandidate {
    std::string candidate_id;
    int true_class = 1;
    std::vector<ResponseExpression> responses;
};

struct SyntheticPopulation {
    int k = 0;
    std::vector<EmotionVector> prototypes;  // prototypes[c - 1] for class c
    std::vector<SyntheticCandidate> candidates;
    std::vector<BaseStimulus> stimuli;
    VariantCatalog variants;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

struct PopulationParams {
    int k = 5;
    int per_class_count = 20;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    int stimuli = 5;
    int variants_per_stimulus = 5;
};

// Class c's prototype is dominant on dimension (c - 1) with small sampled
// residual mass elsewhere. Every candidate rates every variant of every
// stimulus with clamp(round(R * affinity(prototype, variant) + N(0, noise)),
// 0, R). Pure function of (params, lexicon).
//
// Throws InvalidParams.
SyntheticPopulation generate_population(const PopulationParams& params, const Lexicon& lexicon,
                                        const EngineConfig& config);

Json population_json(const SyntheticPopulation& population);
std::vector<ResponseExpression> population_responses(const SyntheticPopulation& population);

struct ExperimentOptions {
    HeadlineTemplate headline;
    std::vector<FeatureKind> feature_kinds{FeatureKind::Color, FeatureKind::Background};
    int train_percent = 80;
};

// "Today: <lead> and <tail> news", slots drawn from the first two contexts.
HeadlineTemplate default_headline(const Lexicon& lexicon);

struct ExperimentResult {
    RankComparison ranks;
    AccuracyReport accuracy;        // per true class, rank-1 success
    double classification_accuracy = 0.0;  // percentage
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    ClusterModel model;
    std::map<int, int> cluster_to_class;
};

// Stable candidate split: FNV-1a of the id, bucket < train_percent trains.
bool in_training_split(const std::string& candidate_id, int train_percent);

// End-to-end replay: cluster the training split, map clusters to true
// classes by majority, classify the test split, embed one item per cluster
// medoid and rank them under each test candidate's true prototype. The
// recommended item (the predicted cluster's) has expected rank 1.
ExperimentResult run_experiment(const SyntheticPopulation& population, const Lexicon& lexicon,
                                const EngineConfig& config, const ExperimentOptions& options);

Json rank_comparison_json(const RankComparison& cmp);
Json accuracy_report_json(const AccuracyReport& report);
std::string rank_comparison_text(const RankComparison& cmp);
std::string accuracy_report_text(const AccuracyReport& report);

} // namespace affinity
