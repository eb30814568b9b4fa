#include "affinity/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "affinity/affinity.hpp"
#include "affinity/error.hpp"
#include "affinity/ranking.hpp"

namespace affinity {

void RankComparison::validate() const {
    for (const auto& r : rows)
        if (r.expected_rank < 1 || r.actual_rank < 1) fail(ErrorCode::ValidationError, "ranks must be >= 1");
}

double exact_match_rate(const RankComparison& cmp) {
    if (cmp.rows.empty()) fail(ErrorCode::EmptyComparison, "rank comparison has no rows");
    cmp.validate();
    const auto matches = std::count_if(cmp.rows.begin(), cmp.rows.end(),
                                       [](const RankRow& r) { return r.actual_rank == r.expected_rank; });
    return static_cast<double>(matches) / static_cast<double>(cmp.rows.size());
}

RankBreakdown rank_breakdown(const RankComparison& cmp) {
    if (cmp.rows.empty()) fail(ErrorCode::EmptyComparison, "rank comparison has no rows");
    cmp.validate();
    int exact = 0, one = 0, more = 0;
    for (const auto& r : cmp.rows) {
        const int above = r.actual_rank - r.expected_rank;
        if (above <= 0) ++exact;
        else if (above == 1) ++one;
        else ++more;
    }
    const auto n = static_cast<double>(cmp.rows.size());
    return {exact / n, one / n, more / n};
}

AccuracyReport class_accuracy(std::span<const ClassOutcome> outcomes) {
    if (outcomes.empty()) fail(ErrorCode::EmptyComparison, "no outcomes to report on");
    std::map<int, int> successes;
    AccuracyReport report;
    for (const auto& o : outcomes) {
        if (!o.class_label)
            fail(ErrorCode::UnclassifiedCandidate, "candidate '" + o.candidate_id + "' has no class");
        ++report.counts[*o.class_label];
        if (o.success) ++successes[*o.class_label];
    }
    int total_success = 0;
    for (const auto& [cls, n] : report.counts) {
        report.per_class[cls] = 100.0 * successes[cls] / n;
        total_success += successes[cls];
    }
    report.overall = 100.0 * total_success / static_cast<double>(outcomes.size());
    return report;
}

AccuracyReport class_accuracy(std::span<const RankOutcome> outcomes, const ClusterModel& model) {
    std::vector<ClassOutcome> classed;
    classed.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        ClassOutcome c{o.candidate_id, std::nullopt, o.row.actual_rank == o.row.expected_rank};
        if (auto it = model.assignments.find(o.candidate_id); it != model.assignments.end())
            c.class_label = it->second.value;
        classed.push_back(std::move(c));
    }
    return class_accuracy(classed);
}

AccuracyReport replay_class_accuracy(const std::map<int, double>& percentages, int per_class_count) {
    if (per_class_count < 1) fail(ErrorCode::InvalidParams, "per_class_count must be >= 1");
    std::vector<ClassOutcome> outcomes;
    for (const auto& [cls, pct] : percentages) {
        if (pct < 0.0 || pct > 100.0) fail(ErrorCode::ValidationError, "percentage outside [0, 100]");
        const auto successes = static_cast<int>(std::lround(pct * per_class_count / 100.0));
        for (int i = 0; i < per_class_count; ++i) {
            outcomes.push_back({"class" + std::to_string(cls) + "-" + std::to_string(i), cls, i < successes});
        }
    }
    return class_accuracy(outcomes);
}

namespace {

// Residual mass per non-dominant prototype dimension is drawn from
// [0, kResidualMax), which keeps the dominant entry above 0.9 for m <= 5.
constexpr double kResidualMax = 0.025;

std::string candidate_name(int index) {
    std::ostringstream out;
    out << "cand-" << std::setw(4) << std::setfill('0') << index;
    return out.str();
}

} // namespace

SyntheticPopulation generate_population(const PopulationParams& params, const Lexicon& lexicon,
                                        const EngineConfig& config) {
    if (params.k < 1) fail(ErrorCode::InvalidParams, "k must be >= 1");
    if (params.k > lexicon.dims())
        fail(ErrorCode::InvalidParams, "k exceeds the number of emotion dimensions");
    if (params.per_class_count < 1) fail(ErrorCode::InvalidParams, "per_class_count must be >= 1");
    if (!(params.noise_level >= 0.0) || !std::isfinite(params.noise_level))
        fail(ErrorCode::InvalidParams, "noise_level must be a finite number >= 0");
    if (params.stimuli < 1) fail(ErrorCode::InvalidParams, "stimuli must be >= 1");

    SyntheticPopulation pop;
    pop.k = params.k;
    pop.noise_level = params.noise_level;
    pop.seed = params.seed;

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> residual(0.0, kResidualMax);
    const int dims = lexicon.dims();
    for (int c = 0; c < params.k; ++c) {
        std::vector<double> w(static_cast<std::size_t>(dims));
        for (int d = 0; d < dims; ++d) w[static_cast<std::size_t>(d)] = d == c ? 1.0 : residual(rng);
        pop.prototypes.push_back(EmotionVector::from_weights(w));
    }

    const auto contexts = lexicon.contexts();
    if (contexts.empty()) fail(ErrorCode::InvalidParams, "lexicon has no contexts");
    struct DesignVariant {
        std::string stimulus_id;
        std::string context_id;
        std::string variant_id;
        EmotionVector profile;
    };
    std::vector<DesignVariant> design;
    for (int s = 0; s < params.stimuli; ++s) {
        BaseStimulus stim{"stim-" + std::to_string(s + 1), contexts[static_cast<std::size_t>(s) % contexts.size()]};
        for (auto& features :
             generate_variant_set(stim, lexicon, params.variants_per_stimulus, RoundPolicy::coverage())) {
            const auto id = features.canonical_key();
            design.push_back({stim.stimulus_id, stim.context_id, id, variant_profile(features, lexicon)});
            pop.variants.emplace(id, std::move(features));
        }
        pop.stimuli.push_back(std::move(stim));
    }

    std::normal_distribution<double> noise(0.0, params.noise_level > 0.0 ? params.noise_level : 1.0);
    int index = 0;
    for (int c = 1; c <= params.k; ++c) {
        const auto& prototype = pop.prototypes[static_cast<std::size_t>(c - 1)];
        for (int i = 0; i < params.per_class_count; ++i) {
            SyntheticCandidate cand;
            cand.candidate_id = candidate_name(index++);
            cand.true_class = c;
            for (const auto& v : design) {
                double x = config.rating_max * profile_affinity(prototype, v.profile);
                if (params.noise_level > 0.0) x += noise(rng);
                const int rating = std::clamp(static_cast<int>(std::lround(x)), 0, config.rating_max);
                cand.responses.push_back({cand.candidate_id, v.stimulus_id, v.variant_id, v.context_id, Rating{rating}});
            }
            pop.candidates.push_back(std::move(cand));
        }
    }
    return pop;
}

Json population_json(const SyntheticPopulation& population) {
    Json doc{{"version", 1},
             {"k", population.k},
             {"noise_level", population.noise_level},
             {"seed", population.seed},
             {"prototypes", population.prototypes},
             {"stimuli", Json::array()},
             {"variants", Json::object()},
             {"candidates", Json::array()}};
    for (const auto& s : population.stimuli)
        doc["stimuli"].push_back({{"id", s.stimulus_id}, {"context", s.context_id}});
    for (const auto& [id, f] : population.variants) doc["variants"][id] = f;
    for (const auto& c : population.candidates)
        doc["candidates"].push_back({{"id", c.candidate_id}, {"class", c.true_class}});
    return doc;
}

std::vector<ResponseExpression> population_responses(const SyntheticPopulation& population) {
    std::vector<ResponseExpression> out;
    for (const auto& c : population.candidates) out.insert(out.end(), c.responses.begin(), c.responses.end());
    return out;
}

HeadlineTemplate default_headline(const Lexicon& lexicon) {
    const auto contexts = lexicon.contexts();
    if (contexts.empty()) fail(ErrorCode::InvalidParams, "lexicon has no contexts");
    HeadlineTemplate tmpl;
    tmpl.tokens.emplace_back(std::string("Today:"));
    tmpl.tokens.emplace_back(TemplateSlot{"lead", contexts.front()});
    tmpl.tokens.emplace_back(std::string("and"));
    tmpl.tokens.emplace_back(TemplateSlot{"tail", contexts[1 % contexts.size()]});
    tmpl.tokens.emplace_back(std::string("news"));
    return tmpl;
}

bool in_training_split(const std::string& candidate_id, int train_percent) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : candidate_id) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return static_cast<int>(h % 100) < train_percent;
}

ExperimentResult run_experiment(const SyntheticPopulation& population, const Lexicon& lexicon,
                                const EngineConfig& config, const ExperimentOptions& options) {
    ExperimentResult result;
    CandidateResponses train;
    std::vector<const SyntheticCandidate*> test;
    std::map<std::string, int> true_class;
    for (const auto& c : population.candidates) {
        true_class[c.candidate_id] = c.true_class;
        if (in_training_split(c.candidate_id, options.train_percent)) train.emplace(c.candidate_id, c.responses);
        else test.push_back(&c);
    }
    result.train_size = train.size();
    result.test_size = test.size();

    result.model = cluster_candidates(train, population.k, config);
    attach_medoid_profiles(result.model, lexicon, population.variants, config);

    // Cluster -> majority true class among its training members; ties go to
    // the smaller class.
    std::map<int, std::map<int, int>> votes;
    for (const auto& [id, cls] : result.model.assignments) ++votes[cls.value][true_class.at(id)];
    for (const auto& [cluster, tally] : votes) {
        int best = 0, best_count = -1;
        for (const auto& [cls, n] : tally)
            if (n > best_count) {
                best = cls;
                best_count = n;
            }
        result.cluster_to_class[cluster] = best;
    }

    // One embedded item per cluster, targeted at the medoid's emotion vector.
    std::vector<ItemProfile> items;
    for (const auto& med : result.model.medoids) {
        const auto base = select_features(*med.ev, lexicon, options.feature_kinds);
        auto embedded = embed_headline(options.headline, *med.ev, lexicon, config, base);
        items.push_back({"item-" + std::to_string(med.cls.value), std::move(embedded.profile)});
    }

    std::vector<ClassOutcome> outcomes;
    int correct = 0;
    for (const auto* cand : test) {
        const auto cluster = classify_candidate(cand->responses, result.model, config);
        auto mapped = result.cluster_to_class.find(cluster.value);
        if (mapped != result.cluster_to_class.end() && mapped->second == cand->true_class) ++correct;

        const auto& prototype = population.prototypes[static_cast<std::size_t>(cand->true_class - 1)];
        const auto ranking = rank_items(prototype, items);
        const int actual = expected_rank("item-" + std::to_string(cluster.value), ranking);
        result.ranks.rows.push_back({1, actual});
        outcomes.push_back({cand->candidate_id, cand->true_class, actual == 1});
    }
    if (!test.empty()) {
        result.classification_accuracy = 100.0 * correct / static_cast<double>(test.size());
        result.accuracy = class_accuracy(outcomes);
    }
    return result;
}

Json rank_comparison_json(const RankComparison& cmp) {
    Json rows = Json::array();
    for (const auto& r : cmp.rows) rows.push_back({{"expected_rank", r.expected_rank}, {"actual_rank", r.actual_rank}});
    Json doc{{"rows", rows}};
    if (!cmp.rows.empty()) {
        const auto b = rank_breakdown(cmp);
        doc["exact_match_rate"] = exact_match_rate(cmp);
        doc["one_above_share"] = b.one_above;
        doc["two_or_more_above_share"] = b.two_or_more_above;
    }
    return doc;
}

Json accuracy_report_json(const AccuracyReport& report) {
    Json per_class = Json::object();
    for (const auto& [cls, pct] : report.per_class) per_class[std::to_string(cls)] = pct;
    Json counts = Json::object();
    for (const auto& [cls, n] : report.counts) counts[std::to_string(cls)] = n;
    return Json{{"per_class", per_class}, {"counts", counts}, {"overall", report.overall}};
}

std::string rank_comparison_text(const RankComparison& cmp) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Serial" << std::setw(15) << "Expected Rank" << "Actual Rank\n";
    for (std::size_t i = 0; i < cmp.rows.size(); ++i)
        out << std::left << std::setw(10) << i + 1 << std::setw(15) << cmp.rows[i].expected_rank
            << cmp.rows[i].actual_rank << '\n';
    if (!cmp.rows.empty()) {
        const auto b = rank_breakdown(cmp);
        out << std::fixed << std::setprecision(2) << "exact match rate: " << b.exact
            << "\none above: " << b.one_above << "\ntwo or more above: " << b.two_or_more_above << '\n';
    }
    return out.str();
}

std::string accuracy_report_text(const AccuracyReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Class" << std::setw(12) << "Accuracy %" << "Candidates\n";
    out << std::fixed << std::setprecision(1);
    for (const auto& [cls, pct] : report.per_class)
        out << std::left << std::setw(10) << cls << std::setw(12) << pct << report.counts.at(cls) << '\n';
    out << "overall: " << report.overall << '\n';
    return out.str();
}

} // namespace affinity
