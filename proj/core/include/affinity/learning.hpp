#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affinity/affinity.hpp"
#include "affinity/config.hpp"
#include "affinity/lexicon.hpp"
#include "affinity/types.hpp"

namespace affinity {

using VariantCatalog = std::map<std::string, VariantFeatures>;
using CandidateResponses = std::map<std::string, std::vector<ResponseExpression>>;

CandidateResponses group_by_candidate(std::span<const ResponseExpression> responses);

struct WeightedProfile {
    double weight = 0.0;
    EmotionVector profile;
};

// sum(weight * profile) normalized to the simplex; uniform when the sum is 0.
EmotionVector accumulate_emotion_vector(std::span<const WeightedProfile> terms, int dims);

// PV_i = mean(rating / R) over responses whose variant profile is dominant
// on dimension i (lowest index wins argmax ties). Dimensions without a
// response are 0 with support=false.
// Throws InvalidArgument on empty input, UnknownVariant on an unresolvable
// variant id.
PersonalityVector derive_personality_vector(std::span<const ResponseExpression> responses,
                                            const Lexicon& lexicon, const VariantCatalog& variants,
                                            const EngineConfig& config);

// Rating-weighted sum of variant profiles, normalized; uniform for an
// all-zero candidate.
EmotionVector derive_emotion_vector(std::span<const ResponseExpression> responses,
                                    const Lexicon& lexicon, const VariantCatalog& variants,
                                    const EngineConfig& config);

struct CandidateProfile {
    std::string candidate_id;
    PersonalityVector pv;
    EmotionVector ev;
    std::optional<EmotionalClass> cls;

    friend bool operator==(const CandidateProfile&, const CandidateProfile&) = default;
};

CandidateProfile derive_profile(std::string candidate_id, std::span<const ResponseExpression> responses,
                                const Lexicon& lexicon, const VariantCatalog& variants,
                                const EngineConfig& config);

struct Medoid {
    std::string candidate_id;
    EmotionalClass cls;
    std::vector<ResponseExpression> responses;
    // Filled by attach_medoid_profiles; required for profile-based
    // classification.
    std::optional<EmotionVector> ev;

    friend bool operator==(const Medoid&, const Medoid&) = default;
};

struct ClusterModel {
    int k = 0;
    std::vector<Medoid> medoids;  // medoids[c - 1] belongs to class c
    std::map<std::string, EmotionalClass> assignments;
    double objective = 0.0;
    int iterations = 0;
    bool hit_iteration_cap = false;

    const Medoid& medoid(EmotionalClass cls) const;

    friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

// Dense pairwise candidate affinity over candidates in id order.
struct AffinityMatrix {
    std::vector<std::string> ids;
    std::vector<double> values;  // row-major ids.size() x ids.size()

    double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
};

// Throws NoSharedStimuli naming the first pair without a shared key.
AffinityMatrix affinity_matrix(const CandidateResponses& dataset, const EngineConfig& config);

// k-medoids maximizing the summed affinity of every candidate to its
// medoid. Seeding is farthest-first from the smallest candidate id; then
// best-improvement swaps run until none improves the objective by more than
// the tolerance or max_swap_iterations is reached. Ties go to the smaller
// candidate id, classes are numbered 1..k in medoid id order.
//
// Throws TooFewCandidates, NoSharedStimuli, InvalidArgument.
ClusterModel cluster_candidates(const CandidateResponses& dataset, int k, const EngineConfig& config);

// Summed affinity of members to their medoids, from scratch.
double recompute_objective(const ClusterModel& model, const CandidateResponses& dataset,
                           const EngineConfig& config);

void attach_medoid_profiles(ClusterModel& model, const Lexicon& lexicon, const VariantCatalog& variants,
                            const EngineConfig& config);

// Class of the maximum-affinity medoid; ties go to the lowest class.
// Throws EmptyModel, NoSharedStimuli.
EmotionalClass classify_candidate(std::span<const ResponseExpression> responses, const ClusterModel& model,
                                  const EngineConfig& config);

// Profile path: compares `ev` to each medoid's emotion vector.
// Throws EmptyModel when the model lacks medoid profiles.
EmotionalClass classify_profile(const EmotionVector& ev, const ClusterModel& model);

std::string serialize_model(const ClusterModel& model);
ClusterModel load_model(std::string_view document, const EngineConfig& config);

} // namespace affinity
