#include "affinity/learning.hpp"

#include <algorithm>
#include <limits>

#include "affinity/error.hpp"
#include "affinity/json.hpp"

namespace affinity {

namespace {

class ProfileCache {
public:
    ProfileCache(const Lexicon& lexicon, const VariantCatalog& variants)
        : lexicon_(lexicon), variants_(variants) {}

    const EmotionVector& get(const std::string& variant_id) {
        if (auto it = cache_.find(variant_id); it != cache_.end()) return it->second;
        auto v = variants_.find(variant_id);
        if (v == variants_.end()) fail(ErrorCode::UnknownVariant, "unknown variant '" + variant_id + "'");
        return cache_.emplace(variant_id, variant_profile(v->second, lexicon_)).first->second;
    }

private:
    const Lexicon& lexicon_;
    const VariantCatalog& variants_;
    std::map<std::string, EmotionVector> cache_;
};

void require_responses(std::span<const ResponseExpression> responses) {
    if (responses.empty()) fail(ErrorCode::InvalidArgument, "no responses to learn from");
}

} // namespace

CandidateResponses group_by_candidate(std::span<const ResponseExpression> responses) {
    CandidateResponses out;
    for (const auto& r : responses) out[r.candidate_id].push_back(r);
    return out;
}

EmotionVector accumulate_emotion_vector(std::span<const WeightedProfile> terms, int dims) {
    std::vector<double> sum(static_cast<std::size_t>(dims), 0.0);
    for (const auto& t : terms) {
        if (t.profile.size() != sum.size())
            fail(ErrorCode::DimensionMismatch, "profile dimension differs from engine dimension");
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += t.weight * t.profile[i];
    }
    double total = 0.0;
    for (double x : sum) total += x;
    if (!(total > 0.0)) return EmotionVector::uniform(dims);
    return EmotionVector::from_weights(sum);
}

PersonalityVector derive_personality_vector(std::span<const ResponseExpression> responses,
                                            const Lexicon& lexicon, const VariantCatalog& variants,
                                            const EngineConfig& config) {
    require_responses(responses);
    ProfileCache profiles(lexicon, variants);
    const auto dims = static_cast<std::size_t>(config.emotion_dims);
    std::vector<double> sum(dims, 0.0);
    std::vector<int> count(dims, 0);
    for (const auto& r : responses) {
        const auto& profile = profiles.get(r.variant_id);
        if (profile.size() != dims)
            fail(ErrorCode::DimensionMismatch, "variant profile dimension differs from engine dimension");
        const auto d = static_cast<std::size_t>(profile.dominant());
        sum[d] += static_cast<double>(r.rating.value) / config.rating_max;
        ++count[d];
    }
    PersonalityVector pv;
    pv.values.assign(dims, 0.0);
    pv.support.assign(dims, false);
    for (std::size_t i = 0; i < dims; ++i) {
        if (count[i] == 0) continue;
        pv.values[i] = sum[i] / count[i];
        pv.support[i] = true;
    }
    return pv;
}

EmotionVector derive_emotion_vector(std::span<const ResponseExpression> responses,
                                    const Lexicon& lexicon, const VariantCatalog& variants,
                                    const EngineConfig& config) {
    require_responses(responses);
    ProfileCache profiles(lexicon, variants);
    std::vector<WeightedProfile> terms;
    terms.reserve(responses.size());
    for (const auto& r : responses)
        terms.push_back({static_cast<double>(r.rating.value) / config.rating_max, profiles.get(r.variant_id)});
    return accumulate_emotion_vector(terms, config.emotion_dims);
}

CandidateProfile derive_profile(std::string candidate_id, std::span<const ResponseExpression> responses,
                                const Lexicon& lexicon, const VariantCatalog& variants,
                                const EngineConfig& config) {
    CandidateProfile p;
    p.candidate_id = std::move(candidate_id);
    p.pv = derive_personality_vector(responses, lexicon, variants, config);
    p.ev = derive_emotion_vector(responses, lexicon, variants, config);
    return p;
}

const Medoid& ClusterModel::medoid(EmotionalClass cls) const {
    if (cls.value < 1 || cls.value > static_cast<int>(medoids.size()))
        fail(ErrorCode::ValidationError, "class " + std::to_string(cls.value) + " has no medoid");
    return medoids[static_cast<std::size_t>(cls.value - 1)];
}

AffinityMatrix affinity_matrix(const CandidateResponses& dataset, const EngineConfig& config) {
    AffinityMatrix m;
    std::vector<ResponseIndex> indexes;
    for (const auto& [id, responses] : dataset) {
        m.ids.push_back(id);
        indexes.emplace_back(responses);
    }
    const std::size_t n = m.ids.size();
    m.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.values[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (indexes[i].shared_keys(indexes[j]) == 0)
                fail(ErrorCode::NoSharedStimuli,
                     "candidates '" + m.ids[i] + "' and '" + m.ids[j] + "' share no stimulus key");
            const double a = indexes[i].affinity_with(indexes[j], config.rating_max);
            m.values[i * n + j] = a;
            m.values[j * n + i] = a;
        }
    }
    return m;
}

namespace {

// Summed best affinity of each candidate to the medoid set.
double objective_of(const AffinityMatrix& m, const std::vector<std::size_t>& medoids) {
    const std::size_t n = m.ids.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1.0;
        for (auto c : medoids) best = std::max(best, m.at(i, c));
        total += best;
    }
    return total;
}

} // namespace

ClusterModel cluster_candidates(const CandidateResponses& dataset, int k, const EngineConfig& config) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
    if (static_cast<int>(dataset.size()) < k)
        fail(ErrorCode::TooFewCandidates, std::to_string(dataset.size()) + " candidates cannot form " +
                                              std::to_string(k) + " clusters");

    const AffinityMatrix m = affinity_matrix(dataset, config);
    const std::size_t n = m.ids.size();
    const auto kk = static_cast<std::size_t>(k);

    // Farthest-first seeding. ids are sorted, so index order is id order.
    std::vector<std::size_t> medoids{0};
    std::vector<bool> is_medoid(n, false);
    is_medoid[0] = true;
    while (medoids.size() < kk) {
        std::size_t pick = n;
        double pick_nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (is_medoid[i]) continue;
            double nearest = -1.0;
            for (auto c : medoids) nearest = std::max(nearest, m.at(i, c));
            if (nearest < pick_nearest) {
                pick_nearest = nearest;
                pick = i;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = true;
    }

    // Best-improvement swaps. For each candidate keep the best and second
    // best medoid affinity so one swap evaluates in O(n).
    double objective = objective_of(m, medoids);
    int iterations = 0;
    bool hit_cap = false;
    std::vector<double> best1(n), best2(n);
    std::vector<std::size_t> best1_slot(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) {
            best1[i] = -1.0;
            best2[i] = -1.0;
            best1_slot[i] = 0;
            for (std::size_t s = 0; s < kk; ++s) {
                const double a = m.at(i, medoids[s]);
                if (a > best1[i]) {
                    best2[i] = best1[i];
                    best1[i] = a;
                    best1_slot[i] = s;
                } else if (a > best2[i]) {
                    best2[i] = a;
                }
            }
        }

        // Slots visited in medoid id order, then candidates in id order, so
        // the first strictly better swap found wins ties.
        std::vector<std::size_t> slot_order(kk);
        for (std::size_t s = 0; s < kk; ++s) slot_order[s] = s;
        std::sort(slot_order.begin(), slot_order.end(),
                  [&](std::size_t a, std::size_t b) { return medoids[a] < medoids[b]; });

        double best_value = objective;
        std::size_t best_slot = kk;
        std::size_t best_candidate = n;
        for (auto s : slot_order) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                double value = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double without = best1_slot[i] == s ? best2[i] : best1[i];
                    value += std::max(without, m.at(i, h));
                }
                if (value > best_value + config.tolerance) {
                    best_value = value;
                    best_slot = s;
                    best_candidate = h;
                }
            }
        }
        if (best_slot == kk) break;
        if (iterations >= config.max_swap_iterations) {
            hit_cap = true;
            break;
        }
        is_medoid[medoids[best_slot]] = false;
        is_medoid[best_candidate] = true;
        medoids[best_slot] = best_candidate;
        objective = objective_of(m, medoids);
        ++iterations;
    }

    std::sort(medoids.begin(), medoids.end());

    ClusterModel model;
    model.k = k;
    model.iterations = iterations;
    model.hit_iteration_cap = hit_cap;
    for (std::size_t c = 0; c < kk; ++c) {
        Medoid med;
        med.candidate_id = m.ids[medoids[c]];
        med.cls = EmotionalClass{static_cast<int>(c) + 1};
        med.responses = dataset.at(med.candidate_id);
        model.medoids.push_back(std::move(med));
    }
    model.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t cls = 0;
        auto own = std::find(medoids.begin(), medoids.end(), i);
        if (own != medoids.end()) {
            cls = static_cast<std::size_t>(own - medoids.begin());
        } else {
            for (std::size_t c = 1; c < kk; ++c)
                if (m.at(i, medoids[c]) > m.at(i, medoids[cls])) cls = c;
        }
        model.assignments.emplace(m.ids[i], EmotionalClass{static_cast<int>(cls) + 1});
        model.objective += m.at(i, medoids[cls]);
    }
    return model;
}

double recompute_objective(const ClusterModel& model, const CandidateResponses& dataset,
                           const EngineConfig& config) {
    double total = 0.0;
    for (const auto& [id, cls] : model.assignments) {
        auto it = dataset.find(id);
        if (it == dataset.end()) fail(ErrorCode::UnknownCandidate, "candidate '" + id + "' not in dataset");
        total += candidate_affinity(it->second, model.medoid(cls).responses, config);
    }
    return total;
}

void attach_medoid_profiles(ClusterModel& model, const Lexicon& lexicon, const VariantCatalog& variants,
                            const EngineConfig& config) {
    for (auto& med : model.medoids) med.ev = derive_emotion_vector(med.responses, lexicon, variants, config);
}

EmotionalClass classify_candidate(std::span<const ResponseExpression> responses, const ClusterModel& model,
                                  const EngineConfig& config) {
    if (model.medoids.empty()) fail(ErrorCode::EmptyModel, "cluster model has no medoids");
    const ResponseIndex index(responses);
    EmotionalClass best{0};
    double best_affinity = -1.0;
    for (const auto& med : model.medoids) {
        const ResponseIndex medoid_index(med.responses);
        if (index.shared_keys(medoid_index) == 0)
            fail(ErrorCode::NoSharedStimuli, "candidate shares no stimulus key with medoid of class " +
                                                 std::to_string(med.cls.value));
        const double a = index.affinity_with(medoid_index, config.rating_max);
        if (a > best_affinity) {
            best_affinity = a;
            best = med.cls;
        }
    }
    return best;
}

EmotionalClass classify_profile(const EmotionVector& ev, const ClusterModel& model) {
    if (model.medoids.empty()) fail(ErrorCode::EmptyModel, "cluster model has no medoids");
    EmotionalClass best{0};
    double best_affinity = -1.0;
    for (const auto& med : model.medoids) {
        if (!med.ev) fail(ErrorCode::EmptyModel, "cluster model carries no medoid emotion vectors");
        const double a = profile_affinity(ev, *med.ev);
        if (a > best_affinity) {
            best_affinity = a;
            best = med.cls;
        }
    }
    return best;
}

std::string serialize_model(const ClusterModel& model) {
    Json doc;
    doc["version"] = 1;
    doc["k"] = model.k;
    doc["objective"] = model.objective;
    doc["iterations"] = model.iterations;
    doc["hit_iteration_cap"] = model.hit_iteration_cap;
    doc["medoids"] = Json::array();
    for (const auto& med : model.medoids) {
        Json node{{"class", med.cls.value}, {"candidate", med.candidate_id}, {"responses", med.responses}};
        if (med.ev) node["ev"] = *med.ev;
        doc["medoids"].push_back(std::move(node));
    }
    doc["assignments"] = Json::object();
    for (const auto& [id, cls] : model.assignments) doc["assignments"][id] = cls.value;
    return doc.dump(2);
}

ClusterModel load_model(std::string_view document, const EngineConfig& config) {
    const Json doc = parse_json(document, "cluster model");
    ClusterModel model;
    try {
        if (doc.at("version").get<int>() != 1) fail(ErrorCode::ValidationError, "cluster model: unsupported version");
        model.k = doc.at("k").get<int>();
        model.objective = doc.at("objective").get<double>();
        model.iterations = doc.value("iterations", 0);
        model.hit_iteration_cap = doc.value("hit_iteration_cap", false);
        for (const auto& node : doc.at("medoids")) {
            Medoid med;
            med.cls = make_class(node.at("class").get<int>(), model.k);
            med.candidate_id = node.at("candidate").get<std::string>();
            for (const auto& r : node.at("responses"))
                med.responses.push_back(response_from_json(r, config.rating_max).response);
            if (auto it = node.find("ev"); it != node.end()) med.ev = emotion_vector_from_json(*it);
            model.medoids.push_back(std::move(med));
        }
        for (const auto& [id, cls] : doc.at("assignments").items())
            model.assignments.emplace(id, make_class(cls.get<int>(), model.k));
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("cluster model: ") + e.what());
    }
    if (static_cast<int>(model.medoids.size()) != model.k)
        fail(ErrorCode::ValidationError, "cluster model: medoid count differs from k");
    for (std::size_t c = 0; c < model.medoids.size(); ++c)
        if (model.medoids[c].cls.value != static_cast<int>(c) + 1)
            fail(ErrorCode::ValidationError, "cluster model: medoids must be listed in class order");
    return model;
}

} // namespace affinity
