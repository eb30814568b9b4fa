#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "affinity/config.hpp"
#include "affinity/datastore.hpp"
#include "affinity/embedding.hpp"
#include "affinity/json.hpp"
#include "affinity/learning.hpp"
#include "affinity/lexicon.hpp"

namespace affinity::service {

struct StimulusSpec {
    std::string stimulus_id;
    std::string context_id;
    HeadlineTemplate headline;
};

struct NewsItem {
    std::string item_id;
    std::string context_id;
    HeadlineTemplate headline;
};

struct ServiceConfig {
    EngineConfig engine;
    int rounds = 5;
    int variants_per_round = 5;
    std::chrono::seconds idle_timeout = std::chrono::hours(24);
    std::vector<StimulusSpec> stimuli;  // round r presents stimuli[r]
    std::vector<NewsItem> items;
    std::vector<FeatureKind> feature_kinds{FeatureKind::Color, FeatureKind::Background};

    std::filesystem::path lexicon_path;
    std::filesystem::path store_path = "affinity-store";
    std::optional<std::filesystem::path> model_path;
};

// Reads the JSON config document. Relative paths resolve against `base_dir`.
ServiceConfig load_service_config(const Json& doc, const std::filesystem::path& base_dir);

// Stimuli "stim-1".."stim-<rounds>" cycling through the lexicon contexts,
// and one news item per context. Matches the synthetic population design so
// models trained on it share stimulus keys with live sessions.
void fill_defaults(ServiceConfig& config, const Lexicon& lexicon);

struct PresentedVariant {
    std::string variant_id;
    VariantFeatures features;
    std::string headline;
};

struct SessionRound {
    std::string stimulus_id;
    std::string context_id;
    std::string policy;
    std::vector<PresentedVariant> variants;
    std::map<std::string, int> ratings;  // empty until submitted
};

enum class SessionState { Active, Complete, Abandoned };

std::string to_string(SessionState state);

struct ElicitationSession {
    std::string session_id;
    std::string candidate_id;
    int round_index = 0;
    int rounds = 5;
    SessionState state = SessionState::Active;
    std::vector<SessionRound> history;  // history[round_index] is on display while active
    std::int64_t created_at = 0;        // unix seconds
    std::int64_t updated_at = 0;
    std::optional<std::string> last_idempotency_key;
    std::optional<Json> last_response;
};

Json session_json(const ElicitationSession& session);
ElicitationSession session_from_json(const Json& doc);

// PV, EV and (with a model) class for one candidate's responses. Response
// classification is tried first; a model without shared stimuli falls back
// to the medoid emotion vectors.
CandidateProfile compute_profile(const std::string& candidate_id, std::span<const ResponseExpression> responses,
                                 const Lexicon& lexicon, const VariantCatalog& variants,
                                 const ClusterModel* model, const EngineConfig& config);

// Stored responses minus candidates whose every session was abandoned.
std::vector<ResponseExpression> training_responses(const ProfileStore& store);

struct Recommendation {
    std::string item_id;
    std::string headline;
    VariantFeatures features;
    EmotionVector profile;
    double score = 0.0;
    int rank = 0;
};

class ElicitationService {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    // `lexicon` may be null; session creation then fails with
    // LexiconUnavailable.
    ElicitationService(ServiceConfig config, std::shared_ptr<const Lexicon> lexicon, ProfileStore& store,
                       std::optional<ClusterModel> model = std::nullopt,
                       Clock clock = [] { return std::chrono::system_clock::now(); });

    // Returns {session, variants}. Throws LexiconUnavailable,
    // DuplicateActiveSession, InvalidArgument.
    Json create_session(const std::string& candidate_id);

    // Returns {session, variants} for the next round or {session, profile}
    // after the last one. Throws UnknownSession, SessionNotActive,
    // IncompleteRatings, OutOfRangeRating, UnknownVariant.
    Json submit_ratings(const std::string& session_id, const std::map<std::string, int>& ratings,
                        const std::optional<std::string>& idempotency_key = std::nullopt,
                        std::optional<int> round = std::nullopt);

    Json get_session(const std::string& session_id);
    Json get_profile(const std::string& candidate_id);

    // Throws UnknownCandidate, EmptyItemSet.
    std::vector<Recommendation> recommendations(const std::string& candidate_id,
                                                const std::optional<std::string>& context);
    Json get_recommendations(const std::string& candidate_id, const std::optional<std::string>& context);

    // Marks active sessions idle beyond the timeout as abandoned.
    std::size_t expire_idle();

    const ServiceConfig& config() const noexcept { return config_; }
    bool has_lexicon() const noexcept { return lexicon_ != nullptr; }

private:
    std::shared_ptr<std::mutex> session_lock(const std::string& session_id);
    ElicitationSession load_session(const std::string& session_id) const;
    SessionRound make_round(const ElicitationSession& session, int round_index);
    std::int64_t now() const;
    Json round_payload(const SessionRound& round) const;

    ServiceConfig config_;
    std::shared_ptr<const Lexicon> lexicon_;
    ProfileStore& store_;
    std::optional<ClusterModel> model_;
    Clock clock_;

    std::mutex registry_mutex_;  // guards the members below
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;
    std::map<std::string, std::string> active_by_candidate_;
    std::uint64_t next_session_ = 1;
};

Json recommendation_json(const Recommendation& rec);

} // namespace affinity::service
