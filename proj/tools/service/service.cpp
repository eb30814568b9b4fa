#include "service.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "affinity/error.hpp"
#include "affinity/ranking.hpp"

namespace affinity::service {

namespace fs = std::filesystem;

namespace {

std::vector<FeatureKind> parse_kinds(const Json& node) {
    std::vector<FeatureKind> out;
    for (const auto& k : node) out.push_back(feature_kind_from_string(k.get<std::string>()));
    return out;
}

HeadlineTemplate template_from(const Json& node) {
    if (node.is_string()) return load_template(node.get<std::string>());
    Json doc = node;
    if (!doc.contains("version")) doc["version"] = 1;
    return load_template(doc.dump());
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

SessionState state_from_string(const std::string& s) {
    if (s == "active") return SessionState::Active;
    if (s == "complete") return SessionState::Complete;
    if (s == "abandoned") return SessionState::Abandoned;
    fail(ErrorCode::ParseError, "unknown session state '" + s + "'");
}

// Top two dimensions of a vector; ties go to the lower index.
std::pair<int, int> top_two(const EmotionVector& ev) {
    std::vector<int> idx(ev.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return ev[static_cast<std::size_t>(a)] > ev[static_cast<std::size_t>(b)];
    });
    return {idx[0], idx.size() > 1 ? idx[1] : idx[0]};
}

Json session_view(const ElicitationSession& s) {
    Json view = session_json(s);
    view.erase("last_response");
    view.erase("last_idempotency_key");
    view.erase("version");
    return view;
}

} // namespace

ServiceConfig load_service_config(const Json& doc, const fs::path& base_dir) {
    ServiceConfig config;
    try {
        if (auto it = doc.find("engine"); it != doc.end()) {
            config.engine.emotion_dims = it->value("emotion_dims", config.engine.emotion_dims);
            config.engine.num_classes = it->value("num_classes", config.engine.num_classes);
            config.engine.rating_max = it->value("rating_max", config.engine.rating_max);
            config.engine.tolerance = it->value("tolerance", config.engine.tolerance);
            config.engine.exhaustive_limit = it->value("exhaustive_limit", config.engine.exhaustive_limit);
            config.engine.max_swap_iterations = it->value("max_swap_iterations", config.engine.max_swap_iterations);
        }
        config.rounds = doc.value("rounds", config.rounds);
        config.variants_per_round = doc.value("variants_per_round", config.variants_per_round);
        if (auto it = doc.find("idle_timeout_hours"); it != doc.end())
            config.idle_timeout = std::chrono::seconds(static_cast<std::int64_t>(it->get<double>() * 3600));
        if (auto it = doc.find("lexicon"); it != doc.end())
            config.lexicon_path = resolve(base_dir, it->get<std::string>());
        if (auto it = doc.find("store"); it != doc.end())
            config.store_path = resolve(base_dir, it->get<std::string>());
        if (auto it = doc.find("model"); it != doc.end() && !it->is_null())
            config.model_path = resolve(base_dir, it->get<std::string>());
        if (auto it = doc.find("feature_kinds"); it != doc.end()) config.feature_kinds = parse_kinds(*it);
        if (auto it = doc.find("stimuli"); it != doc.end()) {
            for (const auto& s : *it)
                config.stimuli.push_back({s.at("id").get<std::string>(), s.at("context").get<std::string>(),
                                          template_from(s.at("headline"))});
        }
        if (auto it = doc.find("items"); it != doc.end()) {
            for (const auto& s : *it)
                config.items.push_back({s.at("id").get<std::string>(), s.at("context").get<std::string>(),
                                        template_from(s.at("headline"))});
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("service config: ") + e.what());
    }
    config.engine.validate();
    if (config.rounds < 1) fail(ErrorCode::ValidationError, "rounds must be >= 1");
    if (config.variants_per_round < 2) fail(ErrorCode::ValidationError, "variants_per_round must be >= 2");
    return config;
}

void fill_defaults(ServiceConfig& config, const Lexicon& lexicon) {
    const auto contexts = lexicon.contexts();
    if (contexts.empty()) fail(ErrorCode::ValidationError, "lexicon has no contexts");
    for (int r = static_cast<int>(config.stimuli.size()); r < config.rounds; ++r) {
        const auto& context = contexts[static_cast<std::size_t>(r) % contexts.size()];
        HeadlineTemplate headline;
        headline.tokens.emplace_back(std::string("A"));
        headline.tokens.emplace_back(TemplateSlot{"mood", context});
        headline.tokens.emplace_back(std::string("offer"));
        config.stimuli.push_back({"stim-" + std::to_string(r + 1), context, std::move(headline)});
    }
    if (config.items.empty()) {
        for (const auto& context : contexts) {
            HeadlineTemplate headline;
            headline.tokens.emplace_back(context + ":");
            headline.tokens.emplace_back(TemplateSlot{"lead", context});
            headline.tokens.emplace_back(std::string("story"));
            config.items.push_back({"news-" + context, context, std::move(headline)});
        }
    }
}

std::string to_string(SessionState state) {
    switch (state) {
    case SessionState::Active: return "active";
    case SessionState::Complete: return "complete";
    case SessionState::Abandoned: return "abandoned";
    }
    return "active";
}

Json session_json(const ElicitationSession& s) {
    Json rounds = Json::array();
    for (const auto& r : s.history) {
        Json variants = Json::array();
        for (const auto& v : r.variants)
            variants.push_back({{"variant_id", v.variant_id}, {"features", v.features}, {"headline", v.headline}});
        rounds.push_back({{"stimulus_id", r.stimulus_id},
                          {"context_id", r.context_id},
                          {"policy", r.policy},
                          {"variants", variants},
                          {"ratings", r.ratings}});
    }
    Json doc{{"version", 1},
             {"session_id", s.session_id},
             {"candidate_id", s.candidate_id},
             {"round_index", s.round_index},
             {"rounds", s.rounds},
             {"state", to_string(s.state)},
             {"history", rounds},
             {"created_at", s.created_at},
             {"updated_at", s.updated_at}};
    if (s.last_idempotency_key) doc["last_idempotency_key"] = *s.last_idempotency_key;
    if (s.last_response) doc["last_response"] = *s.last_response;
    return doc;
}

ElicitationSession session_from_json(const Json& doc) {
    ElicitationSession s;
    try {
        s.session_id = doc.at("session_id").get<std::string>();
        s.candidate_id = doc.at("candidate_id").get<std::string>();
        s.round_index = doc.at("round_index").get<int>();
        s.rounds = doc.at("rounds").get<int>();
        s.state = state_from_string(doc.at("state").get<std::string>());
        s.created_at = doc.value("created_at", std::int64_t{0});
        s.updated_at = doc.value("updated_at", std::int64_t{0});
        for (const auto& r : doc.at("history")) {
            SessionRound round;
            round.stimulus_id = r.at("stimulus_id").get<std::string>();
            round.context_id = r.at("context_id").get<std::string>();
            round.policy = r.at("policy").get<std::string>();
            for (const auto& v : r.at("variants"))
                round.variants.push_back({v.at("variant_id").get<std::string>(), features_from_json(v.at("features")),
                                          v.at("headline").get<std::string>()});
            round.ratings = r.at("ratings").get<std::map<std::string, int>>();
            s.history.push_back(std::move(round));
        }
        if (auto it = doc.find("last_idempotency_key"); it != doc.end()) s.last_idempotency_key = it->get<std::string>();
        if (auto it = doc.find("last_response"); it != doc.end()) s.last_response = *it;
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("session: ") + e.what());
    }
    return s;
}

CandidateProfile compute_profile(const std::string& candidate_id, std::span<const ResponseExpression> responses,
                                 const Lexicon& lexicon, const VariantCatalog& variants,
                                 const ClusterModel* model, const EngineConfig& config) {
    auto profile = derive_profile(candidate_id, responses, lexicon, variants, config);
    if (model && !model->medoids.empty()) {
        try {
            profile.cls = classify_candidate(responses, *model, config);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSharedStimuli) throw;
            const bool has_profiles = std::all_of(model->medoids.begin(), model->medoids.end(),
                                                  [](const Medoid& m) { return m.ev.has_value(); });
            if (has_profiles) profile.cls = classify_profile(profile.ev, *model);
        }
    }
    return profile;
}

std::vector<ResponseExpression> training_responses(const ProfileStore& store) {
    std::map<std::string, std::set<SessionState>> states;
    for (const auto& doc : store.sessions()) {
        const auto s = session_from_json(doc);
        states[s.candidate_id].insert(s.state);
    }
    std::vector<ResponseExpression> out;
    for (const auto& r : store.responses()) {
        auto it = states.find(r.candidate_id);
        const bool only_abandoned =
            it != states.end() && it->second.size() == 1 && *it->second.begin() == SessionState::Abandoned;
        if (!only_abandoned) out.push_back(r);
    }
    return out;
}

Json recommendation_json(const Recommendation& rec) {
    return Json{{"item_id", rec.item_id},   {"headline", rec.headline}, {"features", rec.features},
                {"profile", rec.profile},   {"score", rec.score},       {"rank", rec.rank}};
}

ElicitationService::ElicitationService(ServiceConfig config, std::shared_ptr<const Lexicon> lexicon,
                                       ProfileStore& store, std::optional<ClusterModel> model, Clock clock)
    : config_(std::move(config)),
      lexicon_(std::move(lexicon)),
      store_(store),
      model_(std::move(model)),
      clock_(std::move(clock)) {
    config_.engine.validate();
    if (lexicon_) fill_defaults(config_, *lexicon_);
    if (lexicon_ && static_cast<int>(config_.stimuli.size()) < config_.rounds)
        fail(ErrorCode::ValidationError, "service needs one stimulus per round");
    for (const auto& doc : store_.sessions()) {
        const auto s = session_from_json(doc);
        if (s.state == SessionState::Active) active_by_candidate_[s.candidate_id] = s.session_id;
        if (s.session_id.rfind("sess-", 0) == 0) {
            try {
                next_session_ = std::max<std::uint64_t>(next_session_, std::stoull(s.session_id.substr(5)) + 1);
            } catch (const std::exception&) {
            }
        }
    }
}

std::int64_t ElicitationService::now() const {
    return std::chrono::duration_cast<std::chrono::seconds>(clock_().time_since_epoch()).count();
}

std::shared_ptr<std::mutex> ElicitationService::session_lock(const std::string& session_id) {
    std::lock_guard lock(registry_mutex_);
    auto& m = session_locks_[session_id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

ElicitationSession ElicitationService::load_session(const std::string& session_id) const {
    auto doc = store_.load_session(session_id);
    if (!doc) fail(ErrorCode::UnknownSession, "unknown session '" + session_id + "'");
    return session_from_json(*doc);
}

SessionRound ElicitationService::make_round(const ElicitationSession& session, int round_index) {
    const auto& stimulus = config_.stimuli[static_cast<std::size_t>(round_index)];
    RoundPolicy policy = RoundPolicy::coverage();
    if (round_index >= 2) {
        std::vector<ResponseExpression> responses = store_.responses_for(session.candidate_id);
        const auto ev = derive_emotion_vector(responses, *lexicon_, store_.variants(), config_.engine);
        const auto [first, second] = top_two(ev);
        policy = RoundPolicy::discrimination(first, second);
    }
    SessionRound round;
    round.stimulus_id = stimulus.stimulus_id;
    round.context_id = stimulus.context_id;
    round.policy = to_string(policy.kind);
    if (policy.kind == RoundPolicy::Kind::Discrimination)
        round.policy += ":" + std::to_string(policy.focus[0]) + "," + std::to_string(policy.focus[1]);

    VariantCatalog catalog;
    for (auto& features : generate_variant_set({stimulus.stimulus_id, stimulus.context_id}, *lexicon_,
                                               config_.variants_per_round, policy)) {
        PresentedVariant v;
        v.variant_id = features.canonical_key();
        // Display text: the stimulus headline with words matched to the
        // variant's own profile.
        const auto profile = variant_profile(features, *lexicon_);
        v.headline = embed_headline(stimulus.headline, profile, *lexicon_, config_.engine).text();
        v.features = std::move(features);
        catalog.emplace(v.variant_id, v.features);
        round.variants.push_back(std::move(v));
    }
    store_.save_variants(catalog);
    return round;
}

Json ElicitationService::round_payload(const SessionRound& round) const {
    Json variants = Json::array();
    for (const auto& v : round.variants)
        variants.push_back({{"variant_id", v.variant_id},
                            {"stimulus_id", round.stimulus_id},
                            {"context_id", round.context_id},
                            {"features", v.features},
                            {"headline", v.headline}});
    return variants;
}

Json ElicitationService::create_session(const std::string& candidate_id) {
    if (!lexicon_) fail(ErrorCode::LexiconUnavailable, "no lexicon is loaded");
    if (candidate_id.empty()) fail(ErrorCode::InvalidArgument, "candidate_id must be non-empty");
    expire_idle();

    std::lock_guard lock(registry_mutex_);
    if (auto it = active_by_candidate_.find(candidate_id); it != active_by_candidate_.end())
        fail(ErrorCode::DuplicateActiveSession,
             "candidate '" + candidate_id + "' already has active session '" + it->second + "'");

    std::ostringstream id;
    id << "sess-" << std::setw(6) << std::setfill('0') << next_session_;
    ElicitationSession session;
    session.session_id = id.str();
    session.candidate_id = candidate_id;
    session.rounds = config_.rounds;
    session.created_at = session.updated_at = now();
    session.history.push_back(make_round(session, 0));
    store_.save_session(session.session_id, session_json(session));
    ++next_session_;
    active_by_candidate_[candidate_id] = session.session_id;

    return Json{{"session", session_view(session)}, {"variants", round_payload(session.history.back())}};
}

Json ElicitationService::submit_ratings(const std::string& session_id, const std::map<std::string, int>& ratings,
                                        const std::optional<std::string>& idempotency_key,
                                        std::optional<int> round) {
    expire_idle();
    auto guard = session_lock(session_id);
    std::lock_guard lock(*guard);

    auto session = load_session(session_id);
    if (idempotency_key && session.last_idempotency_key == idempotency_key && session.last_response)
        return *session.last_response;
    if (session.state != SessionState::Active)
        fail(ErrorCode::SessionNotActive, "session '" + session_id + "' is " + to_string(session.state));
    if (round && *round != session.round_index)
        fail(ErrorCode::SessionNotActive, "session '" + session_id + "' is at round " +
                                              std::to_string(session.round_index) + ", not " + std::to_string(*round));

    auto& current = session.history[static_cast<std::size_t>(session.round_index)];
    std::set<std::string> presented;
    for (const auto& v : current.variants) presented.insert(v.variant_id);
    for (const auto& [variant, value] : ratings) {
        if (!presented.count(variant))
            fail(ErrorCode::UnknownVariant, "variant '" + variant + "' was not presented in this round");
        make_rating(value, config_.engine.rating_max);
    }
    if (ratings.size() != presented.size())
        fail(ErrorCode::IncompleteRatings, "expected " + std::to_string(presented.size()) + " ratings, got " +
                                               std::to_string(ratings.size()));

    std::vector<ResponseExpression> responses;
    for (const auto& v : current.variants)
        responses.push_back({session.candidate_id, current.stimulus_id, v.variant_id, current.context_id,
                             Rating{ratings.at(v.variant_id)}});
    store_.append_responses(responses);
    current.ratings = ratings;
    ++session.round_index;
    session.updated_at = now();

    Json response;
    if (session.round_index >= session.rounds) {
        session.state = SessionState::Complete;
        const auto all = store_.responses_for(session.candidate_id);
        const auto profile = compute_profile(session.candidate_id, all, *lexicon_, store_.variants(),
                                             model_ ? &*model_ : nullptr, config_.engine);
        store_.save_profile(profile);
        response = Json{{"session", session_view(session)}, {"profile", profile_json(profile)}};
        response["profile"].erase("version");
    } else {
        session.history.push_back(make_round(session, session.round_index));
        response = Json{{"session", session_view(session)}, {"variants", round_payload(session.history.back())}};
    }
    session.last_idempotency_key = idempotency_key;
    session.last_response = response;
    store_.save_session(session.session_id, session_json(session));

    if (session.state != SessionState::Active) {
        std::lock_guard registry(registry_mutex_);
        active_by_candidate_.erase(session.candidate_id);
    }
    return response;
}

Json ElicitationService::get_session(const std::string& session_id) {
    expire_idle();
    auto guard = session_lock(session_id);
    std::lock_guard lock(*guard);
    const auto session = load_session(session_id);
    Json out{{"session", session_view(session)}};
    if (session.state == SessionState::Active)
        out["variants"] = round_payload(session.history[static_cast<std::size_t>(session.round_index)]);
    return out;
}

Json ElicitationService::get_profile(const std::string& candidate_id) {
    auto profile = store_.load_profile(candidate_id);
    if (!profile) fail(ErrorCode::UnknownCandidate, "no profile for candidate '" + candidate_id + "'");
    Json out = profile_json(*profile);
    out.erase("version");
    return out;
}

std::vector<Recommendation> ElicitationService::recommendations(const std::string& candidate_id,
                                                                const std::optional<std::string>& context) {
    if (!lexicon_) fail(ErrorCode::LexiconUnavailable, "no lexicon is loaded");
    auto profile = store_.load_profile(candidate_id);
    if (!profile) fail(ErrorCode::UnknownCandidate, "no profile for candidate '" + candidate_id + "'");

    std::vector<Recommendation> embedded;
    std::vector<ItemProfile> items;
    for (const auto& item : config_.items) {
        if (context && item.context_id != *context) continue;
        const auto base = select_features(profile->ev, *lexicon_, config_.feature_kinds);
        auto variant = embed_headline(item.headline, profile->ev, *lexicon_, config_.engine, base);
        items.push_back({item.item_id, variant.profile});
        embedded.push_back({item.item_id, variant.text(), variant.features, variant.profile, variant.score, 0});
    }
    if (items.empty())
        fail(ErrorCode::EmptyItemSet, "no items" + (context ? " for context '" + *context + "'" : std::string()));

    std::vector<Recommendation> out;
    for (const auto& ranked : rank_items(profile->ev, items)) {
        auto it = std::find_if(embedded.begin(), embedded.end(),
                               [&](const Recommendation& r) { return r.item_id == ranked.item_id; });
        Recommendation rec = *it;
        rec.score = ranked.score;
        rec.rank = ranked.rank;
        out.push_back(std::move(rec));
    }
    return out;
}

Json ElicitationService::get_recommendations(const std::string& candidate_id,
                                             const std::optional<std::string>& context) {
    Json items = Json::array();
    for (const auto& rec : recommendations(candidate_id, context)) items.push_back(recommendation_json(rec));
    return Json{{"candidate_id", candidate_id}, {"items", items}};
}

std::size_t ElicitationService::expire_idle() {
    std::vector<std::string> candidates;
    {
        std::lock_guard lock(registry_mutex_);
        for (const auto& [candidate, session] : active_by_candidate_) candidates.push_back(session);
    }
    const auto cutoff = now() - config_.idle_timeout.count();
    std::size_t expired = 0;
    for (const auto& session_id : candidates) {
        auto guard = session_lock(session_id);
        std::lock_guard lock(*guard);
        auto session = load_session(session_id);
        if (session.state != SessionState::Active || session.updated_at >= cutoff) continue;
        session.state = SessionState::Abandoned;
        store_.save_session(session.session_id, session_json(session));
        std::lock_guard registry(registry_mutex_);
        active_by_candidate_.erase(session.candidate_id);
        ++expired;
    }
    return expired;
}

} // namespace affinity::service
