#pragma once

#include <memory>
#include <thread>

#include <httplib.h>

#include "affinity/affinity.hpp"
#include "affinity/json.hpp"
#include "service/http.hpp"
#include "service/service.hpp"
#include "test_support.hpp"

namespace affinity::testing {

// ElicitationService over a temporary store, served on a random local port.
class ServiceHarness {
public:
    explicit ServiceHarness(const std::string& tag, std::shared_ptr<const Lexicon> lexicon = shared_default_lexicon(),
                            std::optional<ClusterModel> model = std::nullopt,
                            service::ElicitationService::Clock clock = [] { return std::chrono::system_clock::now(); })
        : dir_(tag), store_(std::make_unique<ProfileStore>(dir_.path() / "store", EngineConfig{})) {
        config_.store_path = dir_.path() / "store";
        service_ = std::make_unique<service::ElicitationService>(config_, std::move(lexicon), *store_, std::move(model),
                                                                 std::move(clock));
        service::mount_routes(server_, *service_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~ServiceHarness() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    static std::shared_ptr<const Lexicon> shared_default_lexicon() {
        return std::make_shared<const Lexicon>(default_lexicon());
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        return c;
    }

    service::ElicitationService& service() { return *service_; }
    ProfileStore& store() { return *store_; }
    const std::filesystem::path& root() const { return dir_.path(); }
    const service::ServiceConfig& config() const { return service_->config(); }

private:
    TempDir dir_;
    service::ServiceConfig config_;
    std::unique_ptr<ProfileStore> store_;
    std::unique_ptr<service::ElicitationService> service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

// Ratings a candidate with the given prototype would give: R times the
// affinity to each variant's profile, rounded.
inline std::map<std::string, int> prototype_ratings(const Json& variants, const EmotionVector& prototype,
                                                    const Lexicon& lexicon, int rating_max = 4) {
    std::map<std::string, int> out;
    for (const auto& v : variants) {
        const auto profile = variant_profile(features_from_json(v.at("features")), lexicon);
        out[v.at("variant_id").get<std::string>()] =
            static_cast<int>(std::lround(rating_max * profile_affinity(prototype, profile)));
    }
    return out;
}

inline Json ratings_body(const std::map<std::string, int>& ratings, std::optional<int> round = std::nullopt) {
    Json body{{"ratings", ratings}};
    if (round) body["round"] = *round;
    return body;
}

} // namespace affinity::testing
