#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affinity/config.hpp"
#include "affinity/evaluation.hpp"
#include "affinity/json.hpp"
#include "affinity/learning.hpp"
#include "affinity/types.hpp"

namespace affinity {

// Writes `content` next to `path` and renames it into place. Readers never
// observe a partially written file. Throws StorageError.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// The two halves of atomic_write, exposed so a crash between them can be
// simulated. The temporary file ends in ".tmp" and is ignored by readers.
std::filesystem::path write_temp(const std::filesystem::path& path, std::string_view content);
void commit_temp(const std::filesystem::path& temp, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// One ResponseExpression per line. Throws ParseError with the line number.
std::vector<ResponseExpression> parse_responses_jsonl(std::string_view text, int rating_max);
std::string responses_jsonl(std::span<const ResponseExpression> responses);

VariantCatalog parse_variant_catalog(const Json& doc);
Json variant_catalog_json(const VariantCatalog& catalog);

// Directory-backed store:
//   store.json               manifest {version, kind}
//   responses.jsonl          all responses, insertion order
//   variants.json            {version, variants: {id: features}}
//   profiles/<id>.json       candidate profiles
//   models/<name>.json       cluster models
//   sessions/<id>.json       elicitation sessions
// Every write goes through atomic_write. Methods are safe to call from
// several threads; the internal lock serializes writers.
class ProfileStore {
public:
    static constexpr int kVersion = 1;

    ProfileStore(std::filesystem::path root, EngineConfig config);

    const std::filesystem::path& root() const noexcept { return root_; }

    // Validates every response and rejects keys already stored or repeated
    // within the batch; on error nothing is written.
    // Throws DuplicateResponse, ValidationError, StorageError.
    std::size_t append_responses(std::span<const ResponseExpression> responses);

    std::vector<ResponseExpression> responses() const;
    std::vector<ResponseExpression> responses_for(std::string_view candidate_id) const;
    std::set<std::string> candidates() const;

    void save_variants(const VariantCatalog& variants);  // merged into the stored catalog
    VariantCatalog variants() const;

    void save_profile(const CandidateProfile& profile);
    std::optional<CandidateProfile> load_profile(std::string_view candidate_id) const;

    void save_model(std::string_view name, const ClusterModel& model);
    std::optional<ClusterModel> load_model(std::string_view name) const;

    void save_session(std::string_view session_id, const Json& document);
    std::optional<Json> load_session(std::string_view session_id) const;
    std::vector<Json> sessions() const;

private:
    std::filesystem::path document_path(std::string_view dir, std::string_view id) const;

    std::filesystem::path root_;
    EngineConfig config_;
    mutable std::mutex mutex_;
    std::vector<ResponseExpression> responses_;
    std::set<std::pair<std::string, StimulusKey>> keys_;
    VariantCatalog variants_;
};

Json profile_json(const CandidateProfile& profile);
CandidateProfile profile_from_json(const Json& node, const EngineConfig& config);

struct SurveyRow {
    int candidate = 0;
    std::string group;
    std::vector<int> raw_ratings;  // one per word cluster, as printed
};

struct OutOfRangeRating {
    int candidate = 0;
    int cluster = 0;  // 1-based column
    int raw = 0;
};

struct SurveyFixture {
    std::string context_id;
    std::vector<std::string> cluster_labels;
    std::vector<SurveyRow> rows;
    std::vector<ResponseExpression> responses;  // clamped into [0, R]
    std::vector<OutOfRangeRating> out_of_range;
};

struct StudyFixtures {
    SurveyFixture survey;
    RankComparison ranks;
    std::map<int, double> accuracy;  // class label -> percentage accuracy
};

SurveyFixture load_survey_fixture(const std::filesystem::path& file, const EngineConfig& config);
RankComparison load_rank_fixture(const std::filesystem::path& file);
std::map<int, double> load_accuracy_fixture(const std::filesystem::path& file);

// Reads table1.json, table2.json and table3.json from `dir`.
// Throws ParseError or ValidationError.
StudyFixtures load_study_fixtures(const std::filesystem::path& dir, const EngineConfig& config);

// Response identifiers used for survey fixture rows.
std::string survey_candidate_id(int candidate);
std::string survey_variant_id(int cluster);

} // namespace affinity
