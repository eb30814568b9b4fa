#include "affinity/datastore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "affinity/error.hpp"

namespace fs = std::filesystem;

namespace affinity {

namespace {

[[noreturn]] void storage_error(const std::string& what, const fs::path& path) {
    fail(ErrorCode::StorageError, what + " " + path.string() + ": " + std::strerror(errno));
}

std::string encode_id(std::string_view id) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char ch : id) {
        if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.') {
            out += static_cast<char>(ch);
        } else {
            out += '%';
            out += hex[ch >> 4];
            out += hex[ch & 0xF];
        }
    }
    if (out.empty() || out == "." || out == "..") out = "%" + out;
    return out;
}

Json read_json(const fs::path& path, const std::string& what) {
    return parse_json(read_file(path), what + " " + path.string());
}

void require_version(const Json& doc, const std::string& what) {
    auto it = doc.find("version");
    if (it == doc.end() || !it->is_number_integer() || it->get<int>() != 1)
        fail(ErrorCode::ValidationError, what + ": missing or unsupported version");
}

} // namespace

fs::path write_temp(const fs::path& path, std::string_view content) {
    fs::path temp = path;
    temp += ".tmp";
    const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) storage_error("cannot create", temp);
    const char* data = content.data();
    std::size_t left = content.size();
    while (left > 0) {
        const ssize_t n = ::write(fd, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            storage_error("cannot write", temp);
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        storage_error("cannot sync", temp);
    }
    ::close(fd);
    return temp;
}

void commit_temp(const fs::path& temp, const fs::path& path) {
    if (::rename(temp.c_str(), path.c_str()) != 0) storage_error("cannot rename into", path);
}

void atomic_write(const fs::path& path, std::string_view content) {
    commit_temp(write_temp(path, content), path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::StorageError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<ResponseExpression> parse_responses_jsonl(std::string_view text, int rating_max) {
    std::vector<ResponseExpression> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            auto r = response_from_json(parse_json(line, "response"), rating_max).response;
            r.validate();
            out.push_back(std::move(r));
        } catch (const Error& e) {
            fail(e.code() == ErrorCode::OutOfRangeRating ? e.code() : ErrorCode::ParseError,
                 "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string responses_jsonl(std::span<const ResponseExpression> responses) {
    std::string out;
    for (const auto& r : responses) {
        out += Json(r).dump();
        out += '\n';
    }
    return out;
}

VariantCatalog parse_variant_catalog(const Json& doc) {
    require_version(doc, "variant catalog");
    VariantCatalog out;
    auto it = doc.find("variants");
    if (it == doc.end() || !it->is_object()) fail(ErrorCode::ParseError, "variant catalog: 'variants' must be an object");
    for (const auto& [id, node] : it->items()) out.emplace(id, features_from_json(node));
    return out;
}

Json variant_catalog_json(const VariantCatalog& catalog) {
    Json doc{{"version", 1}, {"variants", Json::object()}};
    for (const auto& [id, f] : catalog) doc["variants"][id] = f;
    return doc;
}

Json profile_json(const CandidateProfile& profile) {
    Json doc{{"version", 1}, {"candidate", profile.candidate_id}, {"pv", profile.pv}, {"ev", profile.ev}};
    if (profile.cls) doc["class"] = profile.cls->value;
    return doc;
}

CandidateProfile profile_from_json(const Json& node, const EngineConfig& config) {
    require_version(node, "candidate profile");
    CandidateProfile p;
    try {
        p.candidate_id = node.at("candidate").get<std::string>();
        p.pv = personality_vector_from_json(node.at("pv"));
        p.ev = emotion_vector_from_json(node.at("ev"));
        if (auto it = node.find("class"); it != node.end() && !it->is_null())
            p.cls = make_class(it->get<int>(), config.num_classes);
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("candidate profile: ") + e.what());
    }
    return p;
}

ProfileStore::ProfileStore(fs::path root, EngineConfig config) : root_(std::move(root)), config_(config) {
    std::error_code ec;
    for (const char* dir : {"", "profiles", "models", "sessions"}) {
        fs::create_directories(root_ / dir, ec);
        if (ec) fail(ErrorCode::StorageError, "cannot create " + (root_ / dir).string() + ": " + ec.message());
    }
    const auto manifest = root_ / "store.json";
    if (fs::exists(manifest)) {
        require_version(read_json(manifest, "store manifest"), "store manifest");
    } else {
        atomic_write(manifest, Json{{"version", kVersion}, {"kind", "affinity-store"}}.dump(2));
    }
    const auto responses = root_ / "responses.jsonl";
    if (fs::exists(responses)) {
        responses_ = parse_responses_jsonl(read_file(responses), config_.rating_max);
        for (const auto& r : responses_) keys_.emplace(r.candidate_id, r.key());
    }
    const auto variants = root_ / "variants.json";
    if (fs::exists(variants)) variants_ = parse_variant_catalog(read_json(variants, "variant catalog"));
}

std::size_t ProfileStore::append_responses(std::span<const ResponseExpression> responses) {
    std::lock_guard lock(mutex_);
    std::set<std::pair<std::string, StimulusKey>> batch;
    for (const auto& r : responses) {
        r.validate();
        make_rating(r.rating.value, config_.rating_max);
        auto key = std::make_pair(r.candidate_id, r.key());
        if (keys_.count(key) || !batch.insert(std::move(key)).second) {
            fail(ErrorCode::DuplicateResponse, "candidate '" + r.candidate_id + "' already rated variant '" +
                                                   r.variant_id + "' of stimulus '" + r.stimulus_id + "'");
        }
    }
    if (responses.empty()) return 0;

    std::string content;
    const auto path = root_ / "responses.jsonl";
    if (fs::exists(path)) content = read_file(path);
    content += responses_jsonl(responses);
    atomic_write(path, content);

    responses_.insert(responses_.end(), responses.begin(), responses.end());
    keys_.insert(batch.begin(), batch.end());
    return responses.size();
}

std::vector<ResponseExpression> ProfileStore::responses() const {
    std::lock_guard lock(mutex_);
    return responses_;
}

std::vector<ResponseExpression> ProfileStore::responses_for(std::string_view candidate_id) const {
    std::lock_guard lock(mutex_);
    std::vector<ResponseExpression> out;
    for (const auto& r : responses_)
        if (r.candidate_id == candidate_id) out.push_back(r);
    return out;
}

std::set<std::string> ProfileStore::candidates() const {
    std::lock_guard lock(mutex_);
    std::set<std::string> out;
    for (const auto& r : responses_) out.insert(r.candidate_id);
    return out;
}

void ProfileStore::save_variants(const VariantCatalog& variants) {
    std::lock_guard lock(mutex_);
    auto merged = variants_;
    for (const auto& [id, f] : variants) {
        auto [it, inserted] = merged.emplace(id, f);
        if (!inserted && it->second != f)
            fail(ErrorCode::ValidationError, "variant '" + id + "' already stored with different features");
    }
    if (merged.size() == variants_.size()) return;
    atomic_write(root_ / "variants.json", variant_catalog_json(merged).dump(2));
    variants_ = std::move(merged);
}

VariantCatalog ProfileStore::variants() const {
    std::lock_guard lock(mutex_);
    return variants_;
}

fs::path ProfileStore::document_path(std::string_view dir, std::string_view id) const {
    return root_ / dir / (encode_id(id) + ".json");
}

void ProfileStore::save_profile(const CandidateProfile& profile) {
    std::lock_guard lock(mutex_);
    atomic_write(document_path("profiles", profile.candidate_id), profile_json(profile).dump(2));
}

std::optional<CandidateProfile> ProfileStore::load_profile(std::string_view candidate_id) const {
    const auto path = document_path("profiles", candidate_id);
    std::lock_guard lock(mutex_);
    if (!fs::exists(path)) return std::nullopt;
    return profile_from_json(read_json(path, "candidate profile"), config_);
}

void ProfileStore::save_model(std::string_view name, const ClusterModel& model) {
    std::lock_guard lock(mutex_);
    atomic_write(document_path("models", name), serialize_model(model));
}

std::optional<ClusterModel> ProfileStore::load_model(std::string_view name) const {
    const auto path = document_path("models", name);
    std::lock_guard lock(mutex_);
    if (!fs::exists(path)) return std::nullopt;
    return affinity::load_model(read_file(path), config_);
}

void ProfileStore::save_session(std::string_view session_id, const Json& document) {
    std::lock_guard lock(mutex_);
    Json doc = document;
    doc["version"] = kVersion;
    atomic_write(document_path("sessions", session_id), doc.dump(2));
}

std::optional<Json> ProfileStore::load_session(std::string_view session_id) const {
    const auto path = document_path("sessions", session_id);
    std::lock_guard lock(mutex_);
    if (!fs::exists(path)) return std::nullopt;
    auto doc = read_json(path, "session");
    require_version(doc, "session");
    return doc;
}

std::vector<Json> ProfileStore::sessions() const {
    std::lock_guard lock(mutex_);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root_ / "sessions"))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Json> out;
    for (const auto& f : files) out.push_back(read_json(f, "session"));
    return out;
}

std::string survey_candidate_id(int candidate) { return "survey-" + std::to_string(candidate); }
std::string survey_variant_id(int cluster) { return "cluster-" + std::to_string(cluster); }

SurveyFixture load_survey_fixture(const fs::path& file, const EngineConfig& config) {
    const Json doc = read_json(file, "survey fixture");
    require_version(doc, "survey fixture");
    SurveyFixture t;
    try {
        t.context_id = doc.at("context").get<std::string>();
        t.cluster_labels = doc.at("clusters").get<std::vector<std::string>>();
        for (const auto& node : doc.at("rows")) {
            SurveyRow row;
            row.candidate = node.at("candidate").get<int>();
            row.group = node.at("group").get<std::string>();
            row.raw_ratings = node.at("ratings").get<std::vector<int>>();
            t.rows.push_back(std::move(row));
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("survey fixture: ") + e.what());
    }
    for (const auto& row : t.rows) {
        if (row.raw_ratings.size() != t.cluster_labels.size())
            fail(ErrorCode::ValidationError, "survey row " + std::to_string(row.candidate) + " has " +
                                                 std::to_string(row.raw_ratings.size()) + " ratings");
        for (std::size_t j = 0; j < row.raw_ratings.size(); ++j) {
            const int cluster = static_cast<int>(j) + 1;
            const auto c = clamp_rating(row.raw_ratings[j], config.rating_max);
            if (c.clamped) t.out_of_range.push_back({row.candidate, cluster, c.raw});
            t.responses.push_back({survey_candidate_id(row.candidate), "survey-news", survey_variant_id(cluster),
                                   t.context_id, c.rating});
        }
    }
    return t;
}

RankComparison load_rank_fixture(const fs::path& file) {
    const Json doc = read_json(file, "rank comparison fixture");
    require_version(doc, "rank comparison fixture");
    RankComparison cmp;
    try {
        for (const auto& node : doc.at("rows"))
            cmp.rows.push_back({node.at("expected_rank").get<int>(), node.at("actual_rank").get<int>()});
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("rank comparison fixture: ") + e.what());
    }
    cmp.validate();
    return cmp;
}

std::map<int, double> load_accuracy_fixture(const fs::path& file) {
    const Json doc = read_json(file, "class accuracy fixture");
    require_version(doc, "class accuracy fixture");
    std::map<int, double> out;
    try {
        for (const auto& node : doc.at("rows")) {
            const double pct = node.at("accuracy").get<double>();
            if (pct < 0.0 || pct > 100.0) fail(ErrorCode::ValidationError, "class accuracy outside [0, 100]");
            if (!out.emplace(node.at("class").get<int>(), pct).second)
                fail(ErrorCode::ValidationError, "class accuracy fixture repeats a class");
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("class accuracy fixture: ") + e.what());
    }
    return out;
}

StudyFixtures load_study_fixtures(const fs::path& dir, const EngineConfig& config) {
    return {load_survey_fixture(dir / "table1.json", config), load_rank_fixture(dir / "table2.json"),
            load_accuracy_fixture(dir / "table3.json")};
}

} // namespace affinity
