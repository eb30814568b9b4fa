#include "affinity/json.hpp"

#include "affinity/error.hpp"

namespace affinity {

void to_json(Json& out, const ResponseExpression& r) {
    out = Json{{"candidate", r.candidate_id},
               {"stimulus", r.stimulus_id},
               {"variant", r.variant_id},
               {"context", r.context_id},
               {"rating", r.rating.value}};
}

void to_json(Json& out, const VariantFeatures& f) {
    out = Json::object();
    if (f.color) out["color"] = *f.color;
    if (f.shape) out["shape"] = *f.shape;
    if (f.background) out["background"] = *f.background;
    if (f.presentation_order) out["presentation_order"] = *f.presentation_order;
    if (f.text_cluster) out["text_cluster"] = *f.text_cluster;
    if (!f.inscribed_words.empty()) out["inscribed_words"] = f.inscribed_words;
    if (f.context_id) out["context"] = *f.context_id;
}

void to_json(Json& out, const EmotionVector& v) {
    out = std::vector<double>(v.values().begin(), v.values().end());
}

void to_json(Json& out, const PersonalityVector& v) {
    out = Json{{"values", v.values}, {"support", std::vector<bool>(v.support.begin(), v.support.end())}};
}

namespace {

std::string string_field(const Json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end() || !it->is_string() || it->get<std::string>().empty())
        fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a non-empty string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::optional<int> optional_int(const Json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be an integer");
    return it->get<int>();
}

} // namespace

ParsedResponse response_from_json(const Json& node, int rating_max, bool clamp) {
    if (!node.is_object()) fail(ErrorCode::ParseError, "response must be a JSON object");
    ParsedResponse out;
    out.response.candidate_id = string_field(node, "candidate");
    out.response.stimulus_id = string_field(node, "stimulus");
    out.response.variant_id = string_field(node, "variant");
    out.response.context_id = string_field(node, "context");
    auto rating = optional_int(node, "rating");
    if (!rating) fail(ErrorCode::ParseError, "response is missing 'rating'");
    out.raw_rating = *rating;
    if (clamp) {
        auto c = clamp_rating(*rating, rating_max);
        out.response.rating = c.rating;
        out.clamped = c.clamped;
    } else {
        out.response.rating = make_rating(*rating, rating_max);
    }
    return out;
}

VariantFeatures features_from_json(const Json& node) {
    if (!node.is_object()) fail(ErrorCode::ParseError, "variant features must be a JSON object");
    VariantFeatures f;
    f.color = optional_string(node, "color");
    f.shape = optional_string(node, "shape");
    f.background = optional_string(node, "background");
    f.presentation_order = optional_int(node, "presentation_order");
    f.text_cluster = optional_int(node, "text_cluster");
    f.context_id = optional_string(node, "context");
    if (auto it = node.find("inscribed_words"); it != node.end() && !it->is_null()) {
        if (!it->is_array()) fail(ErrorCode::ParseError, "inscribed_words must be an array");
        for (const auto& w : *it) {
            if (!w.is_string()) fail(ErrorCode::ParseError, "inscribed_words entries must be strings");
            f.inscribed_words.push_back(w.get<std::string>());
        }
    }
    return f;
}

EmotionVector emotion_vector_from_json(const Json& node, double slack) {
    if (!node.is_array()) fail(ErrorCode::ParseError, "emotion vector must be an array");
    std::vector<double> values;
    for (const auto& x : node) {
        if (!x.is_number()) fail(ErrorCode::ParseError, "emotion vector entries must be numbers");
        values.push_back(x.get<double>());
    }
    return EmotionVector::from_simplex(values, slack);
}

PersonalityVector personality_vector_from_json(const Json& node) {
    if (!node.is_object()) fail(ErrorCode::ParseError, "personality vector must be an object");
    PersonalityVector pv;
    try {
        pv.values = node.at("values").get<std::vector<double>>();
        auto support = node.at("support").get<std::vector<bool>>();
        pv.support.assign(support.begin(), support.end());
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, std::string("personality vector: ") + e.what());
    }
    if (pv.values.size() != pv.support.size())
        fail(ErrorCode::ValidationError, "personality vector values and support differ in length");
    return pv;
}

Json parse_json(std::string_view text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, what + " is not valid JSON: " + e.what());
    }
}

} // namespace affinity
