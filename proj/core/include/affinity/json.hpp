#pragma once

#include <nlohmann/json.hpp>

#include "affinity/types.hpp"

namespace affinity {

using Json = nlohmann::json;

void to_json(Json& out, const ResponseExpression& r);
void to_json(Json& out, const VariantFeatures& f);
void to_json(Json& out, const EmotionVector& v);
void to_json(Json& out, const PersonalityVector& v);

struct ParsedResponse {
    ResponseExpression response;
    int raw_rating = 0;
    bool clamped = false;
};

// Reads {candidate, stimulus, variant, context, rating}. With clamp=true an
// out-of-range rating is clamped and flagged; otherwise it throws
// OutOfRangeRating. Throws ParseError on a malformed object.
ParsedResponse response_from_json(const Json& node, int rating_max, bool clamp = false);

VariantFeatures features_from_json(const Json& node);

// Profiles stored by this library are renormalized within `slack`.
EmotionVector emotion_vector_from_json(const Json& node, double slack = 1e-6);

PersonalityVector personality_vector_from_json(const Json& node);

// Parses text, mapping parser exceptions to ParseError.
Json parse_json(std::string_view text, const std::string& what);

} // namespace affinity
