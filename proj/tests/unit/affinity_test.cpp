#include <doctest.h>

#include <cmath>
#include <random>

#include "affinity/affinity.hpp"
#include "affinity/datastore.hpp"
#include "affinity/error.hpp"
#include "test_support.hpp"

using namespace affinity;
using namespace affinity::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an affinity::Error");
    return ErrorCode::InvalidArgument;
}

std::vector<ResponseExpression> ratings(const std::string& id, std::vector<int> values) {
    std::vector<ResponseExpression> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back(response(id, "news", "cluster-" + std::to_string(i + 1), values[i]));
    return out;
}

} // namespace

TEST_SUITE("types") {
    TEST_CASE("ratings outside the scale are rejected or clamped") {
        CHECK(make_rating(0, 4).value == 0);
        CHECK(make_rating(4, 4).value == 4);
        CHECK(code_of([] { make_rating(5, 4); }) == ErrorCode::OutOfRangeRating);
        CHECK(code_of([] { make_rating(-1, 4); }) == ErrorCode::OutOfRangeRating);
        const auto c = clamp_rating(5, 4);
        CHECK(c.rating.value == 4);
        CHECK(c.raw == 5);
        CHECK(c.clamped);
        CHECK_FALSE(clamp_rating(2, 4).clamped);
        CHECK(clamp_rating(-3, 4).rating.value == 0);
    }

    TEST_CASE("emotion vectors normalize and validate") {
        const std::vector<double> w{2.0, 1.0, 1.0};
        const auto v = EmotionVector::from_weights(w);
        CHECK(v[0] == doctest::Approx(0.5));
        CHECK(v.dominant() == 0);
        const std::vector<double> zero{0.0, 0.0};
        CHECK(code_of([&] { EmotionVector::from_weights(zero); }) == ErrorCode::ValidationError);
        const std::vector<double> negative{1.0, -0.5};
        CHECK(code_of([&] { EmotionVector::from_weights(negative); }) == ErrorCode::ValidationError);
        const std::vector<double> tiny_negative{1.0, -1e-12};
        CHECK(EmotionVector::from_weights(tiny_negative)[1] == 0.0);
        const std::vector<double> nan{1.0, std::nan("")};
        CHECK(code_of([&] { EmotionVector::from_weights(nan); }) == ErrorCode::ValidationError);
        const std::vector<double> off{0.5, 0.4};
        CHECK(code_of([&] { EmotionVector::from_simplex(off, 1e-6); }) == ErrorCode::ValidationError);
        const std::vector<double> tie{0.4, 0.4, 0.2};
        CHECK(EmotionVector::from_weights(tie).dominant() == 0);
        CHECK(EmotionVector::one_hot(5, 3).dominant() == 3);
        CHECK(EmotionVector::uniform(4)[2] == doctest::Approx(0.25));
    }

    TEST_CASE("classes and feature kinds") {
        CHECK(make_class(5, 5).value == 5);
        CHECK(code_of([] { make_class(0, 5); }) == ErrorCode::ValidationError);
        CHECK(code_of([] { make_class(6, 5); }) == ErrorCode::ValidationError);
        CHECK(feature_kind_from_string("background") == FeatureKind::Background);
        CHECK(to_string(FeatureKind::Shape) == "shape");
        CHECK(code_of([] { feature_kind_from_string("size"); }) == ErrorCode::ParseError);
    }

    TEST_CASE("variant features validate and key canonically") {
        VariantFeatures f;
        CHECK(f.empty());
        CHECK(code_of([&] { f.validate(5); }) == ErrorCode::ValidationError);
        f.text_cluster = 6;
        CHECK(code_of([&] { f.validate(5); }) == ErrorCode::ValidationError);
        f.text_cluster = 2;
        f.color = "red";
        f.validate(5);
        VariantFeatures g;
        g.color = "red";
        g.text_cluster = 2;
        CHECK(f.canonical_key() == g.canonical_key());
        g.background = "navy";
        CHECK(f.canonical_key() != g.canonical_key());
    }

    TEST_CASE("responses need identifiers") {
        auto r = response("a", "s", "v", 1);
        r.validate();
        r.variant_id.clear();
        CHECK(code_of([&] { r.validate(); }) == ErrorCode::ValidationError);
    }

    TEST_CASE("property: every constructor yields a simplex vector") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        std::uniform_int_distribution<int> dims(1, 9);
        for (int n = 0; n < 1000; ++n) {
            const int m = dims(rng);
            std::vector<double> w(static_cast<std::size_t>(m));
            for (auto& x : w) x = u(rng);
            w[0] += 1e-6;
            for (const auto& v : {EmotionVector::from_weights(w), EmotionVector::uniform(m),
                                  EmotionVector::one_hot(m, m - 1)}) {
                double total = 0.0;
                for (double x : v.values()) {
                    REQUIRE(x >= 0.0);
                    total += x;
                }
                REQUIRE(std::abs(total - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_SUITE("affinity") {
    const EngineConfig config;

    TEST_CASE("identical response lists have affinity one") {
        const auto a = ratings("a", {0, 1, 2, 3, 4});
        CHECK(candidate_affinity(a, ratings("b", {0, 1, 2, 3, 4}), config) == 1.0);
    }

    TEST_CASE("opposite extremes have affinity zero") {
        CHECK(candidate_affinity(ratings("a", {0, 0, 0, 0, 0}), ratings("b", {4, 4, 4, 4, 4}), config) == 0.0);
    }

    TEST_CASE("first two survey rows have affinity 0.8") {
        const auto t1 = load_survey_fixture(fixtures_dir() / "paper" / "table1.json", config);
        const auto grouped = group_by_candidate(t1.responses);
        const auto& one = grouped.at(survey_candidate_id(1));
        const auto& two = grouped.at(survey_candidate_id(2));
        CHECK(std::abs(candidate_affinity(one, two, config) - 0.8) <= config.tolerance);
        CHECK(std::abs(candidate_affinity(ratings("x", {3, 1, 3, 1, 1}), ratings("y", {3, 0, 4, 2, 2}), config) -
                       0.8) <= config.tolerance);
    }

    TEST_CASE("only shared keys count") {
        std::vector<ResponseExpression> a{response("a", "s1", "v", 4), response("a", "s2", "v", 0)};
        std::vector<ResponseExpression> b{response("b", "s1", "v", 2), response("b", "s3", "v", 4)};
        CHECK(candidate_affinity(a, b, config) == doctest::Approx(0.5));
        const ResponseIndex ia(a), ib(b);
        CHECK(ia.shared_keys(ib) == 1);
    }

    TEST_CASE("disjoint lists and duplicate keys are errors") {
        std::vector<ResponseExpression> a{response("a", "s1", "v", 4)};
        std::vector<ResponseExpression> b{response("b", "s2", "v", 4)};
        CHECK(code_of([&] { candidate_affinity(a, b, config); }) == ErrorCode::NoSharedStimuli);
        std::vector<ResponseExpression> dup{response("a", "s1", "v", 4), response("a", "s1", "v", 3)};
        CHECK(code_of([&] { candidate_affinity(dup, a, config); }) == ErrorCode::DuplicateResponse);
        std::vector<ResponseExpression> empty;
        CHECK(code_of([&] { candidate_affinity(empty, a, config); }) == ErrorCode::NoSharedStimuli);
    }

    TEST_CASE("context is part of the stimulus key") {
        std::vector<ResponseExpression> a{response("a", "s1", "v", 4, "politics")};
        std::vector<ResponseExpression> b{response("b", "s1", "v", 4, "sports")};
        CHECK(code_of([&] { candidate_affinity(a, b, config); }) == ErrorCode::NoSharedStimuli);
    }

    TEST_CASE("profile affinity examples") {
        CHECK(profile_affinity(EmotionVector::one_hot(5, 2), EmotionVector::one_hot(5, 2)) == 1.0);
        CHECK(profile_affinity(EmotionVector::one_hot(5, 1), EmotionVector::one_hot(5, 3)) == 0.0);
        CHECK(profile_affinity(EmotionVector::uniform(5), EmotionVector::uniform(5)) == doctest::Approx(0.2));
        CHECK(code_of([] { profile_affinity(EmotionVector::uniform(5), EmotionVector::uniform(4)); }) ==
              ErrorCode::DimensionMismatch);
    }

    TEST_CASE("property: candidate affinity bounds, symmetry, identity and oracle agreement") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> keys(1, 12), rmax(1, 9);
        for (int n = 0; n < 1000; ++n) {
            EngineConfig cfg;
            cfg.rating_max = rmax(rng);
            const auto data = random_dataset(rng, 2, keys(rng), cfg.rating_max);
            const auto& a = data.at("c0");
            const auto& b = data.at("c1");
            const double ab = candidate_affinity(a, b, cfg);
            REQUIRE(ab >= 0.0);
            REQUIRE(ab <= 1.0);
            REQUIRE(ab == candidate_affinity(b, a, cfg));
            REQUIRE(candidate_affinity(a, a, cfg) == 1.0);
            REQUIRE(std::abs(ab - oracle_candidate_affinity(a, b, cfg.rating_max)) <= 1e-12);
        }
    }

    TEST_CASE("property: profile affinity bounds and mixture betweenness") {
        std::mt19937_64 rng(13);
        std::uniform_int_distribution<int> dims(1, 8);
        std::uniform_real_distribution<double> alpha(0.0, 1.0);
        for (int n = 0; n < 1000; ++n) {
            const int m = dims(rng);
            const auto x = random_simplex(rng, m);
            const auto p = random_simplex(rng, m);
            const auto q = random_simplex(rng, m);
            const double xp = profile_affinity(x, p);
            const double xq = profile_affinity(x, q);
            REQUIRE(xp >= 0.0);
            REQUIRE(xp <= 1.0);
            REQUIRE(xp == doctest::Approx(profile_affinity(p, x)));
            const double a = alpha(rng);
            std::vector<double> mix(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) mix[i] = a * p[i] + (1 - a) * q[i];
            const double xm = profile_affinity(x, EmotionVector::from_weights(mix));
            REQUIRE(xm >= std::min(xp, xq) - 1e-12);
            REQUIRE(xm <= std::max(xp, xq) + 1e-12);
        }
    }
}
