#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "protoicl/attribution.hpp"

using namespace protoicl;

namespace {

TokenRecord tok(const std::string& text, std::initializer_list<double> vec) {
    TokenRecord t;
    t.snippet_id = "snip";
    t.token = text;
    t.vector = Vector(static_cast<Index>(vec.size()));
    Index i = 0;
    for (double v : vec) t.vector[i++] = v;
    return t;
}

} // namespace

TEST_CASE("prototype_centroid") {
    std::vector<Vector> protos;
    Vector a(2), b(2);
    a << 1, 3;
    b << 3, 5;
    protos = {a, b};
    Vector mean = prototype_centroid(protos, CentroidMode::Mean);
    CHECK(mean(0) == doctest::Approx(2.0));
    CHECK(mean(1) == doctest::Approx(4.0));
    Vector sum = prototype_centroid(protos, CentroidMode::Sum);
    CHECK(sum(0) == doctest::Approx(4.0));
    CHECK(sum(1) == doctest::Approx(8.0));
    CHECK_THROWS(prototype_centroid({}));
    Vector c(3);
    c.setZero();
    CHECK_THROWS(prototype_centroid({a, c}));
}

TEST_CASE("token_attribution is the dot product with the anchor") {
    Vector z_a(2);
    z_a << 2, -1;
    std::vector<TokenRecord> tokens = {tok("x", {1, 0}), tok("y", {0, 1}), tok("z", {3, 4})};
    std::vector<double> raw = token_attribution(z_a, tokens);
    REQUIRE(raw.size() == 3);
    CHECK(raw[0] == doctest::Approx(2.0));
    CHECK(raw[1] == doctest::Approx(-1.0));
    CHECK(raw[2] == doctest::Approx(2.0));

    SUBCASE("linearity in the anchor") {
        std::vector<double> doubled = token_attribution(2.0 * z_a, tokens);
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(doubled[i] == doctest::Approx(2.0 * raw[i]));
    }
    SUBCASE("dimension mismatch throws") {
        Vector bad(3);
        bad.setZero();
        CHECK_THROWS(token_attribution(bad, tokens));
    }
    SUBCASE("empty token list gives empty scores") {
        CHECK(token_attribution(z_a, {}).empty());
    }
}

TEST_CASE("normalize_scores min-max") {
    SUBCASE("hand example") {
        std::vector<double> norm = normalize_scores({2.0, 0.0, 4.0});
        REQUIRE(norm.size() == 3);
        CHECK(norm[0] == doctest::Approx(0.5));
        CHECK(norm[1] == doctest::Approx(0.0));
        CHECK(norm[2] == doctest::Approx(1.0));
    }
    SUBCASE("invariant to affine rescaling of the raw scores") {
        std::vector<double> raw = {-3.0, 1.0, 7.0, 2.5};
        std::vector<double> base = normalize_scores(raw);
        std::vector<double> scaled;
        for (double r : raw) scaled.push_back(10.0 * r + 100.0);
        std::vector<double> again = normalize_scores(scaled);
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(again[i] == doctest::Approx(base[i]).epsilon(1e-12));
    }
    SUBCASE("degenerate range maps everything to 0.5") {
        std::vector<double> norm = normalize_scores({3.0, 3.0, 3.0});
        for (double v : norm) CHECK(v == 0.5);
        CHECK(normalize_scores({7.0}) == std::vector<double>{0.5});
    }
    SUBCASE("empty or non-finite input throws") {
        CHECK_THROWS(normalize_scores({}));
        CHECK_THROWS(normalize_scores({1.0, std::nan("")}));
    }
    SUBCASE("output is always within [0, 1] with endpoints attained") {
        std::vector<double> norm = normalize_scores({5.0, -1.0, 0.0, 2.0});
        double lo = 1.0, hi = 0.0;
        for (double v : norm) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
}
