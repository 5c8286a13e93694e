#include "doctest.h"

#include <cmath>
#include <vector>

#include "protoicl/eval.hpp"

using namespace protoicl;

namespace {

// exhaustive oracle: fraction of k-subsets of n samples containing >= 1 of
// the c correct ones, enumerated over all C(n, k) subsets by bitmask
double pass_at_k_oracle(int n, int c, int k) {
    long total = 0, hit = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++total;
        // correct samples are indices 0..c-1
        if (mask & ((1u << c) - 1u)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

} // namespace

TEST_CASE("pass_at_k hand value") {
    CHECK(pass_at_k(5, 2, 2) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("pass_at_k matches the subset-enumeration oracle") {
    for (int n = 1; n <= 12; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k <= n; ++k)
                CHECK(pass_at_k(n, c, k) ==
                      doctest::Approx(pass_at_k_oracle(n, c, k)).epsilon(1e-12));
}

TEST_CASE("pass_at_k boundary cases are exact") {
    CHECK(pass_at_k(10, 0, 3) == 0.0);
    CHECK(pass_at_k(10, 10, 1) == 1.0);
    CHECK(pass_at_k(10, 8, 3) == 1.0);  // n - c < k forces a hit
    CHECK(pass_at_k(200, 1, 200) == 1.0);
    CHECK(pass_at_k(1, 1, 1) == 1.0);
    CHECK(pass_at_k(1, 0, 1) == 0.0);
}

TEST_CASE("pass_at_k input validation") {
    CHECK_THROWS(pass_at_k(0, 0, 1));
    CHECK_THROWS(pass_at_k(5, 6, 1));
    CHECK_THROWS(pass_at_k(5, -1, 1));
    CHECK_THROWS(pass_at_k(5, 2, 0));
    CHECK_THROWS(pass_at_k(5, 2, 6));
}

TEST_CASE("pass_at_k is monotone in c and k") {
    const int n = 30;
    for (int k = 1; k <= n; ++k)
        for (int c = 1; c <= n; ++c)
            CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c - 1, k));
    for (int c = 1; c < n; ++c)
        for (int k = 2; k <= n; ++k)
            CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c, k - 1));
}

TEST_CASE("pass_at_k stays in [0,1] for large n") {
    for (int c : {0, 1, 100, 500, 1000}) {
        const double v = pass_at_k(1000, c, 10);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("aggregate_pass_at_k averages per-problem estimates") {
    std::vector<PassAtKInput> rows = {{"p1", 5, 2, }, {"p2", 5, 0}, {"p3", 5, 5}};
    const double expected = (pass_at_k(5, 2, 2) + 0.0 + 1.0) / 3.0;
    CHECK(aggregate_pass_at_k(rows, 2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS(aggregate_pass_at_k({}, 2));
}

TEST_CASE("build_icl_prompt is byte exact") {
    SUBCASE("zero demonstrations") {
        PromptSpec spec;
        spec.task = "Write a function to add two numbers.";
        CHECK(build_icl_prompt(spec) ==
              "You are an expert Python programmer, and here is your task: "
              "Write a function to add two numbers.\n[BEGIN]\n");
    }
    SUBCASE("one demonstration") {
        PromptSpec spec;
        spec.demonstrations = {{"Reverse a list.", "def rev(xs):\n    return xs[::-1]"}};
        spec.task = "Sum a list.";
        CHECK(build_icl_prompt(spec) ==
              "You are an expert programmer, and here is your task: Reverse a list.\n"
              "[BEGIN]\n"
              "def rev(xs):\n    return xs[::-1]\n"
              "[DONE]\n\n"
              "You are an expert Python programmer, and here is your task: Sum a list.\n"
              "[BEGIN]\n");
    }
    SUBCASE("two demonstrations preserve order") {
        PromptSpec spec;
        spec.demonstrations = {{"q1", "s1"}, {"q2", "s2"}};
        spec.task = "t";
        CHECK(build_icl_prompt(spec) ==
              "You are an expert programmer, and here is your task: q1\n[BEGIN]\ns1\n[DONE]\n\n"
              "You are an expert programmer, and here is your task: q2\n[BEGIN]\ns2\n[DONE]\n\n"
              "You are an expert Python programmer, and here is your task: t\n[BEGIN]\n");
    }
    SUBCASE("empty task throws") {
        PromptSpec spec;
        CHECK_THROWS(build_icl_prompt(spec));
    }
}
