#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "protoicl/rng.hpp"
#include "protoicl/sampling.hpp"

using namespace protoicl;

namespace {

EmbeddingDataset make_dataset(const std::vector<std::pair<std::string, Vector>>& rows) {
    EmbeddingDataset ds;
    ds.dim = rows.empty() ? 0 : rows.front().second.size();
    int i = 0;
    for (const auto& [label, vec] : rows) {
        EmbeddedSample s;
        s.id = "s" + std::to_string(i++);
        s.label = label;
        s.vector = vec;
        ds.samples.push_back(s);
        if (std::find(ds.classes.begin(), ds.classes.end(), label) == ds.classes.end())
            ds.classes.push_back(label);
    }
    return label_encode(ds);
}

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("select_prototypes picks the projected sample nearest each momentum proxy") {
    EmbeddingDataset ds = make_dataset({{"a", v2(1, 0)},
                                        {"a", v2(5, 0)},
                                        {"b", v2(0, 1)},
                                        {"b", v2(0, 5)}});
    ProjectionNetwork net(2, 3, 1);
    ProxyBank bank = ProxyBank::init(2, 3, 2, 0.99);

    PrototypeSet set = select_prototypes(ds, net, bank);
    CHECK(set.strategy == "prototypes");
    REQUIRE(set.entries.size() == 2);
    CHECK(set.entries[0].label == "a");
    CHECK(set.entries[1].label == "b");

    // brute-force oracle against theta_m rows
    for (std::size_t c = 0; c < 2; ++c) {
        Index best = -1;
        double best_dist = 0.0;
        for (Index i = 0; i < ds.size(); ++i) {
            if (ds.samples[static_cast<std::size_t>(i)].encoded_label != static_cast<int>(c))
                continue;
            const double dist =
                (net.forward(ds.samples[static_cast<std::size_t>(i)].vector) -
                 bank.theta_m.row(static_cast<Index>(c)).transpose())
                    .norm();
            if (best < 0 || dist < best_dist) {
                best = i;
                best_dist = dist;
            }
        }
        CHECK(set.entries[c].sample_index == best);
    }
}

TEST_CASE("select_prototypes tie goes to the lower sample index") {
    EmbeddingDataset ds = make_dataset({{"a", v2(1, 1)}, {"a", v2(1, 1)}});
    ProjectionNetwork net(2, 2, 3);
    ProxyBank bank = ProxyBank::init(1, 2, 4, 0.99);
    PrototypeSet set = select_prototypes(ds, net, bank);
    REQUIRE(set.entries.size() == 1);
    CHECK(set.entries[0].sample_index == 0);
}

TEST_CASE("select_prototypes returns one entry per class for nine classes") {
    Rng rng(9);
    std::vector<std::pair<std::string, Vector>> rows;
    for (int c = 0; c < 9; ++c)
        for (int i = 0; i < 3; ++i)
            rows.emplace_back("cls" + std::to_string(c), v2(rng.next_normal(), rng.next_normal()));
    EmbeddingDataset ds = make_dataset(rows);
    ProjectionNetwork net(2, 4, 5);
    ProxyBank bank = ProxyBank::init(9, 4, 6, 0.99);
    PrototypeSet set = select_prototypes(ds, net, bank);
    REQUIRE(set.entries.size() == 9);
    for (int c = 0; c < 9; ++c) {
        CHECK(set.entries[static_cast<std::size_t>(c)].label == "cls" + std::to_string(c));
        CHECK(ds.samples[static_cast<std::size_t>(
                             set.entries[static_cast<std::size_t>(c)].sample_index)]
                  .label == set.entries[static_cast<std::size_t>(c)].label);
    }
}

TEST_CASE("similarity_sampler picks the raw-space nearest neighbour per class") {
    EmbeddingDataset ds = make_dataset({{"a", v2(0, 0)},
                                        {"a", v2(10, 0)},
                                        {"b", v2(0, 3)},
                                        {"b", v2(0, 1)}});
    PrototypeSet set = similarity_sampler(ds, v2(0, 0));
    CHECK(set.strategy == "similarity");
    REQUIRE(set.entries.size() == 2);
    CHECK(set.entries[0].sample_index == 0);  // class a: (0,0) beats (10,0)
    CHECK(set.entries[1].sample_index == 3);  // class b: (0,1) beats (0,3)

    CHECK_THROWS(similarity_sampler(ds, Vector::Zero(5)));
}

TEST_CASE("diversity_sampler picks the sample nearest its class mean") {
    // class mean of {(0,0),(1,0),(10,0)} is (11/3, 0); nearest member is (1,0)
    EmbeddingDataset ds = make_dataset({{"a", v2(0, 0)},
                                        {"a", v2(1, 0)},
                                        {"a", v2(10, 0)},
                                        {"b", v2(-5, 2)}});
    PrototypeSet set = diversity_sampler(ds);
    CHECK(set.strategy == "diversity");
    REQUIRE(set.entries.size() == 2);
    CHECK(set.entries[0].sample_index == 1);
    CHECK(set.entries[1].sample_index == 3);  // singleton class is its own mean
}

TEST_CASE("fixed_fewshot") {
    EmbeddingDataset ds = make_dataset({{"a", v2(0, 0)},
                                        {"a", v2(1, 0)},
                                        {"b", v2(2, 0)},
                                        {"b", v2(3, 0)},
                                        {"a", v2(4, 0)}});
    SUBCASE("empty index list is the base strategy") {
        PrototypeSet set = fixed_fewshot({}, ds);
        CHECK(set.strategy == "base");
        CHECK(set.entries.empty());
    }
    SUBCASE("explicit indices preserve order") {
        PrototypeSet set = fixed_fewshot({2, 3, 4}, ds);
        CHECK(set.strategy == "mbpp");
        REQUIRE(set.entries.size() == 3);
        CHECK(set.entries[0].sample_index == 2);
        CHECK(set.entries[1].sample_index == 3);
        CHECK(set.entries[2].sample_index == 4);
        CHECK(set.entries[0].id == "s2");
    }
    SUBCASE("out-of-range index throws") {
        CHECK_THROWS(fixed_fewshot({5}, ds));
        CHECK_THROWS(fixed_fewshot({-1}, ds));
    }
}

TEST_CASE("restrict_to_classes keeps order and filters labels") {
    PrototypeSet set;
    set.strategy = "prototypes";
    for (int i = 0; i < 4; ++i) {
        PrototypeEntry e;
        e.label = "c" + std::to_string(i);
        e.id = "s" + std::to_string(i);
        e.sample_index = i;
        set.entries.push_back(e);
    }
    PrototypeSet kept = restrict_to_classes(set, {"c3", "c1"});
    REQUIRE(kept.entries.size() == 2);
    CHECK(kept.entries[0].label == "c1");  // original order preserved
    CHECK(kept.entries[1].label == "c3");
    CHECK(kept.strategy == "prototypes");

    CHECK(restrict_to_classes(set, {}).entries.empty());
    CHECK(restrict_to_classes(set, {"zzz"}).entries.empty());
}
