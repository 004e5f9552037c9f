#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "n2rec/sampling.hpp"
#include "n2rec/synth.hpp"

using namespace n2rec;

namespace {

Dataset small_dataset(uint64_t seed = 1) {
    SynthConfig cfg;
    cfg.num_users = 30;
    cfg.num_pois = 12;
    cfg.num_groups = 3;
    cfg.epsilon = 0.5;
    cfg.seed = seed;
    Dataset d = generate(cfg);
    split(d, 0.8);
    return d;
}

Dataset two_user_dataset() {
    Dataset d;
    d.num_users = 2;
    d.num_pois = 3;
    d.user_keys = {"A", "B"};
    d.poi_keys = {"l1", "l2", "l3"};
    for (UserId u = 0; u < 2; ++u) d.user_index.emplace(d.user_keys[u], u);
    for (PoiId p = 0; p < 3; ++p) d.poi_index.emplace(d.poi_keys[p], p);
    // A visits [l1, l1, l2] then l3 (test); B visits [l2, l2] then l3 (test)
    d.sequences = {
        {{0, 0, 0, 0, 1}, {0, 0, 0, 0, 2}, {0, 1, 0, 0, 3}, {0, 2, 0, 0, 4}},
        {{1, 1, 0, 0, 1}, {1, 1, 0, 0, 2}, {1, 2, 0, 0, 3}},
    };
    d.split_points = std::vector<size_t>{3, 2};
    return d;
}

}  // namespace

TEST_CASE("build_train_tuples deduplicates by default") {
    Dataset d = two_user_dataset();
    auto tuples = build_train_tuples(d);
    REQUIRE(tuples.size() == 3);
    CHECK(tuples[0] == TrainTuple{0, 0});
    CHECK(tuples[1] == TrainTuple{0, 1});
    CHECK(tuples[2] == TrainTuple{1, 1});

    auto multi = build_train_tuples(d, true);
    CHECK(multi.size() == 5);  // one per train check-in event
}

TEST_CASE("tuple count equals nonzero entries of the train user-poi matrix") {
    Dataset d = small_dataset();
    auto tuples = build_train_tuples(d);
    // brute force: fill the matrix, count nonzeros
    std::vector<std::vector<int>> mat(d.num_users, std::vector<int>(d.num_pois, 0));
    for (UserId u = 0; u < d.num_users; ++u)
        for (const auto& c : d.train_of(u)) ++mat[u][c.poi];
    size_t nnz = 0;
    for (const auto& row : mat)
        for (int v : row) nnz += v > 0;
    CHECK(tuples.size() == nnz);
}

TEST_CASE("visitor index matches a brute-force scan") {
    Dataset d = small_dataset(7);
    VisitorIndex idx = build_visitor_index(d);
    for (PoiId p = 0; p < d.num_pois; ++p) {
        std::set<UserId> expect;
        for (UserId u = 0; u < d.num_users; ++u)
            for (const auto& c : d.train_of(u))
                if (c.poi == p) expect.insert(u);
        std::set<UserId> got(idx.visitors(p).begin(), idx.visitors(p).end());
        CHECK(got == expect);
        CHECK(idx.complement_size(p) == static_cast<size_t>(d.num_users) - expect.size());
    }
    // every train tuple's user is in the visitor set
    for (const auto& t : build_train_tuples(d)) CHECK(idx.visited(t.user, t.poi));
}

TEST_CASE("sample_negatives basics") {
    Dataset d = small_dataset(2);
    VisitorIndex idx = build_visitor_index(d);
    Rng rng(5);

    CHECK(sample_negatives(idx, 0, 0, rng).empty());

    for (PoiId p = 0; p < d.num_pois; ++p) {
        auto negs = sample_negatives(idx, p, 5, rng);
        CHECK(negs.size() == std::min<size_t>(5, idx.complement_size(p)));
        std::set<UserId> seen;
        for (UserId u : negs) {
            CHECK(!idx.visited(u, p));  // never a visitor
            CHECK(seen.insert(u).second);  // pairwise distinct
        }
    }
}

TEST_CASE("sample_negatives when the complement is empty or dense") {
    VisitorIndex idx(4, 2);
    idx.add_sorted(0, {0, 1, 2, 3});  // visited by everyone
    idx.add_sorted(1, {0, 1, 2});     // dense: complement {3}
    Rng rng(1);
    CHECK(sample_negatives(idx, 0, 5, rng).empty());
    auto negs = sample_negatives(idx, 1, 5, rng);
    REQUIRE(negs.size() == 1);
    CHECK(negs[0] == 3);
}

TEST_CASE("sample_negatives is uniform over the complement") {
    int m = 20;
    VisitorIndex idx(m, 1);
    idx.add_sorted(0, {0, 5, 11});  // complement size 17
    size_t c = idx.complement_size(0);
    REQUIRE(c == 17);

    Rng rng(99);
    const int draws = 100000;
    std::vector<int> freq(m, 0);
    for (int i = 0; i < draws; ++i) ++freq[sample_negatives(idx, 0, 1, rng)[0]];

    double p = 1.0 / static_cast<double>(c);
    double sigma = std::sqrt(p * (1 - p) * draws);
    for (int u = 0; u < m; ++u) {
        if (idx.visited(u, 0)) {
            CHECK(freq[u] == 0);
        } else {
            CHECK(std::abs(freq[u] - draws * p) < 5 * sigma);
        }
    }
}
