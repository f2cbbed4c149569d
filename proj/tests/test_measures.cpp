#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "netscale/measures.hpp"
#include "oracles.hpp"

using namespace netscale;

namespace {

SimpleGraph make(std::size_t n, std::vector<Edge> edges) { return SimpleGraph::from_edges(n, edges); }

SimpleGraph complete(std::size_t n) {
    std::vector<Edge> e;
    for (Node i = 0; i < n; ++i)
        for (Node j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make(n, e);
}

SimpleGraph path(std::size_t n) {
    std::vector<Edge> e;
    for (Node i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return make(n, e);
}

}  // namespace

TEST(MeanDegree, Examples) {
    EXPECT_DOUBLE_EQ(mean_degree(complete(3)), 2.0);
    EXPECT_DOUBLE_EQ(mean_degree(path(4)), 1.5);
    EXPECT_DOUBLE_EQ(mean_degree(make(5, {})), 0.0);
    EXPECT_THROW(mean_degree(SimpleGraph{}), ParameterError);
}

TEST(MeanGeodesic, Examples) {
    EXPECT_DOUBLE_EQ(*mean_geodesic_exact(complete(3)), 1.0);
    // P3: distances 1, 1, 2
    EXPECT_DOUBLE_EQ(*mean_geodesic_exact(path(3)), 4.0 / 3.0);
    // two disjoint K2: cross pairs excluded
    EXPECT_DOUBLE_EQ(*mean_geodesic_exact(make(4, {{0, 1}, {2, 3}})), 1.0);
    EXPECT_FALSE(mean_geodesic_exact(make(3, {})));
    EXPECT_FALSE(mean_geodesic_exact(SimpleGraph{}));
}

TEST(MeanGeodesic, MoreThanSixtyFourSources) {
    // Long path exercises several 64-source blocks and many BFS levels.
    const std::size_t n = 150;
    double expected = 0;
    for (std::size_t d = 1; d < n; ++d) expected += static_cast<double>(d * (n - d));
    expected /= static_cast<double>(n * (n - 1) / 2);
    EXPECT_NEAR(*mean_geodesic_exact(path(n)), expected, 1e-12);
    EXPECT_NEAR(*mean_geodesic_exact(path(n), 3), expected, 1e-12);
}

TEST(Clustering, Examples) {
    EXPECT_DOUBLE_EQ(*global_clustering(complete(3)), 1.0);
    EXPECT_DOUBLE_EQ(*global_clustering(path(3)), 0.0);
    // K4 minus edge {2,3}: 2 triangles, degrees 3,3,2,2 -> 3+3+1+1 = 8 triples
    auto k4e = make(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
    EXPECT_EQ(count_triangles(k4e), 2u);
    EXPECT_EQ(connected_triples(k4e), 8u);
    EXPECT_DOUBLE_EQ(*global_clustering(k4e), 0.75);
}

TEST(Clustering, UndefinedWithoutTriples) {
    EXPECT_FALSE(global_clustering(make(4, {{0, 1}, {2, 3}})));
    // Distinct from a defined zero.
    auto c4 = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    ASSERT_TRUE(global_clustering(c4));
    EXPECT_EQ(*global_clustering(c4), 0.0);
}

TEST(Assortativity, Examples) {
    EXPECT_NEAR(*degree_assortativity(path(4)), -0.5, 1e-15);
    auto k3_k2 = make(5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
    EXPECT_NEAR(*degree_assortativity(k3_k2), 1.0, 1e-15);
    auto c4 = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    EXPECT_FALSE(degree_assortativity(c4));
    EXPECT_FALSE(degree_assortativity(make(3, {})));
}

TEST(Assortativity, StarIsPerfectlyDisassortative) {
    auto star = make(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    EXPECT_NEAR(*degree_assortativity(star), -1.0, 1e-15);
}

// Property: random graphs up to 12 nodes agree with dense brute-force oracles.
TEST(Measures, MatchBruteForceOracles) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(1, 12);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = oracle::random_graph(size(rng), density(rng), rng);
        auto a = oracle::adjacency(g);
        auto check = [&](std::optional<double> got, std::optional<double> want, const char* what) {
            ASSERT_EQ(got.has_value(), want.has_value()) << what << " trial " << trial;
            if (got) EXPECT_NEAR(*got, *want, 1e-12) << what << " trial " << trial;
        };
        check(mean_geodesic_exact(g), oracle::mean_geodesic(a), "geodesic");
        check(global_clustering(g), oracle::clustering(a), "clustering");
        check(degree_assortativity(g), oracle::assortativity(a), "assortativity");
        EXPECT_DOUBLE_EQ(mean_degree(g), 2.0 * static_cast<double>(g.m()) / static_cast<double>(g.n()));
    }
}

TEST(Measures, BoundsAndIsomorphismInvariance) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        auto g = oracle::random_graph(40, 0.08, rng);
        auto rec = exact_measures(g);
        if (rec.clustering) {
            EXPECT_GE(*rec.clustering, 0.0);
            EXPECT_LE(*rec.clustering, 1.0);
        }
        if (rec.assortativity) {
            EXPECT_GE(*rec.assortativity, -1.0 - 1e-12);
            EXPECT_LE(*rec.assortativity, 1.0 + 1e-12);
        }
        if (rec.mean_geodesic) EXPECT_GE(*rec.mean_geodesic, 1.0);

        std::vector<Node> perm(g.n());
        std::iota(perm.begin(), perm.end(), Node{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Edge> relabeled;
        for (auto [u, v] : g.edges()) relabeled.emplace_back(perm[u], perm[v]);
        auto h = SimpleGraph::from_edges(g.n(), relabeled);
        auto other = exact_measures(h);
        EXPECT_EQ(rec.mean_degree, other.mean_degree);
        ASSERT_EQ(rec.mean_geodesic.has_value(), other.mean_geodesic.has_value());
        if (rec.mean_geodesic) EXPECT_NEAR(*rec.mean_geodesic, *other.mean_geodesic, 1e-12);
        ASSERT_EQ(rec.clustering.has_value(), other.clustering.has_value());
        if (rec.clustering) EXPECT_NEAR(*rec.clustering, *other.clustering, 1e-12);
        ASSERT_EQ(rec.assortativity.has_value(), other.assortativity.has_value());
        if (rec.assortativity) EXPECT_NEAR(*rec.assortativity, *other.assortativity, 1e-12);
    }
}

TEST(MeasureRecord, CsvFieldOrder) {
    auto rec = exact_measures(path(3));
    rec.seed = 42;
    EXPECT_EQ(measure_csv_header().rfind("n,m,mean_degree,mean_geodesic,clustering,assortativity,source,seed,", 0), 0u);
    auto row = to_csv_row(rec);
    EXPECT_EQ(row.rfind("3,2,1.3333333333333333,1.3333333333333333,0,-1,empirical,42,exact", 0), 0u) << row;
}

TEST(MeasureRecord, JsonRoundTrip) {
    auto rec = exact_measures(make(4, {{0, 1}, {2, 3}}));
    EXPECT_FALSE(rec.clustering);
    auto j = to_json(rec);
    EXPECT_TRUE(j["clustering"].is_null());
    auto back = measure_record_from_json(j);
    EXPECT_EQ(back.n, rec.n);
    EXPECT_EQ(back.mean_geodesic, rec.mean_geodesic);
    EXPECT_FALSE(back.clustering);
    EXPECT_FALSE(back.assortativity);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys[0], "n");
    EXPECT_EQ(keys[7], "seed");
}
