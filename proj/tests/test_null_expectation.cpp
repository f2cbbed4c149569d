#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "netscale/null_expectation.hpp"
#include "oracles.hpp"

using namespace netscale;

namespace {

double sample_sd(const std::vector<std::optional<double>>& v) {
    double mean = 0, n = 0;
    for (auto& x : v)
        if (x) {
            mean += *x;
            ++n;
        }
    mean /= n;
    double ss = 0;
    for (auto& x : v)
        if (x) ss += (*x - mean) * (*x - mean);
    return std::sqrt(ss / (n - 1));
}

SimpleGraph planted_graph(std::size_t block_size, double p_in, double p_out, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    const auto n = static_cast<Node>(2 * block_size);
    for (Node i = 0; i < n; ++i)
        for (Node j = i + 1; j < n; ++j) {
            bool same = (i < block_size) == (j < block_size);
            if (std::bernoulli_distribution(same ? p_in : p_out)(rng)) edges.emplace_back(i, j);
        }
    return SimpleGraph::from_edges(n, edges);
}

}  // namespace

TEST(NullExpectation, RandomGraphClusteringAndAssortativity) {
    auto g = gen_gnm(1000, 5000, 77);
    NullModelConfig cfg;
    cfg.threads = 4;
    const NullMeasure measures[] = {NullMeasure::clustering, NullMeasure::assortativity};
    auto ens = null_expectation(g, "er", NullModel::gnm, cfg, measures, 1);
    const auto* c = ens.find(NullMeasure::clustering);
    const auto* r = ens.find(NullMeasure::assortativity);
    ASSERT_TRUE(c && r);
    EXPECT_FALSE(ens.find(NullMeasure::mean_geodesic));
    EXPECT_EQ(c->ensemble_size, 50u);
    EXPECT_EQ(c->per_draw.size(), 50u);
    const double p = 2.0 * 5000 / (1000.0 * 999.0);
    const double se = sample_sd(c->per_draw) / std::sqrt(50.0);
    EXPECT_NEAR(*c->expected, p, 3 * se) << "se " << se;
    EXPECT_NEAR(*r->expected, 0.0, 0.05);
}

TEST(NullExpectation, ConfigDrawsKeepDegreeSequence) {
    std::mt19937_64 rng(8);
    auto g = oracle::random_graph(80, 0.07, rng);
    NullModelConfig cfg;
    cfg.samples = 10;
    auto sorted = [](std::vector<std::size_t> d) {
        std::sort(d.begin(), d.end());
        return d;
    };
    for (std::size_t d = 0; d < cfg.samples; ++d) {
        auto h = sample_null_graph(g, NullModel::config, cfg, derive_seed(std::uint64_t{5}, "x", "config", d));
        EXPECT_EQ(sorted(degree_sequence(h)), sorted(degree_sequence(g)));
    }
}

TEST(NullExpectation, EveryModelProducesFullEnsemble) {
    auto g = planted_graph(30, 0.25, 0.03, 3);
    NullModelConfig cfg;
    cfg.samples = 6;
    cfg.sbm_runs = 4;
    cfg.estimator.batch_size = 200;
    for (auto model : all_null_models) {
        auto ens = null_expectation(g, "planted", model, cfg, 9);
        ASSERT_EQ(ens.expectations.size(), 3u) << to_string(model);
        for (auto& e : ens.expectations) {
            EXPECT_EQ(e.ensemble_size, 6u);
            EXPECT_EQ(e.per_draw.size(), 6u);
            EXPECT_EQ(e.model, to_string(model));
            EXPECT_NE(e.measure, "mean_degree");
            ASSERT_TRUE(e.expected) << to_string(model) << " " << e.measure;
        }
        EXPECT_EQ(ens.estimator_batches.size(), 6u);
        if (model == NullModel::dcsbm) {
            EXPECT_GT(ens.generated_edges, 0u);
            EXPECT_LT(ens.deleted_edges, ens.generated_edges / 100 + 1);
        }
    }
}

TEST(NullExpectation, DeterministicAndThreadIndependent) {
    auto g = planted_graph(25, 0.3, 0.04, 1);
    NullModelConfig cfg;
    cfg.samples = 8;
    cfg.sbm_runs = 3;
    cfg.estimator.batch_size = 100;
    for (auto model : {NullModel::gnp, NullModel::config, NullModel::dcsbm}) {
        auto a = null_expectation(g, "id", model, cfg, 42);
        cfg.threads = 3;
        auto b = null_expectation(g, "id", model, cfg, 42);
        cfg.threads = 1;
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
        auto c = null_expectation(g, "other-id", model, cfg, 42);
        EXPECT_NE(to_json(a)["expectations"].dump(), to_json(c)["expectations"].dump());
    }
}

TEST(NullExpectation, UsesProvidedPosterior) {
    auto g = planted_graph(20, 0.3, 0.05, 2);
    auto post = sample_parameter_sets(g, 2, 4, 3);
    NullModelConfig cfg;
    cfg.samples = 4;
    auto a = null_expectation(g, "id", NullModel::dcsbm_maxent, cfg, 5, &post);
    auto b = null_expectation(g, "id", NullModel::dcsbm_maxent, cfg, 5, &post);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(NullExpectation, UndefinedDrawsAreSkippedInMean) {
    // A perfect matching: every null draw of G(n,m) with m = 1 has no triples.
    auto g = SimpleGraph::from_edges(4, std::vector<Edge>{{0, 1}});
    NullModelConfig cfg;
    cfg.samples = 5;
    auto ens = null_expectation(g, "tiny", NullModel::gnm, cfg, 0);
    auto* c = ens.find(NullMeasure::clustering);
    EXPECT_FALSE(c->expected);
    EXPECT_EQ(c->defined_draws(), 0u);
    EXPECT_EQ(*ens.find(NullMeasure::mean_geodesic)->expected, 1.0);
}

TEST(NullExpectation, ErrorsCarryNetworkId) {
    auto empty = SimpleGraph::from_edges(5, std::vector<Edge>{});
    NullModelConfig cfg;
    try {
        null_expectation(empty, "net-17", NullModel::dcsbm, cfg, 0);
        FAIL() << "expected ParameterError";
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("net-17"), std::string::npos);
    }
    cfg.samples = 0;
    EXPECT_THROW(null_expectation(empty, "x", NullModel::gnm, cfg, 0), ParameterError);
}

TEST(NullExpectation, CsvAndJson) {
    auto g = gen_gnm(50, 100, 1);
    NullModelConfig cfg;
    cfg.samples = 3;
    auto ens = null_expectation(g, "a,b", NullModel::chung_lu, cfg, 2);
    EXPECT_EQ(null_expectation_csv_header(), "id,model,measure,expected,ensemble_size,defined_draws");
    auto row = to_csv_row(ens.expectations[0]);
    EXPECT_EQ(row.rfind("\"a,b\",chung-lu,mean_geodesic,", 0), 0u) << row;
    auto back = null_ensemble_from_json(to_json(ens));
    EXPECT_EQ(to_json(back).dump(), to_json(ens).dump());
    EXPECT_EQ(parse_null_model("dcsbm-maxent"), NullModel::dcsbm_maxent);
    EXPECT_THROW(parse_null_model("bogus"), ParameterError);
}
