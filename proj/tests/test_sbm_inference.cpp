#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "netscale/null_models.hpp"
#include "netscale/sbm_inference.hpp"
#include "oracles.hpp"

using namespace netscale;

namespace {

SimpleGraph make(std::size_t n, std::vector<Edge> edges) { return SimpleGraph::from_edges(n, edges); }

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

std::vector<std::uint32_t> planted_labels(std::size_t block_size) {
    std::vector<std::uint32_t> b(2 * block_size);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = i < block_size ? 0 : 1;
    return b;
}

// Direct evaluation from an explicit edge scan, independent of the optimizer's bookkeeping.
double reference_dl(const SimpleGraph& g, const std::vector<std::uint32_t>& labels) {
    std::map<std::uint32_t, double> total;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> e;
    for (auto [u, v] : g.edges()) {
        auto r = labels[u], s = labels[v];
        total[r] += 1;
        total[s] += 1;
        e[{r, s}] += 1;
        e[{s, r}] += 1;
    }
    std::map<std::uint32_t, int> used;
    for (auto b : labels) used[b] = 1;
    const double B = static_cast<double>(used.size());
    double like = 0;
    for (auto& [rs, count] : e) {
        double expected = total[rs.first] * total[rs.second];
        like += 0.5 * count * std::log(count / expected);
    }
    return -like + B * (B + 1) / 2 * std::log(static_cast<double>(g.m())) + static_cast<double>(g.n()) * std::log(B);
}

// Fraction of nodes placed correctly under the better of the two block-to-block matchings.
double agreement(const std::vector<std::uint32_t>& truth, const std::vector<std::uint32_t>& found) {
    std::size_t same = 0, swapped = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        same += found[i] == truth[i];
        swapped += found[i] == 1 - truth[i];
    }
    return static_cast<double>(std::max(same, swapped)) / static_cast<double>(truth.size());
}

}  // namespace

TEST(DescriptionLength, SingleBlock) {
    // One block: -1/2 e_11 ln(e_11 / e_1^2) + ln m with e_11 = e_1 = 2m.
    auto g = make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
    const double m = 6, e = 2 * m;
    std::vector<std::uint32_t> one(5, 0);
    EXPECT_NEAR(*description_length(g, one), -0.5 * e * std::log(e / (e * e)) + std::log(m), 1e-9);
}

TEST(DescriptionLength, MatchesDirectEvaluation) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = oracle::random_graph(30, 0.15, rng);
        if (g.m() == 0) continue;
        std::uniform_int_distribution<std::uint32_t> pick(0, 1 + trial % 5);
        std::vector<std::uint32_t> labels(30);
        for (auto& b : labels) b = pick(rng);
        EXPECT_NEAR(*description_length(g, labels), reference_dl(g, labels), 1e-8);
    }
}

TEST(DescriptionLength, InvariantUnderRelabelingAndNodePermutation) {
    auto g = planted_graph(20, 0.3, 0.05, 2);
    auto labels = planted_labels(20);
    labels[3] = 2;
    labels[27] = 2;
    const double dl = *description_length(g, labels);

    std::vector<std::uint32_t> renamed(labels.size());
    const std::uint32_t perm[] = {7, 0, 3};
    for (std::size_t i = 0; i < labels.size(); ++i) renamed[i] = perm[labels[i]];
    EXPECT_NEAR(*description_length(g, renamed), dl, 1e-9);

    std::vector<Node> order(g.n());
    std::iota(order.begin(), order.end(), Node{0});
    std::mt19937_64 rng(1);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Edge> moved;
    for (auto [u, v] : g.edges()) moved.emplace_back(order[u], order[v]);
    std::vector<std::uint32_t> moved_labels(g.n());
    for (Node i = 0; i < g.n(); ++i) moved_labels[order[i]] = labels[i];
    EXPECT_NEAR(*description_length(SimpleGraph::from_edges(g.n(), moved), moved_labels), dl, 1e-9);
}

TEST(DescriptionLength, PlantedBeatsSingleBlock) {
    auto g = planted_graph(50, 0.2, 0.01, 11);
    std::vector<std::uint32_t> one(100, 0);
    EXPECT_LT(*description_length(g, planted_labels(50)), *description_length(g, one));
}

TEST(DescriptionLength, UndefinedWithoutEdges) {
    std::vector<std::uint32_t> labels(3, 0);
    EXPECT_FALSE(description_length(make(3, {}), labels));
    EXPECT_THROW(description_length(make(3, {{0, 1}}), std::vector<std::uint32_t>(2, 0)), ParameterError);
}

TEST(Inference, TriangleCollapsesToOneBlock) {
    auto k3 = make(3, {{0, 1}, {1, 2}, {0, 2}});
    // Exhaustive over all 27 labelings: one block is the unique optimum class.
    std::vector<std::uint32_t> one(3, 0);
    const double best = *description_length(k3, one);
    for (std::uint32_t a = 0; a < 3; ++a)
        for (std::uint32_t b = 0; b < 3; ++b)
            for (std::uint32_t c = 0; c < 3; ++c) {
                if (a == b && b == c) continue;
                std::vector<std::uint32_t> labels{a, b, c};
                EXPECT_GT(*description_length(k3, labels), best);
            }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto run = infer_partition(k3, seed);
        EXPECT_EQ(run.params.num_blocks(), 1u);
        EXPECT_NEAR(run.description_length, best, 1e-12);
    }
}

TEST(Inference, RandomGraphsHaveNoStructure) {
    std::map<std::size_t, int> counts;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto g = gen_gnm(200, 800, 40 + seed);
        counts[infer_partition(g, seed).params.num_blocks()]++;
    }
    auto mode = std::max_element(counts.begin(), counts.end(), [](auto& a, auto& b) { return a.second < b.second; });
    EXPECT_EQ(mode->first, 1u);
}

TEST(Inference, RecoversPlantedBipartition) {
    const auto truth = planted_labels(50);
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto g = planted_graph(50, 0.2, 0.01, 500 + seed);
        auto run = infer_partition(g, seed);
        if (run.params.num_blocks() == 2 && agreement(truth, run.params.blocks) >= 0.9) ++recovered;
    }
    EXPECT_GT(recovered, 10);
}

TEST(Inference, ResultIsLocalMinimum) {
    auto g = planted_graph(30, 0.25, 0.03, 9);
    auto run = infer_partition(g, 3);
    auto labels = run.params.blocks;
    const double dl = *description_length(g, labels);
    EXPECT_NEAR(dl, run.description_length, 1e-9);
    const std::size_t B = run.params.num_blocks();
    for (Node u = 0; u < g.n(); ++u) {
        for (Node v : g.neighbors(u)) {
            auto moved = labels;
            moved[u] = labels[v];
            if (moved[u] == labels[u]) continue;
            EXPECT_GE(*description_length(g, moved), dl - 1e-9) << "node " << u;
        }
    }
    for (std::uint32_t r = 0; r < B; ++r)
        for (std::uint32_t s = r + 1; s < B; ++s) {
            auto merged = labels;
            for (auto& b : merged)
                if (b == s) b = r;
            EXPECT_GE(*description_length(g, merged), dl - 1e-9);
        }
}

TEST(Inference, BlockCountsRederiveFromLabels) {
    auto g = planted_graph(25, 0.3, 0.05, 4);
    auto run = infer_partition(g, 8, InferenceOptions{.initial_blocks = 6});
    validate(run.params);
    auto again = block_params_from_graph(g, run.params.blocks);
    EXPECT_EQ(again.edge_counts, run.params.edge_counts);
    EXPECT_EQ(run.params.degrees, degree_sequence(g));
    EXPECT_EQ(run.params.description_length, run.description_length);
}

TEST(Inference, RejectsEdgelessGraph) { EXPECT_THROW(infer_partition(make(4, {}), 0), ParameterError); }

TEST(Posterior, InverseWeights) {
    std::vector<double> dls{100, 200};
    auto w = selection_weights(dls, PosteriorWeighting::inverse_dl);
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
    auto b = selection_weights(dls, PosteriorWeighting::boltzmann);
    EXPECT_NEAR(b[0], 1.0, 1e-15);
    EXPECT_LT(b[1], 1e-40);
    std::vector<double> close{10, 10 + std::log(3.0)};
    auto c = selection_weights(close, PosteriorWeighting::boltzmann);
    EXPECT_NEAR(c[0], 0.75, 1e-12);
}

TEST(Posterior, SingleRunFillsEverySample) {
    auto g = planted_graph(10, 0.5, 0.1, 1);
    auto post = sample_parameter_sets(g, 1, 50, 9);
    ASSERT_EQ(post.selected.size(), 50u);
    for (auto i : post.selected) EXPECT_EQ(i, 0u);
    EXPECT_EQ(post.parameter_sets().size(), 50u);
}

TEST(Posterior, SelectionFrequencies) {
    auto g = planted_graph(15, 0.4, 0.05, 2);
    auto post = sample_parameter_sets(g, 6, 20000, 3);
    std::vector<double> dls;
    for (auto& r : post.runs) dls.push_back(r.description_length);
    auto w = selection_weights(dls, PosteriorWeighting::inverse_dl);
    std::vector<int> hits(6, 0);
    for (auto i : post.selected) ++hits[i];
    for (std::size_t r = 0; r < 6; ++r)
        EXPECT_NEAR(hits[r] / 20000.0, w[r], 4 * std::sqrt(w[r] * (1 - w[r]) / 20000.0));
}

TEST(Posterior, DeterministicAcrossThreadCounts) {
    auto g = planted_graph(20, 0.3, 0.05, 6);
    auto a = sample_parameter_sets(g, 8, 50, 17);
    auto b = sample_parameter_sets(g, 8, 50, 17, PosteriorWeighting::inverse_dl, 4);
    EXPECT_EQ(a.selected, b.selected);
    for (std::size_t r = 0; r < 8; ++r) {
        EXPECT_EQ(a.runs[r].params.blocks, b.runs[r].params.blocks);
        EXPECT_EQ(a.runs[r].description_length, b.runs[r].description_length);
    }
    EXPECT_THROW(sample_parameter_sets(g, 0, 50, 1), ParameterError);
}
