#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "netscale/detail/random.hpp"
#include "netscale/error.hpp"
#include "netscale/graph.hpp"

namespace netscale {

/// Parameters of a degree-corrected block model.
///
/// `edge_counts[r][s]` is the number of edge endpoints between blocks r and s;
/// the diagonal counts every within-block edge twice, so each row sums to the
/// total degree of the block. `theta`/`omega` are only needed by the
/// expected-count variant.
struct BlockModelParams {
    std::vector<std::size_t> degrees;
    std::vector<std::uint32_t> blocks;
    std::vector<std::vector<std::uint64_t>> edge_counts;
    std::optional<std::vector<double>> theta;
    std::optional<std::vector<std::vector<double>>> omega;
    double description_length = 0.0;

    std::size_t num_blocks() const noexcept { return edge_counts.size(); }
};

/// Throws ParameterError unless degrees, labels and block counts are consistent.
inline void validate(const BlockModelParams& p) {
    const std::size_t n = p.degrees.size();
    const std::size_t B = p.edge_counts.size();
    if (p.blocks.size() != n) throw ParameterError("block label count does not match degree sequence length");
    for (auto& row : p.edge_counts)
        if (row.size() != B) throw ParameterError("block edge count matrix is not square");
    std::vector<std::uint64_t> stubs(B, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (p.blocks[i] >= B) throw ParameterError("block label out of range");
        stubs[p.blocks[i]] += p.degrees[i];
    }
    for (std::size_t r = 0; r < B; ++r) {
        if (p.edge_counts[r][r] % 2 != 0) throw ParameterError("within-block endpoint count e_rr must be even");
        std::uint64_t row = 0;
        for (std::size_t s = 0; s < B; ++s) {
            if (p.edge_counts[r][s] != p.edge_counts[s][r]) throw ParameterError("block edge count matrix is not symmetric");
            row += p.edge_counts[r][s];
        }
        if (row != stubs[r]) throw ParameterError("stub count mismatch in block " + std::to_string(r));
    }
}

/// Block edge counts implied by a graph and a labelling, plus the expected-count
/// parameters theta_i = k_i / e_{b_i} and omega_rs = e_rs.
inline BlockModelParams block_params_from_graph(const SimpleGraph& g, std::span<const std::uint32_t> labels) {
    if (labels.size() != g.n()) throw ParameterError("label count does not match node count");
    std::uint32_t B = 0;
    for (auto b : labels) B = std::max(B, b + 1);
    BlockModelParams p;
    p.degrees = degree_sequence(g);
    p.blocks.assign(labels.begin(), labels.end());
    p.edge_counts.assign(B, std::vector<std::uint64_t>(B, 0));
    for (Node u = 0; u < g.n(); ++u)
        for (Node v : g.neighbors(u)) ++p.edge_counts[labels[u]][labels[v]];  // each edge seen from both ends
    std::vector<double> block_total(B, 0.0);
    for (std::size_t r = 0; r < B; ++r)
        block_total[r] = static_cast<double>(std::accumulate(p.edge_counts[r].begin(), p.edge_counts[r].end(), std::uint64_t{0}));
    std::vector<double> theta(g.n(), 0.0);
    for (Node i = 0; i < g.n(); ++i) {
        double e = block_total[labels[i]];
        theta[i] = e > 0 ? static_cast<double>(p.degrees[i]) / e : 0.0;
    }
    std::vector<std::vector<double>> omega(B, std::vector<double>(B, 0.0));
    for (std::size_t r = 0; r < B; ++r)
        for (std::size_t s = 0; s < B; ++s) omega[r][s] = static_cast<double>(p.edge_counts[r][s]);
    p.theta = std::move(theta);
    p.omega = std::move(omega);
    return p;
}

inline nlohmann::ordered_json to_json(const BlockModelParams& p) {
    nlohmann::ordered_json j;
    j["k"] = p.degrees;
    j["b"] = p.blocks;
    j["e"] = p.edge_counts;
    if (p.theta) j["theta"] = *p.theta;
    if (p.omega) j["omega"] = *p.omega;
    j["description_length"] = p.description_length;
    return j;
}

inline BlockModelParams block_params_from_json(const nlohmann::ordered_json& j) {
    BlockModelParams p;
    p.degrees = j.at("k").get<std::vector<std::size_t>>();
    p.blocks = j.at("b").get<std::vector<std::uint32_t>>();
    p.edge_counts = j.at("e").get<std::vector<std::vector<std::uint64_t>>>();
    if (j.contains("theta")) p.theta = j.at("theta").get<std::vector<double>>();
    if (j.contains("omega")) p.omega = j.at("omega").get<std::vector<std::vector<double>>>();
    p.description_length = j.value("description_length", 0.0);
    return p;
}

namespace detail {

inline std::uint64_t pair_key(Node u, Node v) noexcept {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

/// Unordered pair {i, j}, i < j, at position k of the row-major upper triangle.
inline Edge pair_from_index(std::uint64_t n, std::uint64_t k) {
    // Row i starts at i*(2n - i - 1)/2.
    auto row_start = [n](std::uint64_t i) { return i * (2 * n - i - 1) / 2; };
    std::uint64_t lo = 0, hi = n - 1;
    while (lo + 1 < hi) {
        std::uint64_t mid = (lo + hi) / 2;
        if (row_start(mid) <= k) lo = mid;
        else hi = mid;
    }
    std::uint64_t i = row_start(hi) <= k ? hi : lo;
    std::uint64_t j = k - row_start(i) + i + 1;
    return {static_cast<Node>(i), static_cast<Node>(j)};
}

inline double open_unit(Rng& rng) {
    // (0, 1]
    return 1.0 - std::generate_canonical<double, 53>(rng);
}

/// Independent pair sampling with p_uv = min(1, w_u * w_v * scale), where
/// `us` and `vs` are node lists sorted by non-increasing weight. When `same`
/// is true the two lists are identical and only pairs u < v (by position)
/// are considered. Geometric skipping keeps the cost proportional to the
/// number of sampled edges plus list lengths.
inline void sample_weighted_pairs(std::span<const Node> us, std::span<const Node> vs, std::span<const double> weight,
                                  double scale, bool same, Rng& rng, std::vector<Edge>& out, std::size_t* capped) {
    if (scale <= 0) return;
    for (std::size_t a = 0; a < us.size(); ++a) {
        const double wu = weight[us[a]];
        if (wu <= 0) break;
        std::size_t b = same ? a + 1 : 0;
        if (capped) {
            // Pairs with raw probability above one form a prefix of vs.
            auto first = vs.begin() + static_cast<std::ptrdiff_t>(b);
            auto it = std::partition_point(first, vs.end(), [&](Node v) { return wu * weight[v] * scale > 1.0; });
            *capped += static_cast<std::size_t>(it - first);
        }
        if (b >= vs.size()) continue;
        double p = std::min(1.0, wu * weight[vs[b]] * scale);
        while (b < vs.size() && p > 0) {
            if (p < 1.0) {
                double skip = std::floor(std::log(open_unit(rng)) / std::log1p(-p));
                if (skip >= static_cast<double>(vs.size() - b)) break;
                b += static_cast<std::size_t>(skip);
            }
            double q = std::min(1.0, wu * weight[vs[b]] * scale);
            if (open_unit(rng) <= q / p && q > 0) out.emplace_back(us[a], vs[b]);
            p = q;
            ++b;
        }
    }
}

}  // namespace detail

/// Uniform simple graph with exactly m edges on n nodes.
inline SimpleGraph gen_gnm(std::size_t n, std::size_t m, std::uint64_t seed) {
    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - (n > 0)) / 2;
    if (m > total) throw ParameterError("m exceeds the number of node pairs");
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve(m);
    if (m == 0) return SimpleGraph::from_edges(n, edges);
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    std::unordered_set<std::uint64_t> chosen;
    if (m <= total / 2) {
        chosen.reserve(2 * m);
        while (edges.size() < m) {
            auto k = pick(rng);
            if (chosen.insert(k).second) edges.push_back(detail::pair_from_index(n, k));
        }
    } else {
        // Dense: draw the complement, then enumerate the rest.
        const std::uint64_t excluded = total - m;
        chosen.reserve(2 * excluded);
        while (chosen.size() < excluded) chosen.insert(pick(rng));
        for (std::uint64_t k = 0; k < total; ++k)
            if (!chosen.count(k)) edges.push_back(detail::pair_from_index(n, k));
    }
    return SimpleGraph::from_edges(n, edges);
}

/// Each of the C(n, 2) pairs included independently with probability p.
inline SimpleGraph gen_gnp(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p must lie in [0, 1]");
    Rng rng(seed);
    std::vector<Edge> edges;
    if (p == 0.0 || n < 2) return SimpleGraph::from_edges(n, edges);
    if (p == 1.0) {
        for (Node u = 0; u < n; ++u)
            for (Node v = u + 1; v < n; ++v) edges.emplace_back(u, v);
        return SimpleGraph::from_edges(n, edges);
    }
    // Geometric skipping over the lower triangle.
    const double log_q = std::log1p(-p);
    std::int64_t v = 1, w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
        double skip = std::floor(std::log(detail::open_unit(rng)) / log_q);
        w += 1 + static_cast<std::int64_t>(std::min(skip, 9.0e15));
        while (w >= v && v < nn) {
            w -= v;
            ++v;
        }
        if (v < nn) edges.emplace_back(static_cast<Node>(w), static_cast<Node>(v));
    }
    return SimpleGraph::from_edges(n, edges);
}

/// Double-edge-swap Markov chain over simple graphs with the degree sequence of g.
///
/// Runs swaps_per_edge * m attempts starting from g itself. Each attempt
/// picks two distinct edges (a,b), (c,d) uniformly and one of the two
/// rewirings (a,d),(c,b) or (a,c),(b,d) with equal probability; proposals
/// creating a self-loop or multi-edge are rejected.
inline SimpleGraph config_model_sample(const SimpleGraph& g, std::size_t swaps_per_edge, std::uint64_t seed,
                                       std::size_t* accepted_swaps = nullptr) {
    if (swaps_per_edge == 0) throw ParameterError("swaps_per_edge must be at least 1");
    auto edges = g.edges();
    const std::size_t m = edges.size();
    if (accepted_swaps) *accepted_swaps = 0;
    if (m < 2) return SimpleGraph::from_edges(g.n(), edges, g.labels());

    std::unordered_set<std::uint64_t> present;
    present.reserve(2 * m);
    for (auto [u, v] : edges) present.insert(detail::pair_key(u, v));

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, m - 2);
    std::bernoulli_distribution coin(0.5);
    const std::size_t attempts = swaps_per_edge * m;
    for (std::size_t t = 0; t < attempts; ++t) {
        std::size_t i = pick(rng);
        std::size_t j = pick_other(rng);
        if (j >= i) ++j;
        auto [a, b] = edges[i];
        auto [c, d] = edges[j];
        Edge e1, e2;
        if (coin(rng)) {
            e1 = {a, d};
            e2 = {c, b};
        } else {
            e1 = {a, c};
            e2 = {b, d};
        }
        if (e1.first == e1.second || e2.first == e2.second) continue;
        auto k1 = detail::pair_key(e1.first, e1.second);
        auto k2 = detail::pair_key(e2.first, e2.second);
        if (k1 == k2 || present.count(k1) || present.count(k2)) continue;
        present.erase(detail::pair_key(a, b));
        present.erase(detail::pair_key(c, d));
        present.insert(k1);
        present.insert(k2);
        edges[i] = e1;
        edges[j] = e2;
        if (accepted_swaps) ++*accepted_swaps;
    }
    return SimpleGraph::from_edges(g.n(), edges, g.labels());
}

/// Independent pairs with p_ij = min(1, k_i k_j / sum_l k_l).
/// `capped`, if given, receives the number of pairs whose raw probability exceeded one.
inline SimpleGraph chung_lu_sample(std::span<const std::size_t> degrees, std::uint64_t seed,
                                   std::size_t* capped = nullptr) {
    const std::size_t n = degrees.size();
    std::vector<Edge> edges;
    if (capped) *capped = 0;
    const double total = std::accumulate(degrees.begin(), degrees.end(), 0.0,
                                         [](double acc, std::size_t k) { return acc + static_cast<double>(k); });
    if (total <= 0) return SimpleGraph::from_edges(n, edges);
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) weight[i] = static_cast<double>(degrees[i]);
    std::vector<Node> order(n);
    std::iota(order.begin(), order.end(), Node{0});
    std::stable_sort(order.begin(), order.end(), [&](Node a, Node b) { return weight[a] > weight[b]; });
    Rng rng(seed);
    detail::sample_weighted_pairs(order, order, weight, 1.0 / total, true, rng, edges, capped);
    return SimpleGraph::from_edges(n, edges);
}

/// Result of microcanonical stub matching; may contain loops and multi-edges.
struct Multigraph {
    std::size_t n = 0;
    std::vector<Edge> edges;
};

struct DcsbmDraw {
    Multigraph graph;
    std::size_t non_simple = 0;  // self-loops plus surplus copies of repeated pairs
};

inline std::size_t count_non_simple(const Multigraph& g) {
    std::unordered_map<std::uint64_t, std::size_t> seen;
    std::size_t bad = 0;
    for (auto [u, v] : g.edges) {
        if (u == v) ++bad;
        else if (seen[detail::pair_key(u, v)]++ > 0) ++bad;
    }
    return bad;
}

/// Stub matching that reproduces the degree sequence and every e_rs exactly.
inline DcsbmDraw dcsbm_generate(const BlockModelParams& params, std::uint64_t seed) {
    validate(params);
    const std::size_t B = params.num_blocks();
    Rng rng(seed);
    std::vector<std::vector<Node>> pools(B);
    for (std::size_t i = 0; i < params.degrees.size(); ++i)
        pools[params.blocks[i]].insert(pools[params.blocks[i]].end(), params.degrees[i], static_cast<Node>(i));
    for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

    std::vector<std::size_t> cursor(B, 0);
    DcsbmDraw draw;
    draw.graph.n = params.degrees.size();
    for (std::size_t r = 0; r < B; ++r) {
        for (std::size_t s = r + 1; s < B; ++s)
            for (std::uint64_t t = 0; t < params.edge_counts[r][s]; ++t)
                draw.graph.edges.emplace_back(pools[r][cursor[r]++], pools[s][cursor[s]++]);
        for (std::uint64_t t = 0; t < params.edge_counts[r][r] / 2; ++t) {
            Node u = pools[r][cursor[r]++];
            Node v = pools[r][cursor[r]++];
            draw.graph.edges.emplace_back(u, v);
        }
    }
    draw.non_simple = count_non_simple(draw.graph);
    return draw;
}

struct RepairResult {
    SimpleGraph graph;
    std::size_t deleted_edges = 0;
    std::size_t accepted_swaps = 0;
};

/// Called after every accepted swap with the current edge slots and liveness flags.
using RepairObserver = std::function<void(std::span<const Edge> slots, const std::vector<bool>& alive)>;

/// Remove self-loops and multi-edges by block-preserving double-edge swaps.
///
/// For each offending edge (a, b) a random edge (c, d) with c in a's block is
/// drawn and rewired to (a, d), (c, b). The swap is rejected if either new
/// edge already exists or is a self-loop; after `max_attempts` rejections the
/// offending copy is deleted. Degrees, labels and e_rs are unchanged by every
/// accepted swap.
inline RepairResult dcsbm_repair(const Multigraph& input, const BlockModelParams& params, std::size_t max_attempts,
                                 std::uint64_t seed, const RepairObserver& observer = {}) {
    if (params.blocks.size() != input.n) throw ParameterError("block labels do not cover the multigraph");
    const std::size_t B = std::max<std::size_t>(params.num_blocks(), 1);
    std::vector<Edge> slots = input.edges;
    std::vector<bool> alive(slots.size(), true);
    std::unordered_map<std::uint64_t, std::uint32_t> multiplicity;
    multiplicity.reserve(2 * slots.size());
    for (auto [u, v] : slots) ++multiplicity[detail::pair_key(u, v)];

    // Stub id = 2 * slot + end. Each block keeps the stubs attached to its nodes.
    std::vector<std::vector<std::uint64_t>> stubs(B);
    std::vector<std::size_t> position(2 * slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        for (int end = 0; end < 2; ++end) {
            Node x = end == 0 ? slots[i].first : slots[i].second;
            auto& list = stubs[params.blocks[x]];
            position[2 * i + end] = list.size();
            list.push_back(2 * i + end);
        }
    }
    auto remove_stub = [&](std::uint64_t stub, std::size_t block) {
        auto& list = stubs[block];
        auto pos = position[stub];
        list[pos] = list.back();
        position[list[pos]] = pos;
        list.pop_back();
    };
    auto endpoint = [&](std::uint64_t stub) { return stub % 2 == 0 ? slots[stub / 2].first : slots[stub / 2].second; };
    auto non_simple = [&](std::size_t i) {
        auto [u, v] = slots[i];
        return u == v || multiplicity[detail::pair_key(u, v)] > 1;
    };

    Rng rng(seed);
    RepairResult result;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!alive[i] || !non_simple(i)) continue;
        bool fixed = false;
        for (std::size_t attempt = 0; attempt < max_attempts && !fixed; ++attempt) {
            auto [a, b] = slots[i];
            const auto& pool = stubs[params.blocks[a]];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::uint64_t stub = pool[pick(rng)];
            std::size_t j = stub / 2;
            if (j == i) continue;
            Node c = endpoint(stub);
            std::uint64_t other = stub ^ 1ULL;
            Node d = endpoint(other);
            if (a == d || c == b) continue;
            auto k_ad = detail::pair_key(a, d);
            auto k_cb = detail::pair_key(c, b);
            if (k_ad == k_cb) continue;
            if (multiplicity[k_ad] > 0 || multiplicity[k_cb] > 0) continue;

            --multiplicity[detail::pair_key(a, b)];
            --multiplicity[detail::pair_key(c, d)];
            ++multiplicity[k_ad];
            ++multiplicity[k_cb];
            slots[i] = {a, d};
            if (other % 2 == 0) slots[j].first = b;
            else slots[j].second = b;

            // Stub (i, 1) moved from b to d; the far stub of slot j moved from d to b.
            const std::uint64_t stub_i = 2 * i + 1;
            const std::size_t block_b = params.blocks[b], block_d = params.blocks[d];
            if (block_b != block_d) {
                auto pi = position[stub_i], po = position[other];
                stubs[block_b][pi] = other;
                stubs[block_d][po] = stub_i;
                position[other] = pi;
                position[stub_i] = po;
            }
            ++result.accepted_swaps;
            fixed = true;
            if (observer) observer(slots, alive);
        }
        if (!fixed) {
            alive[i] = false;
            --multiplicity[detail::pair_key(slots[i].first, slots[i].second)];
            remove_stub(2 * i, params.blocks[slots[i].first]);
            remove_stub(2 * i + 1, params.blocks[slots[i].second]);
            ++result.deleted_edges;
        }
    }

    std::vector<Edge> kept;
    kept.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (alive[i]) kept.push_back(slots[i]);
    result.graph = SimpleGraph::from_edges(input.n, kept);
    return result;
}

/// Expected-count block model: pairs included independently with
/// p_ij = min(1, theta_i theta_j omega_{b_i b_j}).
inline SimpleGraph dcsbm_maxent_sample(const BlockModelParams& params, std::uint64_t seed,
                                       std::size_t* capped = nullptr) {
    if (!params.theta || !params.omega) throw ParameterError("theta and omega are required");
    const auto& theta = *params.theta;
    const auto& omega = *params.omega;
    const std::size_t n = theta.size();
    if (params.blocks.size() != n) throw ParameterError("block label count does not match theta");
    const std::size_t B = omega.size();
    for (double t : theta)
        if (!(t >= 0)) throw ParameterError("theta must be non-negative");
    for (auto& row : omega) {
        if (row.size() != B) throw ParameterError("omega is not square");
        for (double w : row)
            if (!(w >= 0)) throw ParameterError("omega must be non-negative");
    }
    std::vector<std::vector<Node>> members(B);
    for (Node i = 0; i < n; ++i) {
        if (params.blocks[i] >= B) throw ParameterError("block label out of range");
        members[params.blocks[i]].push_back(i);
    }
    for (auto& list : members)
        std::stable_sort(list.begin(), list.end(), [&](Node a, Node b) { return theta[a] > theta[b]; });

    if (capped) *capped = 0;
    Rng rng(seed);
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < B; ++r)
        for (std::size_t s = r; s < B; ++s)
            detail::sample_weighted_pairs(members[r], members[s], theta, omega[r][s], r == s, rng, edges, capped);
    return SimpleGraph::from_edges(n, edges);
}

}  // namespace netscale
