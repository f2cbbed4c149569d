#pragma once

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netscale/detail/format.hpp"
#include "netscale/detail/parallel.hpp"
#include "netscale/error.hpp"
#include "netscale/graph.hpp"

namespace netscale {

/// The four structural measures of one network plus provenance.
/// An empty optional is the "undefined" flag for that measure.
struct MeasureRecord {
    std::size_t n = 0;
    std::size_t m = 0;
    std::optional<double> mean_degree;
    std::optional<double> mean_geodesic;
    std::optional<double> clustering;
    std::optional<double> assortativity;
    std::string source = "empirical";
    std::optional<std::uint64_t> seed;

    // How mean_geodesic was obtained: "exact" or "estimate".
    std::string geodesic_method = "exact";
    std::optional<std::size_t> batches_used;
    std::optional<bool> converged;
};

inline double mean_degree(const SimpleGraph& g) {
    if (g.n() == 0) throw ParameterError("mean degree undefined for an empty graph");
    return 2.0 * static_cast<double>(g.m()) / static_cast<double>(g.n());
}

namespace detail {

/// Sum of d(s, v) over all ordered pairs (s, v) with v reachable from s,
/// using 64-source bit-parallel BFS.
inline std::uint64_t sum_ordered_distances(const SimpleGraph& g, unsigned threads) {
    const std::size_t n = g.n();
    const std::size_t blocks = (n + 63) / 64;
    std::vector<std::uint64_t> per_block(blocks, 0);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));

    struct Workspace {
        std::vector<std::uint64_t> visited, frontier, next;
    };
    std::vector<Workspace> ws(threads);

    parallel_for(blocks, threads, [&](std::size_t b, unsigned worker) {
        auto& w = ws[worker];
        w.visited.assign(n, 0);
        w.frontier.assign(n, 0);
        w.next.assign(n, 0);
        const std::size_t first = b * 64;
        const std::size_t count = std::min<std::size_t>(64, n - first);
        const std::uint64_t full = count == 64 ? ~0ULL : ((1ULL << count) - 1);
        for (std::size_t j = 0; j < count; ++j) {
            w.visited[first + j] |= 1ULL << j;
            w.frontier[first + j] |= 1ULL << j;
        }
        std::uint64_t total = 0;
        for (std::uint64_t level = 1;; ++level) {
            std::uint64_t discovered = 0;
            for (Node v = 0; v < n; ++v) {
                std::uint64_t seen = w.visited[v];
                if (seen == full) {
                    w.next[v] = 0;
                    continue;
                }
                std::uint64_t reach = 0;
                for (Node u : g.neighbors(v)) reach |= w.frontier[u];
                reach &= ~seen;
                w.next[v] = reach;
                if (reach) {
                    w.visited[v] = seen | reach;
                    auto c = static_cast<std::uint64_t>(std::popcount(reach));
                    discovered += c;
                }
            }
            if (discovered == 0) break;
            total += level * discovered;
            std::swap(w.frontier, w.next);
        }
        per_block[b] = total;
    });

    std::uint64_t sum = 0;
    for (auto s : per_block) sum += s;
    return sum;
}

}  // namespace detail

/// Mean shortest-path length over reachable pairs: the sum of finite pairwise
/// distances divided by the sum over components of C(|V_m|, 2).
/// Undefined when no component has two or more nodes.
inline std::optional<double> mean_geodesic_exact(const SimpleGraph& g, unsigned threads = detail::default_threads()) {
    auto pairs = connected_components(g).reachable_pairs();
    if (pairs == 0) return std::nullopt;
    auto ordered = detail::sum_ordered_distances(g, threads);
    return static_cast<double>(ordered) / 2.0 / static_cast<double>(pairs);
}

/// Triangles counted once each, via degree-ordered orientation and merge intersection.
inline std::uint64_t count_triangles(const SimpleGraph& g) {
    const std::size_t n = g.n();
    auto before = [&](Node a, Node b) {
        auto da = g.degree(a), db = g.degree(b);
        return da < db || (da == db && a < b);
    };
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (Node u = 0; u < n; ++u) {
        std::uint64_t c = 0;
        for (Node v : g.neighbors(u))
            if (before(u, v)) ++c;
        offsets[u + 1] = offsets[u] + c;
    }
    std::vector<Node> out(offsets[n]);
    for (Node u = 0; u < n; ++u) {
        auto pos = offsets[u];
        for (Node v : g.neighbors(u))
            if (before(u, v)) out[pos++] = v;  // stays sorted by index
    }
    std::uint64_t triangles = 0;
    for (Node u = 0; u < n; ++u) {
        for (auto i = offsets[u]; i < offsets[u + 1]; ++i) {
            Node v = out[i];
            auto a = out.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
            auto a_end = out.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
            auto b = out.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
            auto b_end = out.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
            while (a != a_end && b != b_end) {
                if (*a < *b) ++a;
                else if (*b < *a) ++b;
                else {
                    ++triangles;
                    ++a;
                    ++b;
                }
            }
        }
    }
    return triangles;
}

/// Number of paths of length two: sum of C(deg(i), 2).
inline std::uint64_t connected_triples(const SimpleGraph& g) {
    std::uint64_t total = 0;
    for (Node i = 0; i < g.n(); ++i) {
        std::uint64_t d = g.degree(i);
        total += d * (d - (d > 0)) / 2;
    }
    return total;
}

/// Transitivity 3T / triples. Undefined when the graph has no connected triple.
inline std::optional<double> global_clustering(const SimpleGraph& g) {
    auto triples = connected_triples(g);
    if (triples == 0) return std::nullopt;
    return 3.0 * static_cast<double>(count_triangles(g)) / static_cast<double>(triples);
}

/// Pearson correlation of endpoint degrees over edges, each undirected edge
/// contributing symmetrically. Computed in exact integer arithmetic up to the
/// final division; undefined when the denominator is zero (including m = 0).
inline std::optional<double> degree_assortativity(const SimpleGraph& g) {
    using wide = __int128;
    wide edges = 0, sum = 0, sum_sq = 0, sum_prod = 0;
    for (Node u = 0; u < g.n(); ++u) {
        const wide ku = static_cast<wide>(g.degree(u));
        for (Node v : g.neighbors(u)) {
            if (v < u) continue;
            const wide kv = static_cast<wide>(g.degree(v));
            ++edges;
            sum += ku + kv;
            sum_sq += ku * ku + kv * kv;
            sum_prod += ku * kv;
        }
    }
    // r = (4 M P - A^2) / (2 M Q - A^2)
    const wide num = 4 * edges * sum_prod - sum * sum;
    const wide den = 2 * edges * sum_sq - sum * sum;
    if (edges == 0 || den == 0) return std::nullopt;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

/// All four measures with the exact path-length computation.
inline MeasureRecord exact_measures(const SimpleGraph& g, unsigned threads = detail::default_threads()) {
    MeasureRecord r;
    r.n = g.n();
    r.m = g.m();
    if (g.n() > 0) r.mean_degree = mean_degree(g);
    r.mean_geodesic = mean_geodesic_exact(g, threads);
    r.clustering = global_clustering(g);
    r.assortativity = degree_assortativity(g);
    return r;
}

// Serialization. Column order is fixed: n, m, mean_degree, mean_geodesic,
// clustering, assortativity, source, seed, then path-length provenance.

inline std::string measure_csv_header() {
    return "n,m,mean_degree,mean_geodesic,clustering,assortativity,source,seed,geodesic_method,batches_used,converged";
}

inline std::string to_csv_row(const MeasureRecord& r) {
    using detail::format_optional;
    std::string row = std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + format_optional(r.mean_degree) + ',' +
                      format_optional(r.mean_geodesic) + ',' + format_optional(r.clustering) + ',' +
                      format_optional(r.assortativity) + ',' + detail::csv_field(r.source) + ',' +
                      (r.seed ? std::to_string(*r.seed) : std::string{}) + ',' + r.geodesic_method + ',' +
                      (r.batches_used ? std::to_string(*r.batches_used) : std::string{}) + ',' +
                      (r.converged ? (*r.converged ? "true" : "false") : "");
    return row;
}

inline nlohmann::ordered_json to_json(const MeasureRecord& r) {
    auto opt = [](const std::optional<double>& x) -> nlohmann::ordered_json {
        return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["m"] = r.m;
    j["mean_degree"] = opt(r.mean_degree);
    j["mean_geodesic"] = opt(r.mean_geodesic);
    j["clustering"] = opt(r.clustering);
    j["assortativity"] = opt(r.assortativity);
    j["source"] = r.source;
    j["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
    j["geodesic_method"] = r.geodesic_method;
    j["batches_used"] = r.batches_used ? nlohmann::ordered_json(*r.batches_used) : nlohmann::ordered_json(nullptr);
    j["converged"] = r.converged ? nlohmann::ordered_json(*r.converged) : nlohmann::ordered_json(nullptr);
    return j;
}

inline MeasureRecord measure_record_from_json(const nlohmann::ordered_json& j) {
    auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
    };
    MeasureRecord r;
    r.n = j.at("n").get<std::size_t>();
    r.m = j.at("m").get<std::size_t>();
    r.mean_degree = opt("mean_degree");
    r.mean_geodesic = opt("mean_geodesic");
    r.clustering = opt("clustering");
    r.assortativity = opt("assortativity");
    r.source = j.value("source", std::string("empirical"));
    if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.geodesic_method = j.value("geodesic_method", std::string("exact"));
    if (j.contains("batches_used") && !j.at("batches_used").is_null()) r.batches_used = j.at("batches_used").get<std::size_t>();
    if (j.contains("converged") && !j.at("converged").is_null()) r.converged = j.at("converged").get<bool>();
    return r;
}

}  // namespace netscale
