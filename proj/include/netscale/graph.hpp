#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netscale/error.hpp"

namespace netscale {

using Node = std::uint32_t;
using Edge = std::pair<Node, Node>;

/// Immutable undirected simple graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending, contain no duplicates and never contain
/// the node itself. Every edge {u, v} appears in both lists. Optional string
/// labels map dense indices back to the identifiers of the source file.
class SimpleGraph {
public:
    SimpleGraph() : offsets_(1, 0) {}

    /// Build from an arbitrary list of node pairs over nodes 0..n-1.
    /// Self-loops are dropped and duplicate pairs (in either orientation) collapsed.
    static SimpleGraph from_edges(std::size_t n, std::span<const Edge> edges, std::vector<std::string> labels = {}) {
        if (!labels.empty() && labels.size() != n) throw ParameterError("label count does not match node count");
        std::vector<std::uint64_t> deg(n + 1, 0);
        for (auto [u, v] : edges) {
            if (u >= n || v >= n) throw ParameterError("edge endpoint out of range");
            if (u == v) continue;
            ++deg[u];
            ++deg[v];
        }
        SimpleGraph g;
        g.offsets_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
        std::vector<Node> adj(g.offsets_[n]);
        std::vector<std::uint64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
        for (auto [u, v] : edges) {
            if (u == v) continue;
            adj[fill[u]++] = v;
            adj[fill[v]++] = u;
        }
        // Sort and dedupe each list, then compact.
        std::vector<std::uint64_t> offsets(n + 1, 0);
        std::uint64_t write = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto first = adj.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
            auto last = adj.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
            std::sort(first, last);
            last = std::unique(first, last);
            for (auto it = first; it != last; ++it) adj[write++] = *it;
            offsets[i + 1] = write;
        }
        adj.resize(write);
        adj.shrink_to_fit();
        g.offsets_ = std::move(offsets);
        g.adj_ = std::move(adj);
        g.labels_ = std::move(labels);
        return g;
    }

    std::size_t n() const noexcept { return offsets_.size() - 1; }
    std::size_t m() const noexcept { return adj_.size() / 2; }

    std::size_t degree(Node i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

    std::span<const Node> neighbors(Node i) const noexcept {
        return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
    }

    bool has_edge(Node u, Node v) const noexcept {
        auto nb = neighbors(degree(u) <= degree(v) ? u : v);
        Node target = degree(u) <= degree(v) ? v : u;
        return std::binary_search(nb.begin(), nb.end(), target);
    }

    /// Edges as (u, v) with u < v, ordered by u then v.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(m());
        for (Node u = 0; u < n(); ++u)
            for (Node v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    bool has_labels() const noexcept { return !labels_.empty(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// Original label if present, else the decimal index.
    std::string label(Node i) const { return labels_.empty() ? std::to_string(i) : labels_[i]; }

    /// Structural equality; labels are ignored.
    friend bool operator==(const SimpleGraph& a, const SimpleGraph& b) noexcept {
        return a.offsets_ == b.offsets_ && a.adj_ == b.adj_;
    }

private:
    std::vector<std::uint64_t> offsets_;
    std::vector<Node> adj_;
    std::vector<std::string> labels_;
};

struct ComponentPartition {
    std::vector<std::uint32_t> component;  // per node
    std::vector<std::size_t> sizes;        // per component

    std::size_t count() const noexcept { return sizes.size(); }

    /// Sum over components of C(|V_m|, 2).
    std::uint64_t reachable_pairs() const noexcept {
        std::uint64_t total = 0;
        for (auto s : sizes) total += static_cast<std::uint64_t>(s) * (s - (s > 0)) / 2;
        return total;
    }
};

/// Components numbered in order of their smallest node.
inline ComponentPartition connected_components(const SimpleGraph& g) {
    constexpr auto unset = static_cast<std::uint32_t>(-1);
    ComponentPartition p;
    p.component.assign(g.n(), unset);
    std::vector<Node> queue;
    queue.reserve(g.n());
    for (Node s = 0; s < g.n(); ++s) {
        if (p.component[s] != unset) continue;
        auto id = static_cast<std::uint32_t>(p.sizes.size());
        queue.clear();
        queue.push_back(s);
        p.component[s] = id;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (Node v : g.neighbors(queue[head])) {
                if (p.component[v] == unset) {
                    p.component[v] = id;
                    queue.push_back(v);
                }
            }
        }
        p.sizes.push_back(queue.size());
    }
    return p;
}

inline std::vector<std::size_t> degree_sequence(const SimpleGraph& g) {
    std::vector<std::size_t> k(g.n());
    for (Node i = 0; i < g.n(); ++i) k[i] = g.degree(i);
    return k;
}

}  // namespace netscale
