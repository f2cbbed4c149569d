#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "netscale/detail/parallel.hpp"
#include "netscale/detail/random.hpp"
#include "netscale/error.hpp"
#include "netscale/graph.hpp"

namespace netscale {

struct EstimatorConfig {
    std::size_t batch_size = 1000;  // must be even; half goes to each list
    double threshold = 0.1;
    std::size_t max_batches = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct GeodesicEstimate {
    std::optional<double> value;  // empty when the graph has no reachable pair
    std::size_t batches_used = 0;
    bool converged = false;
};

namespace detail {

/// Hop distance from source to target by BFS that stops once target is reached.
/// Uses epoch stamps so the buffers are reused across calls without clearing.
class TruncatedBfs {
public:
    explicit TruncatedBfs(std::size_t n) : stamp_(n, 0), dist_(n, 0) { queue_.reserve(n); }

    std::uint32_t distance(const SimpleGraph& g, Node source, Node target) {
        if (source == target) return 0;
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
        queue_.clear();
        queue_.push_back(source);
        stamp_[source] = epoch_;
        dist_[source] = 0;
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            Node u = queue_[head];
            for (Node v : g.neighbors(u)) {
                if (stamp_[v] == epoch_) continue;
                stamp_[v] = epoch_;
                dist_[v] = dist_[u] + 1;
                if (v == target) return dist_[v];
                queue_.push_back(v);
            }
        }
        throw ParameterError("sampled pair is not connected");
    }

private:
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint32_t> dist_;
    std::vector<Node> queue_;
    std::uint32_t epoch_ = 0;
};

}  // namespace detail

/// Draws node pairs uniformly from the set of reachable unordered pairs:
/// a component with probability proportional to C(|V_m|, 2), then two distinct
/// members uniformly.
class ReachablePairSampler {
public:
    ReachablePairSampler(const SimpleGraph& g, const ComponentPartition& parts) {
        std::vector<std::size_t> slot(parts.count(), static_cast<std::size_t>(-1));
        for (std::size_t c = 0; c < parts.count(); ++c) {
            if (parts.sizes[c] < 2) continue;
            slot[c] = members_.size();
            members_.emplace_back();
            members_.back().reserve(parts.sizes[c]);
            std::uint64_t s = parts.sizes[c];
            total_ += s * (s - 1) / 2;
            cumulative_.push_back(total_);
        }
        for (Node v = 0; v < g.n(); ++v) {
            auto c = slot[parts.component[v]];
            if (c != static_cast<std::size_t>(-1)) members_[c].push_back(v);
        }
    }

    std::uint64_t total_pairs() const noexcept { return total_; }

    Edge operator()(Rng& rng) const {
        std::uniform_int_distribution<std::uint64_t> pick_pair(0, total_ - 1);
        auto k = pick_pair(rng);
        auto c = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), k) - cumulative_.begin());
        const auto& nodes = members_[c];
        std::uniform_int_distribution<std::size_t> first(0, nodes.size() - 1);
        std::uniform_int_distribution<std::size_t> second(0, nodes.size() - 2);
        auto i = first(rng);
        auto j = second(rng);
        if (j >= i) ++j;
        return {nodes[i], nodes[j]};
    }

private:
    std::vector<std::vector<Node>> members_;
    std::vector<std::uint64_t> cumulative_;
    std::uint64_t total_ = 0;
};

/// Two-list batch sampling estimate of the mean geodesic distance.
///
/// Each batch draws `batch_size` reachable pairs; the first half is appended
/// to list one and the second half to list two. Sampling stops as soon as the
/// two list means differ by less than `threshold`, and the pooled mean of both
/// lists is returned. If `max_batches` is reached first, the pooled mean is
/// returned with `converged == false`.
inline GeodesicEstimate estimate_mean_geodesic(const SimpleGraph& g, const ComponentPartition& parts,
                                               const EstimatorConfig& cfg) {
    if (cfg.batch_size == 0 || cfg.batch_size % 2 != 0) throw ParameterError("batch size must be positive and even");
    if (!(cfg.threshold > 0)) throw ParameterError("threshold must be positive");
    if (cfg.max_batches == 0) throw ParameterError("max_batches must be positive");

    GeodesicEstimate result;
    ReachablePairSampler sampler(g, parts);
    if (sampler.total_pairs() == 0) return result;

    Rng rng(cfg.seed);
    const unsigned threads = std::max(1u, cfg.threads);
    std::vector<detail::TruncatedBfs> bfs;
    bfs.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) bfs.emplace_back(g.n());

    const std::size_t half = cfg.batch_size / 2;
    std::vector<Edge> pairs(cfg.batch_size);
    std::vector<std::uint32_t> dist(cfg.batch_size);
    std::uint64_t sum_a = 0, sum_b = 0, count_a = 0, count_b = 0;

    while (result.batches_used < cfg.max_batches) {
        // Draw sequentially so the sample does not depend on the thread count.
        for (auto& p : pairs) p = sampler(rng);
        detail::parallel_for(pairs.size(), threads, [&](std::size_t i, unsigned worker) {
            dist[i] = bfs[worker].distance(g, pairs[i].first, pairs[i].second);
        });
        for (std::size_t i = 0; i < half; ++i) sum_a += dist[i];
        for (std::size_t i = half; i < cfg.batch_size; ++i) sum_b += dist[i];
        count_a += half;
        count_b += cfg.batch_size - half;
        ++result.batches_used;

        double mean_a = static_cast<double>(sum_a) / static_cast<double>(count_a);
        double mean_b = static_cast<double>(sum_b) / static_cast<double>(count_b);
        if (std::abs(mean_a - mean_b) < cfg.threshold) {
            result.converged = true;
            break;
        }
    }
    result.value = static_cast<double>(sum_a + sum_b) / static_cast<double>(count_a + count_b);
    return result;
}

inline GeodesicEstimate estimate_mean_geodesic(const SimpleGraph& g, const EstimatorConfig& cfg) {
    return estimate_mean_geodesic(g, connected_components(g), cfg);
}

}  // namespace netscale
