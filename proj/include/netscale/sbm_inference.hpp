#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "netscale/detail/parallel.hpp"
#include "netscale/detail/random.hpp"
#include "netscale/error.hpp"
#include "netscale/graph.hpp"
#include "netscale/null_models.hpp"

namespace netscale {

namespace detail {

inline double xlogx(double x) noexcept { return x > 0 ? x * std::log(x) : 0.0; }

inline double dl_penalty(std::size_t blocks, std::size_t n, std::size_t m) noexcept {
    const double B = static_cast<double>(blocks);
    return B * (B + 1) / 2 * std::log(static_cast<double>(m)) + static_cast<double>(n) * std::log(B);
}

/// Dense block-count bookkeeping for the greedy optimizer.
///
/// DL = sum_r e_r ln e_r - 1/2 sum_{r,s} e_rs ln e_rs + penalty(B), which
/// equals -[sum_{r<s} e_rs ln(e_rs/(e_r e_s)) + 1/2 sum_r e_rr ln(e_rr/e_r^2)]
/// + penalty(B).
class PartitionState {
public:
    PartitionState(const SimpleGraph& g, std::vector<std::uint32_t> labels, std::size_t capacity)
        : g_(g), labels_(std::move(labels)), cap_(capacity), e_(capacity * capacity, 0), total_(capacity, 0),
          size_(capacity, 0), scratch_(capacity, 0) {
        for (Node u = 0; u < g.n(); ++u) {
            ++size_[labels_[u]];
            total_[labels_[u]] += static_cast<std::int64_t>(g.degree(u));
            for (Node v : g.neighbors(u)) ++at(labels_[u], labels_[v]);
        }
        for (auto s : size_) nonempty_ += s > 0;
    }

    std::size_t blocks() const noexcept { return nonempty_; }
    const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

    double description_length() const {
        double dl = 0;
        for (std::size_t r = 0; r < cap_; ++r) {
            dl += xlogx(static_cast<double>(total_[r]));
            for (std::size_t s = 0; s < cap_; ++s) dl -= 0.5 * xlogx(static_cast<double>(at(r, s)));
        }
        return dl + dl_penalty(nonempty_, g_.n(), g_.m());
    }

    /// Best move of node u to a block containing one of its neighbors.
    /// Returns (delta, target); target == current block when no candidate exists.
    std::pair<double, std::uint32_t> best_move(Node u) {
        const std::uint32_t r = labels_[u];
        touched_.clear();
        for (Node v : g_.neighbors(u)) {
            auto t = labels_[v];
            if (scratch_[t]++ == 0) touched_.push_back(t);
        }
        std::pair<double, std::uint32_t> best{0.0, r};
        for (auto s : touched_) {
            if (s == r) continue;
            double d = move_delta(u, r, s);
            if (d < best.first || best.second == r) best = {d, s};
        }
        for (auto t : touched_) scratch_[t] = 0;
        return best;
    }

    void move(Node u, std::uint32_t s) {
        const std::uint32_t r = labels_[u];
        if (r == s) return;
        const auto k = static_cast<std::int64_t>(g_.degree(u));
        for (Node v : g_.neighbors(u)) {
            auto t = labels_[v];
            --at(r, t);
            --at(t, r);
            ++at(s, t);
            ++at(t, s);
        }
        total_[r] -= k;
        total_[s] += k;
        if (--size_[r] == 0) --nonempty_;
        if (size_[s]++ == 0) ++nonempty_;
        labels_[u] = s;
    }

    double merge_delta(std::uint32_t r, std::uint32_t s) const {
        double dA = 0;
        for (std::size_t t = 0; t < cap_; ++t) {
            if (t == r || t == s) continue;
            auto a = at(r, t), b = at(s, t);
            if (a == 0 || b == 0) continue;  // xlogx is additive when one side is zero
            dA += xlogx(double(a + b)) - xlogx(double(a)) - xlogx(double(b));
        }
        const auto rr = at(r, r), ss = at(s, s), rs = at(r, s);
        dA += 0.5 * (xlogx(double(rr + ss + 2 * rs)) - xlogx(double(rr)) - xlogx(double(ss))) - xlogx(double(rs));
        const double dE = xlogx(double(total_[r] + total_[s])) - xlogx(double(total_[r])) - xlogx(double(total_[s]));
        const double dP = dl_penalty(nonempty_ - 1, g_.n(), g_.m()) - dl_penalty(nonempty_, g_.n(), g_.m());
        return dE - dA + dP;
    }

    /// Move every node of block s into block r.
    void merge(std::uint32_t r, std::uint32_t s) {
        for (std::size_t t = 0; t < cap_; ++t) {
            if (t == r || t == s) continue;
            at(r, t) += at(s, t);
            at(t, r) = at(r, t);
            at(s, t) = at(t, s) = 0;
        }
        at(r, r) += at(s, s) + 2 * at(r, s);
        at(s, s) = at(r, s) = at(s, r) = 0;
        total_[r] += total_[s];
        total_[s] = 0;
        size_[r] += size_[s];
        size_[s] = 0;
        --nonempty_;
        for (auto& b : labels_)
            if (b == s) b = r;
    }

    std::vector<std::uint32_t> nonempty_blocks() const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t r = 0; r < cap_; ++r)
            if (size_[r] > 0) out.push_back(r);
        return out;
    }

private:
    std::int64_t& at(std::size_t r, std::size_t s) { return e_[r * cap_ + s]; }
    std::int64_t at(std::size_t r, std::size_t s) const { return e_[r * cap_ + s]; }

    double move_delta(Node u, std::uint32_t r, std::uint32_t s) const {
        const auto k = static_cast<std::int64_t>(g_.degree(u));
        double dA = 0;
        for (auto t : touched_) {
            if (t == r || t == s) continue;
            auto c = scratch_[t];
            dA += xlogx(double(at(r, t) - c)) - xlogx(double(at(r, t)));
            dA += xlogx(double(at(s, t) + c)) - xlogx(double(at(s, t)));
        }
        const auto cr = scratch_[r], cs = scratch_[s];
        dA += xlogx(double(at(r, s) + cr - cs)) - xlogx(double(at(r, s)));
        dA += 0.5 * (xlogx(double(at(r, r) - 2 * cr)) - xlogx(double(at(r, r))));
        dA += 0.5 * (xlogx(double(at(s, s) + 2 * cs)) - xlogx(double(at(s, s))));
        const double dE = xlogx(double(total_[r] - k)) - xlogx(double(total_[r])) + xlogx(double(total_[s] + k)) -
                          xlogx(double(total_[s]));
        double dP = 0;
        if (size_[r] == 1) dP = dl_penalty(nonempty_ - 1, g_.n(), g_.m()) - dl_penalty(nonempty_, g_.n(), g_.m());
        return dE - dA + dP;
    }

    const SimpleGraph& g_;
    std::vector<std::uint32_t> labels_;
    std::size_t cap_;
    std::vector<std::int64_t> e_;
    std::vector<std::int64_t> total_;
    std::vector<std::size_t> size_;
    std::vector<std::int64_t> scratch_;  // neighbor count per block for the node under evaluation
    std::vector<std::uint32_t> touched_;
    std::size_t nonempty_ = 0;
};

/// Renumber labels to 0..B-1 in order of first appearance.
inline std::vector<std::uint32_t> compact_labels(std::span<const std::uint32_t> labels) {
    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> map;
    std::vector<std::uint32_t> out(labels.size());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto b = labels[i];
        if (b >= map.size()) map.resize(b + 1, unset);
        if (map[b] == unset) map[b] = next++;
        out[i] = map[b];
    }
    return out;
}

}  // namespace detail

/// Description length of a partition; lower is better.
///
/// Karrer-Newman degree-corrected log-likelihood plus a parameter penalty of
/// B(B+1)/2 ln m for the block matrix and n ln B for the labels. B counts the
/// distinct labels in use. Undefined when the graph has no edges.
inline std::optional<double> description_length(const SimpleGraph& g, std::span<const std::uint32_t> labels) {
    if (labels.size() != g.n()) throw ParameterError("label count does not match node count");
    if (g.m() == 0) return std::nullopt;
    auto compact = detail::compact_labels(labels);
    std::size_t B = 0;
    for (auto b : compact) B = std::max<std::size_t>(B, b + 1);
    return detail::PartitionState(g, std::move(compact), B).description_length();
}

struct InferenceRun {
    BlockModelParams params;
    double description_length = 0.0;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
};

struct InferenceOptions {
    /// Initial number of random blocks; ceil(sqrt(n)) when unset.
    std::optional<std::size_t> initial_blocks;
    std::size_t max_sweeps = 1000;
};

/// Greedy description-length minimization.
///
/// Starts from a uniformly random assignment to B0 blocks, then alternates
/// best-improvement single-node moves (to blocks of a neighbor) until a full
/// sweep makes no move, with best-pair block merges accepted while they lower
/// the description length. Stops when a merge phase changes nothing, so the
/// result is a local minimum under single-node moves.
inline InferenceRun infer_partition(const SimpleGraph& g, std::uint64_t seed, const InferenceOptions& opts = {}) {
    if (g.m() == 0) throw ParameterError("partition inference needs at least one edge");
    const std::size_t n = g.n();
    std::size_t B0 = opts.initial_blocks.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
    B0 = std::clamp<std::size_t>(B0, 1, n);

    Rng rng(seed);
    std::vector<std::uint32_t> labels(n);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(B0 - 1));
    for (auto& b : labels) b = pick(rng);
    detail::PartitionState state(g, std::move(labels), B0);

    constexpr double tol = 1e-9;
    std::vector<Node> order(n);
    std::iota(order.begin(), order.end(), Node{0});

    for (;;) {
        for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            std::shuffle(order.begin(), order.end(), rng);
            bool moved = false;
            for (Node u : order) {
                auto [delta, target] = state.best_move(u);
                if (target != state.labels()[u] && delta < -tol) {
                    state.move(u, target);
                    moved = true;
                }
            }
            if (!moved) break;
        }

        bool merged = false;
        while (state.blocks() > 1) {
            auto live = state.nonempty_blocks();
            double best = 0;
            std::pair<std::uint32_t, std::uint32_t> pair{0, 0};
            for (std::size_t i = 0; i < live.size(); ++i)
                for (std::size_t j = i + 1; j < live.size(); ++j) {
                    double d = state.merge_delta(live[i], live[j]);
                    if (d < best) {
                        best = d;
                        pair = {live[i], live[j]};
                    }
                }
            if (best >= -tol) break;
            state.merge(pair.first, pair.second);
            merged = true;
        }
        if (!merged) break;
    }

    InferenceRun run;
    run.seed = seed;
    auto compact = detail::compact_labels(state.labels());
    run.params = block_params_from_graph(g, compact);
    run.description_length = *description_length(g, compact);
    run.params.description_length = run.description_length;
    return run;
}

enum class PosteriorWeighting {
    inverse_dl,  // w_i proportional to 1 / DL_i
    boltzmann,   // w_i proportional to exp(-(DL_i - min DL))
};

/// Normalized selection probabilities for a set of description lengths.
inline std::vector<double> selection_weights(std::span<const double> dls, PosteriorWeighting mode) {
    std::vector<double> w(dls.size());
    if (dls.empty()) return w;
    if (mode == PosteriorWeighting::inverse_dl) {
        for (std::size_t i = 0; i < dls.size(); ++i) {
            if (!(dls[i] > 0)) throw ParameterError("inverse weighting needs positive description lengths");
            w[i] = 1.0 / dls[i];
        }
    } else {
        double lo = *std::min_element(dls.begin(), dls.end());
        for (std::size_t i = 0; i < dls.size(); ++i) w[i] = std::exp(-(dls[i] - lo));
    }
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    return w;
}

struct PosteriorSample {
    std::vector<InferenceRun> runs;
    std::vector<std::size_t> selected;  // indices into runs, in draw order

    std::vector<BlockModelParams> parameter_sets() const {
        std::vector<BlockModelParams> out;
        out.reserve(selected.size());
        for (auto i : selected) out.push_back(runs[i].params);
        return out;
    }
};

/// Run the inference `runs` times with derived seeds, then draw `samples`
/// parameter sets with replacement weighted by description length.
inline PosteriorSample sample_parameter_sets(const SimpleGraph& g, std::size_t runs, std::size_t samples,
                                             std::uint64_t seed,
                                             PosteriorWeighting weighting = PosteriorWeighting::inverse_dl,
                                             unsigned threads = 1, const InferenceOptions& opts = {}) {
    if (runs == 0 || samples == 0) throw ParameterError("runs and samples must be positive");
    PosteriorSample out;
    out.runs.resize(runs);
    detail::parallel_for(runs, threads, [&](std::size_t r, unsigned) {
        auto run_seed = derive_seed(seed, "sbm-run", r);
        out.runs[r] = infer_partition(g, run_seed, opts);
        out.runs[r].run_index = r;
    });
    std::vector<double> dls(runs);
    for (std::size_t r = 0; r < runs; ++r) dls[r] = out.runs[r].description_length;
    auto w = selection_weights(dls, weighting);
    Rng rng(derive_seed(seed, "sbm-select"));
    std::discrete_distribution<std::size_t> draw(w.begin(), w.end());
    out.selected.resize(samples);
    for (auto& s : out.selected) s = draw(rng);
    return out;
}

}  // namespace netscale
