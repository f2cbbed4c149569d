#pragma once

#include <zlib.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <streambuf>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netscale/detail/format.hpp"
#include "netscale/error.hpp"
#include "netscale/graph.hpp"

namespace netscale {

struct RawEdge {
    std::string source;
    std::string target;
    std::optional<double> weight;
};

/// Edge records exactly as read, before simplification. Duplicates and
/// self-loops are allowed here.
struct RawEdgeList {
    std::vector<RawEdge> edges;
    bool directed = false;
    /// If larger than the number of distinct labels, simplify() pads the
    /// graph with isolated nodes up to this count.
    std::optional<std::size_t> node_count_hint;
    /// Labels registered before any edge, in order; retained even if isolated.
    std::vector<std::string> declared_nodes;
};

struct ParseOptions {
    /// Field separator; whitespace when unset.
    std::optional<char> delimiter;
    /// Require the third column to be numeric when present.
    bool weights_expected = false;
    bool directed = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line, std::optional<char> delimiter) {
    std::vector<std::string_view> out;
    if (delimiter) {
        std::size_t start = 0;
        for (;;) {
            auto pos = line.find(*delimiter, start);
            auto tok = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (!tok.empty()) out.push_back(tok);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        return out;
    }
    constexpr std::string_view ws = " \t\r\n\v\f";
    std::size_t i = 0;
    while (i < line.size()) {
        i = line.find_first_not_of(ws, i);
        if (i == std::string_view::npos) break;
        auto j = line.find_first_of(ws, i);
        if (j == std::string_view::npos) j = line.size();
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Read-only streambuf over a gzip file; plain files pass through zlib untouched.
class GzStreamBuf : public std::streambuf {
public:
    explicit GzStreamBuf(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {}
    ~GzStreamBuf() override {
        if (file_) gzclose(file_);
    }
    GzStreamBuf(const GzStreamBuf&) = delete;
    GzStreamBuf& operator=(const GzStreamBuf&) = delete;

    bool is_open() const noexcept { return file_ != nullptr; }

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        int got = gzread(file_, buffer_, sizeof buffer_);
        if (got <= 0) return traits_type::eof();
        setg(buffer_, buffer_, buffer_ + got);
        return traits_type::to_int_type(*gptr());
    }

private:
    gzFile file_;
    char buffer_[1 << 16];
};

}  // namespace detail

/// Parse a whitespace- or delimiter-separated edge list.
///
/// Blank lines and lines whose first non-blank character is '#' or '%' are
/// skipped. Each remaining line needs at least two tokens (source, target);
/// an optional third numeric token is kept as the edge weight. Extra columns
/// are ignored.
inline RawEdgeList parse_edge_list(std::istream& in, const ParseOptions& opts = {}) {
    RawEdgeList raw;
    raw.directed = opts.directed;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = detail::trim(line);
        if (body.empty() || body.front() == '#' || body.front() == '%') continue;
        auto fields = detail::split_fields(body, opts.delimiter);
        if (fields.size() < 2) throw ParseError(lineno, "expected at least two tokens, found " + std::to_string(fields.size()));
        RawEdge e{std::string(fields[0]), std::string(fields[1]), std::nullopt};
        if (fields.size() >= 3) {
            e.weight = detail::parse_double(fields[2]);
            if (!e.weight && opts.weights_expected)
                throw ParseError(lineno, "non-numeric weight '" + std::string(fields[2]) + "'");
        }
        raw.edges.push_back(std::move(e));
    }
    return raw;
}

/// Read an edge list from disk. Gzip-compressed files are detected and
/// decompressed transparently.
inline RawEdgeList read_edge_list(const std::string& path, const ParseOptions& opts = {}) {
    detail::GzStreamBuf buf(path);
    if (!buf.is_open()) throw Error("cannot open '" + path + "'");
    std::istream in(&buf);
    return parse_edge_list(in, opts);
}

struct SimplifyReport {
    std::size_t raw_edges = 0;
    std::size_t self_loops_removed = 0;
    std::size_t duplicate_edges_collapsed = 0;
    /// Edges whose weight was present and not an integer; weights are discarded regardless.
    std::size_t fractional_weight_edges = 0;
    /// Degree-0 nodes whose only appearance in the input was a self-loop.
    std::size_t loop_only_nodes = 0;
    std::size_t padded_nodes = 0;
};

/// Drop direction and weights, collapse multi-edges, remove self-loops.
///
/// Labels are compacted to 0..n-1 in first-appearance order (declared nodes
/// first, then source before target per edge). The resulting graph keeps the
/// label of every index.
inline SimpleGraph simplify(const RawEdgeList& raw, SimplifyReport* report = nullptr) {
    std::unordered_map<std::string, Node> index;
    std::vector<std::string> labels;
    auto intern = [&](const std::string& label) {
        auto [it, inserted] = index.try_emplace(label, static_cast<Node>(labels.size()));
        if (inserted) labels.push_back(label);
        return it->second;
    };
    for (const auto& label : raw.declared_nodes) intern(label);

    SimplifyReport rep;
    rep.raw_edges = raw.edges.size();
    std::vector<Edge> pairs;
    pairs.reserve(raw.edges.size());
    std::vector<Node> loop_nodes;
    for (const auto& e : raw.edges) {
        Node u = intern(e.source);
        Node v = intern(e.target);
        if (e.weight && std::floor(*e.weight) != *e.weight) ++rep.fractional_weight_edges;
        if (u == v) {
            ++rep.self_loops_removed;
            loop_nodes.push_back(u);
            continue;
        }
        pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
    if (raw.node_count_hint && *raw.node_count_hint > labels.size()) {
        std::size_t k = 0;
        while (labels.size() < *raw.node_count_hint) {
            std::string synthetic = "_isolated_" + std::to_string(k++);
            if (index.count(synthetic)) continue;
            intern(synthetic);
            ++rep.padded_nodes;
        }
    }

    std::size_t n = labels.size();
    auto g = SimpleGraph::from_edges(n, pairs, std::move(labels));
    rep.duplicate_edges_collapsed = pairs.size() - g.m();
    std::sort(loop_nodes.begin(), loop_nodes.end());
    loop_nodes.erase(std::unique(loop_nodes.begin(), loop_nodes.end()), loop_nodes.end());
    for (Node u : loop_nodes)
        if (g.degree(u) == 0) ++rep.loop_only_nodes;
    if (report) *report = rep;
    return g;
}

/// Inverse view of a simple graph: every node declared in index order, every
/// edge once. simplify(to_raw(g)) == g.
inline RawEdgeList to_raw(const SimpleGraph& g) {
    RawEdgeList raw;
    raw.declared_nodes.reserve(g.n());
    for (Node i = 0; i < g.n(); ++i) raw.declared_nodes.push_back(g.label(i));
    for (auto [u, v] : g.edges()) raw.edges.push_back({g.label(u), g.label(v), std::nullopt});
    return raw;
}

/// One "u v" line per edge, using dense indices.
inline void write_edge_list(std::ostream& out, const SimpleGraph& g) {
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

/// Two-column "index label" text.
inline void write_label_map(std::ostream& out, const SimpleGraph& g) {
    for (Node i = 0; i < g.n(); ++i) out << i << ' ' << g.label(i) << '\n';
}

}  // namespace netscale
