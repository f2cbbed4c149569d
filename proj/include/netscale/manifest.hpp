#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "netscale/detail/format.hpp"
#include "netscale/edge_list.hpp"
#include "netscale/error.hpp"

namespace netscale {

inline constexpr std::array<std::string_view, 4> known_domains{"social", "biological", "informational", "technological"};

struct ManifestEntry {
    std::string id;
    std::string path;  // as written in the manifest
    std::string domain;
    std::optional<std::string> subdomain;
    bool directed = false;
    bool weighted = false;
    bool multigraph = false;
    std::optional<std::size_t> nodes;  // pads isolated nodes absent from the edge list
    std::optional<char> delimiter;     // whitespace when unset

    ParseOptions parse_options() const {
        ParseOptions opts;
        opts.delimiter = delimiter;
        opts.weights_expected = weighted;
        opts.directed = directed;
        return opts;
    }
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
    /// Directory that relative entry paths are resolved against.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const ManifestEntry& e) const {
        std::filesystem::path p(e.path);
        return p.is_absolute() ? p : base_dir / p;
    }
};

namespace detail {

inline bool parse_flag(std::string_view s, std::string_view column, std::size_t row) {
    std::string v(trim(s));
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v.empty() || v == "0" || v == "false" || v == "no") return false;
    if (v == "1" || v == "true" || v == "yes") return true;
    throw ManifestError("row " + std::to_string(row) + ": column '" + std::string(column) + "' is not a boolean: '" +
                        std::string(s) + "'");
}

inline std::optional<char> parse_delimiter(std::string_view s, std::size_t row) {
    if (s.empty()) return std::nullopt;
    if (s == "\\t" || s == "tab") return '\t';
    if (s == "space" || s == "whitespace") return std::nullopt;
    if (s.size() == 1) return s[0];
    throw ManifestError("row " + std::to_string(row) + ": delimiter must be a single character");
}

}  // namespace detail

/// Throws ManifestError on duplicate or empty ids, empty paths, or unknown domains.
inline void validate(const CorpusManifest& m) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto& e = m.entries[i];
        const std::string where = "entry " + std::to_string(i + 1);
        if (e.id.empty()) throw ManifestError(where + ": empty id");
        if (!seen.insert(e.id).second) throw ManifestError(where + ": duplicate id '" + e.id + "'");
        if (e.path.empty()) throw ManifestError(where + " ('" + e.id + "'): empty path");
        if (std::find(known_domains.begin(), known_domains.end(), e.domain) == known_domains.end())
            throw ManifestError(where + " ('" + e.id + "'): domain '" + e.domain +
                                "' is not one of social, biological, informational, technological");
        if (e.subdomain && e.subdomain->find('/') != std::string::npos)
            throw ManifestError(where + " ('" + e.id + "'): sub-domain may not contain '/'");
    }
}

/// CSV with a header row. Required columns: id, path, domain. Optional:
/// subdomain, directed, weighted, multigraph, nodes, delimiter. Unknown
/// columns are ignored.
inline CorpusManifest parse_manifest_csv(std::istream& in, const std::filesystem::path& base_dir) {
    CorpusManifest m;
    m.base_dir = base_dir;
    std::vector<std::string> header, row;
    if (!detail::read_csv_record(in, header)) return m;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[std::string(detail::trim(header[i]))] = i;
    for (const char* required : {"id", "path", "domain"})
        if (!col.count(required)) throw ManifestError(std::string("manifest is missing the '") + required + "' column");

    std::size_t rowno = 1;
    while (detail::read_csv_record(in, row)) {
        ++rowno;
        if (row.size() == 1 && detail::trim(row[0]).empty()) continue;
        auto get = [&](const char* name) -> std::string {
            auto it = col.find(name);
            if (it == col.end() || it->second >= row.size()) return {};
            return std::string(detail::trim(row[it->second]));
        };
        ManifestEntry e;
        e.id = get("id");
        e.path = get("path");
        e.domain = get("domain");
        if (auto s = get("subdomain"); !s.empty()) e.subdomain = s;
        e.directed = detail::parse_flag(get("directed"), "directed", rowno);
        e.weighted = detail::parse_flag(get("weighted"), "weighted", rowno);
        e.multigraph = detail::parse_flag(get("multigraph"), "multigraph", rowno);
        if (auto s = get("nodes"); !s.empty()) {
            auto v = detail::parse_double(s);
            if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v)))
                throw ManifestError("row " + std::to_string(rowno) + ": 'nodes' must be a non-negative integer");
            e.nodes = static_cast<std::size_t>(*v);
        }
        auto it = col.find("delimiter");
        if (it != col.end() && it->second < row.size()) e.delimiter = detail::parse_delimiter(row[it->second], rowno);
        m.entries.push_back(std::move(e));
    }
    validate(m);
    return m;
}

/// JSON: either an array of entry objects or {"networks": [...]}, with the
/// same field names as the CSV columns.
inline CorpusManifest parse_manifest_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    CorpusManifest m;
    m.base_dir = base_dir;
    const auto& list = j.is_object() ? j.at("networks") : j;
    if (!list.is_array()) throw ManifestError("manifest JSON must be an array of entries");
    std::size_t rowno = 0;
    for (const auto& item : list) {
        ++rowno;
        ManifestEntry e;
        try {
            e.id = item.at("id").get<std::string>();
            e.path = item.at("path").get<std::string>();
            e.domain = item.at("domain").get<std::string>();
            if (item.contains("subdomain") && !item["subdomain"].is_null()) {
                auto s = item["subdomain"].get<std::string>();
                if (!s.empty()) e.subdomain = s;
            }
            e.directed = item.value("directed", false);
            e.weighted = item.value("weighted", false);
            e.multigraph = item.value("multigraph", false);
            if (item.contains("nodes") && !item["nodes"].is_null()) e.nodes = item["nodes"].get<std::size_t>();
            if (item.contains("delimiter") && !item["delimiter"].is_null())
                e.delimiter = detail::parse_delimiter(item["delimiter"].get<std::string>(), rowno);
        } catch (const nlohmann::json::exception& ex) {
            throw ManifestError("entry " + std::to_string(rowno) + ": " + ex.what());
        }
        m.entries.push_back(std::move(e));
    }
    validate(m);
    return m;
}

/// Load a manifest; `.json` files are read as JSON, anything else as CSV.
inline CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest '" + path.string() + "'");
    auto base = path.parent_path();
    if (path.extension() == ".json") {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& ex) {
            throw ManifestError("manifest '" + path.string() + "': " + ex.what());
        }
        return parse_manifest_json(j, base);
    }
    return parse_manifest_csv(in, base);
}

inline std::string manifest_csv_header() { return "id,path,domain,subdomain,directed,weighted,multigraph,nodes,delimiter"; }

/// Serialize without validation, so stubs with blank domains can be written.
inline void write_manifest_csv(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    out << manifest_csv_header() << '\n';
    for (const auto& e : entries) {
        std::string delim;
        if (e.delimiter) delim = *e.delimiter == '\t' ? "\\t" : std::string(1, *e.delimiter);
        out << detail::csv_field(e.id) << ',' << detail::csv_field(e.path) << ',' << detail::csv_field(e.domain) << ','
            << detail::csv_field(e.subdomain.value_or("")) << ',' << (e.directed ? "true" : "false") << ','
            << (e.weighted ? "true" : "false") << ',' << (e.multigraph ? "true" : "false") << ','
            << (e.nodes ? std::to_string(*e.nodes) : "") << ',' << detail::csv_field(delim) << '\n';
    }
}

inline nlohmann::ordered_json to_json(const ManifestEntry& e) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["path"] = e.path;
    j["domain"] = e.domain;
    j["subdomain"] = e.subdomain ? nlohmann::ordered_json(*e.subdomain) : nlohmann::ordered_json(nullptr);
    j["directed"] = e.directed;
    j["weighted"] = e.weighted;
    j["multigraph"] = e.multigraph;
    j["nodes"] = e.nodes ? nlohmann::ordered_json(*e.nodes) : nlohmann::ordered_json(nullptr);
    j["delimiter"] = e.delimiter ? nlohmann::ordered_json(std::string(1, *e.delimiter)) : nlohmann::ordered_json(nullptr);
    return j;
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::ordered_json& j) {
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.path = j.at("path").get<std::string>();
    e.domain = j.at("domain").get<std::string>();
    if (!j.at("subdomain").is_null()) e.subdomain = j.at("subdomain").get<std::string>();
    e.directed = j.value("directed", false);
    e.weighted = j.value("weighted", false);
    e.multigraph = j.value("multigraph", false);
    if (j.contains("nodes") && !j.at("nodes").is_null()) e.nodes = j.at("nodes").get<std::size_t>();
    if (j.contains("delimiter") && !j.at("delimiter").is_null()) e.delimiter = j.at("delimiter").get<std::string>().at(0);
    return e;
}

}  // namespace netscale
