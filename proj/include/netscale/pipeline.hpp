#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "netscale/detail/format.hpp"
#include "netscale/detail/parallel.hpp"
#include "netscale/detail/random.hpp"
#include "netscale/edge_list.hpp"
#include "netscale/error.hpp"
#include "netscale/geodesic_estimator.hpp"
#include "netscale/manifest.hpp"
#include "netscale/measures.hpp"
#include "netscale/null_expectation.hpp"
#include "netscale/scaling_fit.hpp"
#include "netscale/sbm_inference.hpp"
#include "netscale/version.hpp"

namespace netscale {

enum class GroupBy { domain, subdomain };

inline std::string_view to_string(GroupBy g) noexcept { return g == GroupBy::domain ? "domain" : "subdomain"; }

inline GroupBy parse_group_by(std::string_view s) {
    if (s == "domain") return GroupBy::domain;
    if (s == "subdomain") return GroupBy::subdomain;
    throw ParameterError("group-by must be 'domain' or 'subdomain', got '" + std::string(s) + "'");
}

/// The four fitted measures in table order, with the functional form each is fitted with.
inline constexpr std::array<std::string_view, 4> fitted_measures{"mean_degree", "mean_geodesic", "clustering",
                                                                 "assortativity"};

inline FitForm fit_form_for(std::string_view measure) {
    if (measure == "mean_degree" || measure == "clustering") return FitForm::power_law;
    if (measure == "mean_geodesic" || measure == "assortativity") return FitForm::logarithmic;
    throw ParameterError("unknown measure '" + std::string(measure) + "'");
}

struct RunConfig {
    std::vector<NullModel> models{NullModel::gnm, NullModel::config, NullModel::dcsbm};
    NullModelConfig null;  // ensemble size, generator and estimator settings
    GroupBy group_by = GroupBy::domain;
    std::uint64_t seed = 0;
    /// Empirical mean geodesic is computed exactly up to this many nodes and estimated above it.
    std::size_t exact_path_cutoff = 20000;
    std::size_t bootstrap_resamples = 10000;
    unsigned threads = detail::default_threads();
};

inline void validate(const RunConfig& cfg) {
    if (cfg.null.samples == 0) throw ParameterError("ensemble size must be at least 1");
    if (cfg.null.swaps_per_edge == 0) throw ParameterError("swaps per edge must be at least 1");
    if (cfg.null.estimator.batch_size == 0 || cfg.null.estimator.batch_size % 2 != 0)
        throw ParameterError("batch size must be positive and even");
    if (!(cfg.null.estimator.threshold > 0)) throw ParameterError("threshold must be positive");
    if (cfg.null.estimator.max_batches == 0) throw ParameterError("max batches must be positive");
    for (auto m : cfg.models)
        if (needs_block_model(m) && cfg.null.sbm_runs == 0) throw ParameterError("block models need at least one inference run");
    std::set<NullModel> unique(cfg.models.begin(), cfg.models.end());
    if (unique.size() != cfg.models.size()) throw ParameterError("a null model is listed twice");
}

struct NetworkResult {
    ManifestEntry entry;
    SimplifyReport simplify;
    MeasureRecord measures;
    std::vector<NullEnsemble> nulls;  // same order as RunConfig::models
    std::optional<double> best_description_length;
    std::optional<std::size_t> best_blocks;

    const NullEnsemble* null_for(std::string_view model) const {
        for (auto& e : nulls)
            if (to_string(e.model) == model) return &e;
        return nullptr;
    }
};

struct NetworkFailure {
    std::string id;
    std::string path;
    std::string stage;
    std::string message;
};

struct FitRecord {
    std::string group;
    std::string series;  // "empirical" or a null model name
    std::string measure;
    FitForm form = FitForm::power_law;
    std::optional<ScalingFit> fit;
    std::string error;  // set when the fit could not be computed
};

struct ResultBundle {
    RunConfig config;
    std::vector<NetworkResult> networks;  // manifest order, successes only
    std::vector<NetworkFailure> failures; // manifest order
    std::vector<FitRecord> fits;

    bool ok() const noexcept { return failures.empty(); }
};

inline std::string group_of(const ManifestEntry& e, GroupBy by) {
    if (by == GroupBy::subdomain && e.subdomain) return e.domain + "/" + *e.subdomain;
    return e.domain;
}

inline std::optional<double> measure_value(const MeasureRecord& r, std::string_view measure) {
    if (measure == "mean_degree") return r.mean_degree;
    if (measure == "mean_geodesic") return r.mean_geodesic;
    if (measure == "clustering") return r.clustering;
    if (measure == "assortativity") return r.assortativity;
    throw ParameterError("unknown measure '" + std::string(measure) + "'");
}

/// Value of `measure` for one series of a network; empty when undefined or not computed.
inline std::optional<double> series_value(const NetworkResult& r, std::string_view series, std::string_view measure) {
    if (series == "empirical") return measure_value(r.measures, measure);
    const auto* ens = r.null_for(series);
    if (!ens) return std::nullopt;
    for (auto& e : ens->expectations)
        if (e.measure == measure) return e.expected;
    return std::nullopt;
}

/// Measures of one simplified network: exact path length up to the cutoff, estimated above it.
inline MeasureRecord empirical_measures(const SimpleGraph& g, std::string_view id, const RunConfig& cfg, unsigned threads) {
    MeasureRecord rec;
    rec.n = g.n();
    rec.m = g.m();
    if (g.n() > 0) rec.mean_degree = mean_degree(g);
    if (g.n() <= cfg.exact_path_cutoff) {
        rec.mean_geodesic = mean_geodesic_exact(g, threads);
    } else {
        auto est_cfg = cfg.null.estimator;
        est_cfg.seed = derive_seed(cfg.seed, id, "empirical-geodesic");
        est_cfg.threads = threads;
        auto est = estimate_mean_geodesic(g, est_cfg);
        rec.mean_geodesic = est.value;
        rec.geodesic_method = "estimate";
        rec.seed = est_cfg.seed;
        rec.batches_used = est.batches_used;
        rec.converged = est.converged;
    }
    rec.clustering = global_clustering(g);
    rec.assortativity = degree_assortativity(g);
    return rec;
}

namespace detail {

inline std::vector<std::string> series_names(const RunConfig& cfg) {
    std::vector<std::string> out{"empirical"};
    for (auto m : cfg.models) out.emplace_back(to_string(m));
    return out;
}

}  // namespace detail

/// OLS fits per group, series and measure. Null-model series skip mean degree,
/// which every model fixes. Fits that cannot be computed are recorded with an error.
inline std::vector<FitRecord> fit_groups(const std::vector<NetworkResult>& networks, const RunConfig& cfg) {
    std::map<std::string, std::vector<const NetworkResult*>> groups;
    for (auto& r : networks) groups[group_of(r.entry, cfg.group_by)].push_back(&r);

    std::vector<FitRecord> out;
    for (auto& [group, members] : groups) {
        for (auto& series : detail::series_names(cfg)) {
            for (auto measure : fitted_measures) {
                if (series != "empirical" && measure == "mean_degree") continue;
                FitRecord rec;
                rec.group = group;
                rec.series = series;
                rec.measure = std::string(measure);
                rec.form = fit_form_for(measure);
                std::vector<FitPoint> points;
                for (auto* r : members) points.push_back({static_cast<double>(r->measures.n), series_value(*r, series, measure)});
                try {
                    rec.fit = fit_with_bootstrap(points, rec.form, cfg.bootstrap_resamples,
                                                 derive_seed(cfg.seed, "fit", group, series, measure));
                } catch (const Error& e) {
                    rec.error = e.what();
                }
                out.push_back(std::move(rec));
            }
        }
    }
    return out;
}

/// Process one manifest entry end to end. Throws on any failure; `stage` names the step reached.
inline NetworkResult process_network(const CorpusManifest& manifest, const ManifestEntry& entry, const RunConfig& cfg,
                                     unsigned threads, std::string& stage) {
    NetworkResult result;
    result.entry = entry;

    stage = "read";
    auto raw = read_edge_list(manifest.resolve(entry).string(), entry.parse_options());
    raw.node_count_hint = entry.nodes;
    stage = "simplify";
    auto g = simplify(raw, &result.simplify);
    raw = RawEdgeList{};
    if (g.n() == 0) throw Error("network has no nodes");

    stage = "measures";
    result.measures = empirical_measures(g, entry.id, cfg, threads);

    auto null_cfg = cfg.null;
    null_cfg.threads = threads;
    std::optional<PosteriorSample> posterior;
    const bool block_models = std::any_of(cfg.models.begin(), cfg.models.end(), needs_block_model);
    if (block_models) {
        stage = "sbm-inference";
        if (g.m() == 0) throw ParameterError("block models need at least one edge");
        posterior = sample_parameter_sets(g, null_cfg.sbm_runs, null_cfg.samples, derive_seed(cfg.seed, entry.id, "sbm"),
                                          null_cfg.weighting, threads, null_cfg.inference);
        auto best = std::min_element(posterior->runs.begin(), posterior->runs.end(),
                                     [](auto& a, auto& b) { return a.description_length < b.description_length; });
        result.best_description_length = best->description_length;
        result.best_blocks = best->params.num_blocks();
    }
    for (auto model : cfg.models) {
        stage = "null:" + std::string(to_string(model));
        result.nulls.push_back(null_expectation(g, entry.id, model, null_cfg, all_null_measures, cfg.seed,
                                                posterior ? &*posterior : nullptr));
    }
    stage = "done";
    return result;
}

/// Run the full protocol over a manifest. Per-network failures are recorded
/// and never abort the run. The bundle depends only on (manifest, config),
/// not on thread count or scheduling.
inline ResultBundle run_corpus(const CorpusManifest& manifest, const RunConfig& cfg) {
    validate(cfg);
    validate(manifest);
    const std::size_t count = manifest.entries.size();
    std::vector<std::optional<NetworkResult>> results(count);
    std::vector<std::optional<NetworkFailure>> failures(count);

    const unsigned threads = std::max(1u, cfg.threads);
    const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    const unsigned inner = std::max(1u, threads / outer);
    detail::parallel_for(count, outer, [&](std::size_t i, unsigned) {
        const auto& entry = manifest.entries[i];
        std::string stage;
        try {
            results[i] = process_network(manifest, entry, cfg, inner, stage);
        } catch (const std::exception& e) {
            failures[i] = NetworkFailure{entry.id, entry.path, stage, e.what()};
        }
    });

    ResultBundle bundle;
    bundle.config = cfg;
    for (std::size_t i = 0; i < count; ++i) {
        if (results[i]) bundle.networks.push_back(std::move(*results[i]));
        if (failures[i]) bundle.failures.push_back(std::move(*failures[i]));
    }
    bundle.fits = fit_groups(bundle.networks, cfg);
    return bundle;
}

// Serialization.

namespace detail {

inline nlohmann::ordered_json optional_json(const std::optional<double>& x) {
    return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> optional_double(const nlohmann::ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const SimplifyReport& r) {
    nlohmann::ordered_json j;
    j["raw_edges"] = r.raw_edges;
    j["self_loops_removed"] = r.self_loops_removed;
    j["duplicate_edges_collapsed"] = r.duplicate_edges_collapsed;
    j["fractional_weight_edges"] = r.fractional_weight_edges;
    j["loop_only_nodes"] = r.loop_only_nodes;
    j["padded_nodes"] = r.padded_nodes;
    return j;
}

inline SimplifyReport simplify_report_from_json(const nlohmann::ordered_json& j) {
    SimplifyReport r;
    r.raw_edges = j.value("raw_edges", std::size_t{0});
    r.self_loops_removed = j.value("self_loops_removed", std::size_t{0});
    r.duplicate_edges_collapsed = j.value("duplicate_edges_collapsed", std::size_t{0});
    r.fractional_weight_edges = j.value("fractional_weight_edges", std::size_t{0});
    r.loop_only_nodes = j.value("loop_only_nodes", std::size_t{0});
    r.padded_nodes = j.value("padded_nodes", std::size_t{0});
    return r;
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    auto models = nlohmann::ordered_json::array();
    for (auto m : cfg.models) models.push_back(std::string(to_string(m)));
    j["models"] = std::move(models);
    j["samples"] = cfg.null.samples;
    j["swaps_per_edge"] = cfg.null.swaps_per_edge;
    j["max_repair_attempts"] = cfg.null.max_repair_attempts;
    j["sbm_runs"] = cfg.null.sbm_runs;
    j["posterior_weighting"] = cfg.null.weighting == PosteriorWeighting::inverse_dl ? "inverse-dl" : "boltzmann";
    j["sbm_initial_blocks"] = cfg.null.inference.initial_blocks ? nlohmann::ordered_json(*cfg.null.inference.initial_blocks)
                                                                : nlohmann::ordered_json(nullptr);
    j["sbm_max_sweeps"] = cfg.null.inference.max_sweeps;
    j["batch_size"] = cfg.null.estimator.batch_size;
    j["threshold"] = cfg.null.estimator.threshold;
    j["max_batches"] = cfg.null.estimator.max_batches;
    j["group_by"] = std::string(to_string(cfg.group_by));
    j["seed"] = cfg.seed;
    j["exact_path_cutoff"] = cfg.exact_path_cutoff;
    j["bootstrap_resamples"] = cfg.bootstrap_resamples;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
    RunConfig cfg;
    cfg.models.clear();
    for (auto& m : j.at("models")) cfg.models.push_back(parse_null_model(m.get<std::string>()));
    cfg.null.samples = j.at("samples").get<std::size_t>();
    cfg.null.swaps_per_edge = j.at("swaps_per_edge").get<std::size_t>();
    cfg.null.max_repair_attempts = j.at("max_repair_attempts").get<std::size_t>();
    cfg.null.sbm_runs = j.at("sbm_runs").get<std::size_t>();
    cfg.null.weighting =
        j.at("posterior_weighting").get<std::string>() == "boltzmann" ? PosteriorWeighting::boltzmann : PosteriorWeighting::inverse_dl;
    if (!j.at("sbm_initial_blocks").is_null()) cfg.null.inference.initial_blocks = j.at("sbm_initial_blocks").get<std::size_t>();
    cfg.null.inference.max_sweeps = j.at("sbm_max_sweeps").get<std::size_t>();
    cfg.null.estimator.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.null.estimator.threshold = j.at("threshold").get<double>();
    cfg.null.estimator.max_batches = j.at("max_batches").get<std::size_t>();
    cfg.group_by = parse_group_by(j.at("group_by").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.exact_path_cutoff = j.at("exact_path_cutoff").get<std::size_t>();
    cfg.bootstrap_resamples = j.at("bootstrap_resamples").get<std::size_t>();
    return cfg;
}

inline nlohmann::ordered_json to_json(const NetworkResult& r) {
    nlohmann::ordered_json j;
    j["entry"] = to_json(r.entry);
    j["simplify"] = to_json(r.simplify);
    j["measures"] = to_json(r.measures);
    j["best_description_length"] = detail::optional_json(r.best_description_length);
    j["best_blocks"] = r.best_blocks ? nlohmann::ordered_json(*r.best_blocks) : nlohmann::ordered_json(nullptr);
    auto nulls = nlohmann::ordered_json::array();
    for (auto& e : r.nulls) nulls.push_back(to_json(e));
    j["nulls"] = std::move(nulls);
    return j;
}

inline NetworkResult network_result_from_json(const nlohmann::ordered_json& j) {
    NetworkResult r;
    r.entry = manifest_entry_from_json(j.at("entry"));
    r.simplify = simplify_report_from_json(j.at("simplify"));
    r.measures = measure_record_from_json(j.at("measures"));
    r.best_description_length = detail::optional_double(j, "best_description_length");
    if (!j.at("best_blocks").is_null()) r.best_blocks = j.at("best_blocks").get<std::size_t>();
    for (auto& e : j.at("nulls")) r.nulls.push_back(null_ensemble_from_json(e));
    return r;
}

inline nlohmann::ordered_json to_json(const NetworkFailure& f) {
    nlohmann::ordered_json j;
    j["id"] = f.id;
    j["path"] = f.path;
    j["stage"] = f.stage;
    j["message"] = f.message;
    return j;
}

inline nlohmann::ordered_json to_json(const FitRecord& f) {
    nlohmann::ordered_json j;
    j["group"] = f.group;
    j["series"] = f.series;
    j["measure"] = f.measure;
    j["form"] = std::string(to_string(f.form));
    if (f.fit) {
        j["a"] = f.fit->a;
        j["sd_a"] = f.fit->sd_a;
        j["b"] = f.fit->b;
        j["sd_b"] = f.fit->sd_b;
        j["points_used"] = f.fit->points_used;
        j["points_excluded"] = f.fit->points_excluded;
        j["exclusion_reasons"] = f.fit->exclusion_reasons;
        j["resamples"] = f.fit->resamples;
        j["error"] = nullptr;
    } else {
        j["error"] = f.error;
    }
    return j;
}

inline FitRecord fit_record_from_json(const nlohmann::ordered_json& j) {
    FitRecord f;
    f.group = j.at("group").get<std::string>();
    f.series = j.at("series").get<std::string>();
    f.measure = j.at("measure").get<std::string>();
    f.form = j.at("form").get<std::string>() == "power-law" ? FitForm::power_law : FitForm::logarithmic;
    if (j.at("error").is_null()) {
        ScalingFit s;
        s.form = f.form;
        s.a = j.at("a").get<double>();
        s.sd_a = j.at("sd_a").get<double>();
        s.b = j.at("b").get<double>();
        s.sd_b = j.at("sd_b").get<double>();
        s.points_used = j.at("points_used").get<std::size_t>();
        s.points_excluded = j.at("points_excluded").get<std::size_t>();
        s.exclusion_reasons = j.at("exclusion_reasons").get<std::map<std::string, std::size_t>>();
        s.resamples = j.at("resamples").get<std::size_t>();
        f.fit = s;
    } else {
        f.error = j.at("error").get<std::string>();
    }
    return f;
}

inline nlohmann::ordered_json run_metadata(const ResultBundle& b) {
    nlohmann::ordered_json j;
    j["tool"] = "netscale";
    j["version"] = std::string(version);
    j["config"] = to_json(b.config);
    j["seed_scheme"] = {
        {"null_draw", "derive(seed, network id, model, draw index)"},
        {"null_estimator", "derive(null draw seed, 'estimator')"},
        {"sbm_posterior", "derive(seed, network id, 'sbm')"},
        {"empirical_estimator", "derive(seed, network id, 'empirical-geodesic')"},
        {"bootstrap", "derive(seed, 'fit', group, series, measure)"},
    };
    j["networks_processed"] = b.networks.size();
    j["networks_failed"] = b.failures.size();
    return j;
}

inline nlohmann::ordered_json to_json(const ResultBundle& b) {
    nlohmann::ordered_json j;
    j["metadata"] = run_metadata(b);
    auto nets = nlohmann::ordered_json::array();
    for (auto& r : b.networks) nets.push_back(to_json(r));
    j["networks"] = std::move(nets);
    auto fails = nlohmann::ordered_json::array();
    for (auto& f : b.failures) fails.push_back(to_json(f));
    j["failures"] = std::move(fails);
    auto fits = nlohmann::ordered_json::array();
    for (auto& f : b.fits) fits.push_back(to_json(f));
    j["fits"] = std::move(fits);
    return j;
}

inline ResultBundle result_bundle_from_json(const nlohmann::ordered_json& j) {
    ResultBundle b;
    b.config = run_config_from_json(j.at("metadata").at("config"));
    for (auto& r : j.at("networks")) b.networks.push_back(network_result_from_json(r));
    for (auto& f : j.at("failures"))
        b.failures.push_back({f.at("id").get<std::string>(), f.at("path").get<std::string>(), f.at("stage").get<std::string>(),
                              f.at("message").get<std::string>()});
    for (auto& f : j.at("fits")) b.fits.push_back(fit_record_from_json(f));
    return b;
}

inline ResultBundle load_result_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("'" + path.string() + "': " + e.what());
    }
    return result_bundle_from_json(j);
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Fit coefficients in table layout: one row per (group, series), four
/// columns (a, sd_a, b, sd_b) per measure. Cells of missing fits are blank.
inline std::string fits_table_csv(const std::vector<FitRecord>& fits) {
    std::string out = "group,series";
    for (auto m : fitted_measures) {
        std::string p(m);
        out += "," + p + "_a," + p + "_sd_a," + p + "_b," + p + "_sd_b";
    }
    out += '\n';
    std::vector<std::pair<std::string, std::string>> rows;
    std::map<std::pair<std::string, std::string>, std::map<std::string, const FitRecord*>> cells;
    for (auto& f : fits) {
        auto key = std::make_pair(f.group, f.series);
        if (!cells.count(key)) rows.push_back(key);
        cells[key][f.measure] = &f;
    }
    for (auto& key : rows) {
        out += detail::csv_field(key.first) + ',' + detail::csv_field(key.second);
        for (auto m : fitted_measures) {
            auto it = cells[key].find(std::string(m));
            if (it == cells[key].end() || !it->second->fit) {
                out += ",,,,";
                continue;
            }
            const auto& s = *it->second->fit;
            out += ',' + detail::format_double(s.a) + ',' + detail::format_double(s.sd_a) + ',' + detail::format_double(s.b) +
                   ',' + detail::format_double(s.sd_b);
        }
        out += '\n';
    }
    return out;
}

/// Write every run artifact into `dir` (created if needed). Returns the file names written.
inline std::vector<std::string> write_outputs(const ResultBundle& b, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        detail::write_text(dir / name, text);
        written.push_back(name);
    };

    std::string measures_csv = "id,domain,subdomain," + measure_csv_header() + "\n";
    auto measures_json = nlohmann::ordered_json::array();
    for (auto& r : b.networks) {
        measures_csv += detail::csv_field(r.entry.id) + ',' + r.entry.domain + ',' + detail::csv_field(r.entry.subdomain.value_or("")) +
                        ',' + to_csv_row(r.measures) + '\n';
        nlohmann::ordered_json j;
        j["id"] = r.entry.id;
        j["domain"] = r.entry.domain;
        j["subdomain"] = r.entry.subdomain ? nlohmann::ordered_json(*r.entry.subdomain) : nlohmann::ordered_json(nullptr);
        j["measures"] = to_json(r.measures);
        j["simplify"] = to_json(r.simplify);
        measures_json.push_back(std::move(j));
    }
    put("measures.csv", measures_csv);
    put("measures.json", detail::dump(measures_json));

    std::string nulls_csv = null_expectation_csv_header() + "\n";
    auto nulls_json = nlohmann::ordered_json::array();
    for (auto& r : b.networks)
        for (auto& ens : r.nulls) {
            for (auto& e : ens.expectations) nulls_csv += to_csv_row(e) + '\n';
            nulls_json.push_back(to_json(ens));
        }
    put("null_expectations.csv", nulls_csv);
    put("null_expectations.json", detail::dump(nulls_json));

    put("fits.csv", fits_table_csv(b.fits));
    auto fits_json = nlohmann::ordered_json::array();
    for (auto& f : b.fits) fits_json.push_back(to_json(f));
    put("fits.json", detail::dump(fits_json));

    std::string failures_csv = "id,path,stage,message\n";
    for (auto& f : b.failures)
        failures_csv += detail::csv_field(f.id) + ',' + detail::csv_field(f.path) + ',' + detail::csv_field(f.stage) + ',' +
                        detail::csv_field(f.message) + '\n';
    put("failures.csv", failures_csv);

    put("run_metadata.json", detail::dump(run_metadata(b)));
    put("results.json", detail::dump(to_json(b)));
    return written;
}

inline std::string file_token(std::string_view s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return out;
}

/// `count` values log-spaced between lo and hi inclusive.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t count = 100) {
    std::vector<double> out(count);
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    if (count > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

/// Per group and measure: scatter_<group>_<measure>.csv with every defined
/// (n, y) point per series, and fitline_<group>_<measure>.csv with each
/// fitted series sampled at 100 log-spaced n over the group's observed range.
inline std::vector<std::string> emit_plot_data(const ResultBundle& b, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::map<std::string, std::vector<const NetworkResult*>> groups;
    for (auto& r : b.networks) groups[group_of(r.entry, b.config.group_by)].push_back(&r);
    std::map<std::tuple<std::string, std::string, std::string>, const FitRecord*> fit_index;
    for (auto& f : b.fits) fit_index[{f.group, f.series, f.measure}] = &f;
    const auto series = detail::series_names(b.config);

    std::vector<std::string> written;
    for (auto& [group, members] : groups) {
        double lo = INFINITY, hi = 0;
        for (auto* r : members) {
            lo = std::min(lo, static_cast<double>(r->measures.n));
            hi = std::max(hi, static_cast<double>(r->measures.n));
        }
        for (auto measure : fitted_measures) {
            const std::string stem = file_token(group) + "_" + std::string(measure) + ".csv";
            std::string scatter = "id,series,n,y\n";
            for (auto& s : series) {
                if (s != "empirical" && measure == "mean_degree") continue;
                for (auto* r : members)
                    if (auto y = series_value(*r, s, measure))
                        scatter += detail::csv_field(r->entry.id) + ',' + s + ',' + std::to_string(r->measures.n) + ',' +
                                   detail::format_double(*y) + '\n';
            }
            std::string line = "series,n,y\n";
            for (auto& s : series) {
                auto it = fit_index.find({group, s, std::string(measure)});
                if (it == fit_index.end() || !it->second->fit) continue;
                for (double n : log_spaced(lo, hi))
                    line += s + ',' + detail::format_double(n) + ',' + detail::format_double((*it->second->fit)(n)) + '\n';
            }
            detail::write_text(dir / ("scatter_" + stem), scatter);
            detail::write_text(dir / ("fitline_" + stem), line);
            written.push_back("scatter_" + stem);
            written.push_back("fitline_" + stem);
        }
    }
    return written;
}

}  // namespace netscale
