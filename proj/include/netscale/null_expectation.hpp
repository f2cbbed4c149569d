#pragma once

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netscale/detail/format.hpp"
#include "netscale/detail/parallel.hpp"
#include "netscale/detail/random.hpp"
#include "netscale/error.hpp"
#include "netscale/geodesic_estimator.hpp"
#include "netscale/graph.hpp"
#include "netscale/measures.hpp"
#include "netscale/null_models.hpp"
#include "netscale/sbm_inference.hpp"

namespace netscale {

enum class NullModel { gnm, gnp, config, chung_lu, dcsbm, dcsbm_maxent };

inline constexpr std::array all_null_models{NullModel::gnm,      NullModel::gnp,   NullModel::config,
                                            NullModel::chung_lu, NullModel::dcsbm, NullModel::dcsbm_maxent};

inline std::string_view to_string(NullModel m) noexcept {
    switch (m) {
        case NullModel::gnm: return "gnm";
        case NullModel::gnp: return "gnp";
        case NullModel::config: return "config";
        case NullModel::chung_lu: return "chung-lu";
        case NullModel::dcsbm: return "dcsbm";
        case NullModel::dcsbm_maxent: return "dcsbm-maxent";
    }
    return "?";
}

inline NullModel parse_null_model(std::string_view s) {
    for (auto m : all_null_models)
        if (to_string(m) == s) return m;
    throw ParameterError("unknown null model '" + std::string(s) + "'");
}

inline bool needs_block_model(NullModel m) noexcept { return m == NullModel::dcsbm || m == NullModel::dcsbm_maxent; }

/// Measures a null model can inform; mean degree is fixed by every model and never computed.
enum class NullMeasure { mean_geodesic, clustering, assortativity };

inline constexpr std::array all_null_measures{NullMeasure::mean_geodesic, NullMeasure::clustering,
                                              NullMeasure::assortativity};

inline std::string_view to_string(NullMeasure m) noexcept {
    switch (m) {
        case NullMeasure::mean_geodesic: return "mean_geodesic";
        case NullMeasure::clustering: return "clustering";
        case NullMeasure::assortativity: return "assortativity";
    }
    return "?";
}

struct NullModelConfig {
    std::size_t samples = 50;
    std::size_t swaps_per_edge = 20;
    std::size_t max_repair_attempts = 100;
    std::size_t sbm_runs = 100;
    PosteriorWeighting weighting = PosteriorWeighting::inverse_dl;
    InferenceOptions inference;
    EstimatorConfig estimator;  // seed field is overridden per draw
    unsigned threads = 1;
};

struct NullExpectation {
    std::string network_id;
    std::string model;
    std::string measure;
    std::optional<double> expected;  // mean over draws where the measure is defined
    std::size_t ensemble_size = 0;
    std::vector<std::optional<double>> per_draw;

    std::size_t defined_draws() const noexcept {
        std::size_t c = 0;
        for (auto& v : per_draw) c += v.has_value();
        return c;
    }
};

/// Expectations plus generator diagnostics for one (network, model) ensemble.
struct NullEnsemble {
    std::string network_id;
    NullModel model = NullModel::gnm;
    std::vector<NullExpectation> expectations;
    std::size_t deleted_edges = 0;   // DC-SBM repair deletions, summed over draws
    std::size_t generated_edges = 0; // edges before repair, summed over draws
    std::size_t capped_pairs = 0;    // probability-capping events, summed over draws
    std::size_t non_converged_estimates = 0;
    std::vector<std::size_t> estimator_batches;

    const NullExpectation* find(NullMeasure m) const {
        for (auto& e : expectations)
            if (e.measure == to_string(m)) return &e;
        return nullptr;
    }
};

/// Draw one graph from `model` fitted to g. Block-model variants need `params`.
inline SimpleGraph sample_null_graph(const SimpleGraph& g, NullModel model, const NullModelConfig& cfg,
                                     std::uint64_t seed, const BlockModelParams* params = nullptr,
                                     NullEnsemble* diagnostics = nullptr) {
    switch (model) {
        case NullModel::gnm: return gen_gnm(g.n(), g.m(), seed);
        case NullModel::gnp: {
            double p = g.n() < 2 ? 0.0 : 2.0 * static_cast<double>(g.m()) / (static_cast<double>(g.n()) * (g.n() - 1));
            return gen_gnp(g.n(), p, seed);
        }
        case NullModel::config: return config_model_sample(g, cfg.swaps_per_edge, seed);
        case NullModel::chung_lu: {
            std::size_t capped = 0;
            auto k = degree_sequence(g);
            auto out = chung_lu_sample(k, seed, &capped);
            if (diagnostics) diagnostics->capped_pairs += capped;
            return out;
        }
        case NullModel::dcsbm: {
            if (!params) throw ParameterError("dcsbm requires block model parameters");
            auto draw = dcsbm_generate(*params, derive_seed(seed, "generate"));
            auto fixed = dcsbm_repair(draw.graph, *params, cfg.max_repair_attempts, derive_seed(seed, "repair"));
            if (diagnostics) {
                diagnostics->deleted_edges += fixed.deleted_edges;
                diagnostics->generated_edges += draw.graph.edges.size();
            }
            return std::move(fixed.graph);
        }
        case NullModel::dcsbm_maxent: {
            if (!params) throw ParameterError("dcsbm-maxent requires block model parameters");
            std::size_t capped = 0;
            auto out = dcsbm_maxent_sample(*params, seed, &capped);
            if (diagnostics) diagnostics->capped_pairs += capped;
            return out;
        }
    }
    throw ParameterError("unknown null model");
}

/// Mean of each requested measure over `cfg.samples` graphs drawn from `model`
/// fitted to g. Path length uses the batch estimator; clustering and
/// assortativity are exact. Draw d is seeded from (seed, network_id, model, d).
///
/// For block-model variants the parameter sets come from `posterior`
/// (draw d uses selected set d modulo its size); when null, inference is run
/// here with cfg.sbm_runs runs. Parameter errors are rethrown with the
/// network id prepended.
inline NullEnsemble null_expectation(const SimpleGraph& g, std::string_view network_id, NullModel model,
                                     const NullModelConfig& cfg, std::span<const NullMeasure> measures,
                                     std::uint64_t seed, const PosteriorSample* posterior = nullptr) try {
    if (cfg.samples == 0) throw ParameterError("ensemble size must be at least 1");
    const auto model_name = std::string(to_string(model));

    std::vector<BlockModelParams> sets;
    if (needs_block_model(model)) {
        if (g.m() == 0) throw ParameterError("block model needs at least one edge");
        if (posterior) sets = posterior->parameter_sets();
        else
            sets = sample_parameter_sets(g, cfg.sbm_runs, cfg.samples, derive_seed(seed, network_id, "sbm"), cfg.weighting,
                                         cfg.threads, cfg.inference)
                       .parameter_sets();
        if (sets.empty()) throw ParameterError("no block model parameter sets");
    }

    struct Draw {
        std::array<std::optional<double>, 3> values;
        NullEnsemble diag;
        std::size_t batches = 0;
        bool converged = true;
    };
    std::vector<Draw> draws(cfg.samples);
    bool want[3] = {false, false, false};
    for (auto m : measures) want[static_cast<int>(m)] = true;

    detail::parallel_for(cfg.samples, cfg.threads, [&](std::size_t d, unsigned) {
        auto draw_seed = derive_seed(seed, network_id, model_name, d);
        auto& out = draws[d];
        const BlockModelParams* params = sets.empty() ? nullptr : &sets[d % sets.size()];
        auto h = sample_null_graph(g, model, cfg, draw_seed, params, &out.diag);
        if (want[0]) {
            auto est_cfg = cfg.estimator;
            est_cfg.seed = derive_seed(draw_seed, "estimator");
            est_cfg.threads = 1;
            auto est = estimate_mean_geodesic(h, est_cfg);
            out.values[0] = est.value;
            out.batches = est.batches_used;
            out.converged = est.converged || !est.value;
        }
        if (want[1]) out.values[1] = global_clustering(h);
        if (want[2]) out.values[2] = degree_assortativity(h);
    });

    NullEnsemble ens;
    ens.network_id = std::string(network_id);
    ens.model = model;
    for (auto& d : draws) {
        ens.deleted_edges += d.diag.deleted_edges;
        ens.generated_edges += d.diag.generated_edges;
        ens.capped_pairs += d.diag.capped_pairs;
        if (want[0]) {
            ens.estimator_batches.push_back(d.batches);
            ens.non_converged_estimates += !d.converged;
        }
    }
    for (auto m : measures) {
        const auto idx = static_cast<std::size_t>(m);
        NullExpectation e;
        e.network_id = ens.network_id;
        e.model = model_name;
        e.measure = std::string(to_string(m));
        e.ensemble_size = cfg.samples;
        double sum = 0;
        std::size_t count = 0;
        for (auto& d : draws) {
            e.per_draw.push_back(d.values[idx]);
            if (d.values[idx]) {
                sum += *d.values[idx];
                ++count;
            }
        }
        if (count > 0) e.expected = sum / static_cast<double>(count);
        ens.expectations.push_back(std::move(e));
    }
    return ens;
} catch (const ParameterError& e) {
    throw ParameterError(std::string(network_id) + " (" + std::string(to_string(model)) + "): " + e.what());
}

inline NullEnsemble null_expectation(const SimpleGraph& g, std::string_view network_id, NullModel model,
                                     const NullModelConfig& cfg, std::uint64_t seed,
                                     const PosteriorSample* posterior = nullptr) {
    return null_expectation(g, network_id, model, cfg, all_null_measures, seed, posterior);
}

inline std::string null_expectation_csv_header() { return "id,model,measure,expected,ensemble_size,defined_draws"; }

inline std::string to_csv_row(const NullExpectation& e) {
    return detail::csv_field(e.network_id) + ',' + e.model + ',' + e.measure + ',' + detail::format_optional(e.expected) +
           ',' + std::to_string(e.ensemble_size) + ',' + std::to_string(e.defined_draws());
}

inline nlohmann::ordered_json to_json(const NullExpectation& e) {
    nlohmann::ordered_json j;
    j["id"] = e.network_id;
    j["model"] = e.model;
    j["measure"] = e.measure;
    j["expected"] = e.expected ? nlohmann::ordered_json(*e.expected) : nlohmann::ordered_json(nullptr);
    j["ensemble_size"] = e.ensemble_size;
    auto draws = nlohmann::ordered_json::array();
    for (auto& v : e.per_draw) draws.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
    j["per_draw"] = std::move(draws);
    return j;
}

inline NullExpectation null_expectation_from_json(const nlohmann::ordered_json& j) {
    NullExpectation e;
    e.network_id = j.at("id").get<std::string>();
    e.model = j.at("model").get<std::string>();
    e.measure = j.at("measure").get<std::string>();
    if (!j.at("expected").is_null()) e.expected = j.at("expected").get<double>();
    e.ensemble_size = j.at("ensemble_size").get<std::size_t>();
    for (auto& v : j.at("per_draw")) e.per_draw.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    return e;
}

inline nlohmann::ordered_json to_json(const NullEnsemble& ens) {
    nlohmann::ordered_json j;
    j["id"] = ens.network_id;
    j["model"] = std::string(to_string(ens.model));
    j["deleted_edges"] = ens.deleted_edges;
    j["generated_edges"] = ens.generated_edges;
    j["capped_pairs"] = ens.capped_pairs;
    j["non_converged_estimates"] = ens.non_converged_estimates;
    j["estimator_batches"] = ens.estimator_batches;
    auto list = nlohmann::ordered_json::array();
    for (auto& e : ens.expectations) list.push_back(to_json(e));
    j["expectations"] = std::move(list);
    return j;
}

inline NullEnsemble null_ensemble_from_json(const nlohmann::ordered_json& j) {
    NullEnsemble ens;
    ens.network_id = j.at("id").get<std::string>();
    ens.model = parse_null_model(j.at("model").get<std::string>());
    ens.deleted_edges = j.value("deleted_edges", std::size_t{0});
    ens.generated_edges = j.value("generated_edges", std::size_t{0});
    ens.capped_pairs = j.value("capped_pairs", std::size_t{0});
    ens.non_converged_estimates = j.value("non_converged_estimates", std::size_t{0});
    if (j.contains("estimator_batches")) ens.estimator_batches = j.at("estimator_batches").get<std::vector<std::size_t>>();
    for (auto& e : j.at("expectations")) ens.expectations.push_back(null_expectation_from_json(e));
    return ens;
}

}  // namespace netscale
