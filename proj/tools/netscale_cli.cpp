// netscale: command-line front end for the scaling-law pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "netscale/fetch.hpp"
#include "netscale/pipeline.hpp"

using namespace netscale;
namespace fs = std::filesystem;

namespace {

struct InputOptions {
    std::string path;
    std::string delimiter;
    bool directed = false;
    bool weighted = false;
    std::optional<std::size_t> nodes;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--input,-i", path, "Edge-list file (plain or gzip)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--delimiter", delimiter, "Field delimiter: one character or 'tab' (default: whitespace)");
        cmd->add_flag("--directed", directed, "Input lists directed edges");
        cmd->add_flag("--weighted", weighted, "Third column must be a numeric weight");
        cmd->add_option("--nodes", nodes, "Total node count; pads isolated nodes");
    }

    SimpleGraph load(SimplifyReport* report = nullptr) const {
        ParseOptions opts;
        opts.delimiter = detail::parse_delimiter(delimiter, 0);
        opts.directed = directed;
        opts.weights_expected = weighted;
        auto raw = read_edge_list(path, opts);
        raw.node_count_hint = nodes;
        return simplify(raw, report);
    }

    std::string id() const { return fs::path(path).stem().string(); }
};

void add_estimator_options(CLI::App* cmd, EstimatorConfig& est) {
    cmd->add_option("--batch-size", est.batch_size, "Pairs per estimator batch (even)")->capture_default_str();
    cmd->add_option("--threshold", est.threshold, "Stop when successive estimates differ by less than this")
        ->capture_default_str();
    cmd->add_option("--max-batches", est.max_batches, "Estimator batch cap")->capture_default_str();
}

void add_null_options(CLI::App* cmd, NullModelConfig& cfg, std::string& weighting) {
    cmd->add_option("--samples", cfg.samples, "Graphs per null ensemble")->capture_default_str();
    cmd->add_option("--swaps-per-edge", cfg.swaps_per_edge, "Double-edge swaps per edge for the configuration model")
        ->capture_default_str();
    cmd->add_option("--max-attempts", cfg.max_repair_attempts, "Repair attempts per non-simple DC-SBM edge")
        ->capture_default_str();
    cmd->add_option("--runs", cfg.sbm_runs, "Block-model inference runs per network")->capture_default_str();
    cmd->add_option("--weighting", weighting, "Posterior weighting of inference runs")
        ->check(CLI::IsMember({"inverse-dl", "boltzmann"}))
        ->capture_default_str();
    add_estimator_options(cmd, cfg.estimator);
}

PosteriorWeighting parse_weighting(const std::string& s) {
    return s == "boltzmann" ? PosteriorWeighting::boltzmann : PosteriorWeighting::inverse_dl;
}

std::vector<NullModel> parse_models(const std::string& list) {
    std::vector<NullModel> out;
    if (list.empty() || list == "none") return out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_null_model(item));
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    detail::write_text(path, text);
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

nlohmann::ordered_json posterior_json(const PosteriorSample& post, PosteriorWeighting weighting) {
    nlohmann::ordered_json j;
    std::vector<double> dls;
    auto runs = nlohmann::ordered_json::array();
    for (auto& r : post.runs) {
        dls.push_back(r.description_length);
        nlohmann::ordered_json run;
        run["run_index"] = r.run_index;
        run["seed"] = r.seed;
        run["description_length"] = r.description_length;
        run["blocks"] = r.params.num_blocks();
        run["params"] = to_json(r.params);
        runs.push_back(std::move(run));
    }
    j["weighting"] = weighting == PosteriorWeighting::boltzmann ? "boltzmann" : "inverse-dl";
    j["runs"] = std::move(runs);
    j["weights"] = selection_weights(dls, weighting);
    j["selected"] = post.selected;
    return j;
}

/// Inverse of posterior_json, also accepting a single parameter-set document.
PosteriorSample posterior_from_json(const nlohmann::ordered_json& j) {
    PosteriorSample post;
    if (!j.contains("runs")) {
        InferenceRun run;
        run.params = block_params_from_json(j);
        run.description_length = j.value("description_length", 0.0);
        post.runs.push_back(std::move(run));
        post.selected = {0};
        return post;
    }
    for (auto& r : j.at("runs")) {
        InferenceRun run;
        run.params = block_params_from_json(r.at("params"));
        run.description_length = r.at("description_length").get<double>();
        run.run_index = r.value("run_index", std::size_t{0});
        run.seed = r.value("seed", std::uint64_t{0});
        post.runs.push_back(std::move(run));
    }
    post.selected = j.at("selected").get<std::vector<std::size_t>>();
    for (auto s : post.selected)
        if (s >= post.runs.size()) throw ParameterError("posterior selects a run that is not listed");
    return post;
}

nlohmann::ordered_json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("'" + path + "': " + e.what());
    }
}

/// Points from a CSV with columns n and y (blank y = undefined).
std::vector<FitPoint> read_points(const std::string& path, const std::string& ycol) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::vector<std::string> header, row;
    if (!detail::read_csv_record(in, header)) throw InsufficientDataError("'" + path + "' is empty");
    auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (detail::trim(header[i]) == name) return i;
        throw Error("'" + path + "' has no '" + name + "' column");
    };
    const auto ni = find("n"), yi = find(ycol);
    std::vector<FitPoint> points;
    std::size_t line = 1;
    while (detail::read_csv_record(in, row)) {
        ++line;
        if (row.size() == 1 && detail::trim(row[0]).empty()) continue;
        auto n = ni < row.size() ? detail::parse_double(detail::trim(row[ni])) : std::nullopt;
        if (!n) throw ParseError(line, "non-numeric n");
        std::optional<double> y;
        if (yi < row.size() && !detail::trim(row[yi]).empty()) {
            y = detail::parse_double(detail::trim(row[yi]));
            if (!y) throw ParseError(line, "non-numeric " + ycol);
        }
        points.push_back({*n, y});
    }
    return points;
}

void report(const std::vector<std::string>& files, const fs::path& dir) {
    for (auto& f : files) std::cout << (dir / f).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural measures, null-model ensembles and scaling-law fits for network corpora"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    unsigned threads = detail::default_threads();
    std::uint64_t seed = 0;
    std::string out;

    // simplify
    InputOptions simplify_in;
    auto* simplify_cmd = app.add_subcommand("simplify", "Reduce an edge list to a simple undirected graph");
    simplify_in.add_to(simplify_cmd);
    simplify_cmd->add_option("--out,-o", out, "Output directory")->required();

    // measure
    InputOptions measure_in;
    RunConfig measure_cfg;
    auto* measure_cmd = app.add_subcommand("measure", "Compute the four structural measures of one network");
    measure_in.add_to(measure_cmd);
    measure_cmd->add_option("--out,-o", out, "Output directory")->required();
    measure_cmd->add_option("--exact-path-cutoff", measure_cfg.exact_path_cutoff,
                            "Largest n for exact mean geodesic; larger graphs use the estimator")
        ->capture_default_str();
    measure_cmd->add_option("--seed", seed, "Seed for the estimator");
    add_estimator_options(measure_cmd, measure_cfg.null.estimator);
    measure_cmd->add_option("--threads", threads, "Worker threads");

    // nullmodel
    InputOptions null_in;
    NullModelConfig null_cfg;
    std::string null_model = "gnm", null_weighting = "inverse-dl", null_params;
    auto* null_cmd = app.add_subcommand("nullmodel", "Expected measures under one null model");
    null_in.add_to(null_cmd);
    null_cmd->add_option("--out,-o", out, "Output directory")->required();
    null_cmd->add_option("--model", null_model, "gnm, gnp, config, chung-lu, dcsbm or dcsbm-maxent")->capture_default_str();
    add_null_options(null_cmd, null_cfg, null_weighting);
    null_cmd->add_option("--params", null_params, "Block-model parameters or posterior JSON from infer-sbm")
        ->check(CLI::ExistingFile);
    null_cmd->add_option("--seed", seed, "Master seed");
    null_cmd->add_option("--threads", threads, "Worker threads");

    // infer-sbm
    InputOptions sbm_in;
    std::size_t sbm_runs = 100, sbm_samples = 50;
    std::string sbm_weighting = "inverse-dl";
    InferenceOptions sbm_opts;
    auto* sbm_cmd = app.add_subcommand("infer-sbm", "Fit degree-corrected block models and sample parameter sets");
    sbm_in.add_to(sbm_cmd);
    sbm_cmd->add_option("--out,-o", out, "Output directory")->required();
    sbm_cmd->add_option("--runs", sbm_runs, "Independent inference runs")->capture_default_str();
    sbm_cmd->add_option("--posterior-samples", sbm_samples, "Parameter sets drawn from the runs")->capture_default_str();
    sbm_cmd->add_option("--weighting", sbm_weighting, "Posterior weighting of runs")
        ->check(CLI::IsMember({"inverse-dl", "boltzmann"}))
        ->capture_default_str();
    sbm_cmd->add_option("--initial-blocks", sbm_opts.initial_blocks, "Initial random blocks (default ceil(sqrt(n)))");
    sbm_cmd->add_option("--seed", seed, "Master seed");
    sbm_cmd->add_option("--threads", threads, "Worker threads");

    // fit
    std::string fit_input, fit_form = "power-law", fit_column = "y";
    std::size_t fit_resamples = 10000;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a scaling form to (n, y) points");
    fit_cmd->add_option("--input,-i", fit_input, "CSV with an 'n' column and a value column")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--column", fit_column, "Value column name")->capture_default_str();
    fit_cmd->add_option("--form", fit_form, "power-law or logarithmic")
        ->check(CLI::IsMember({"power-law", "logarithmic"}))
        ->capture_default_str();
    fit_cmd->add_option("--bootstrap-resamples", fit_resamples, "Bootstrap resamples")->capture_default_str();
    fit_cmd->add_option("--seed", seed, "Bootstrap seed");
    fit_cmd->add_option("--out,-o", out, "Output directory")->required();

    // run
    std::string run_manifest, run_models = "gnm,config,dcsbm", run_weighting = "inverse-dl", run_group = "domain";
    RunConfig run_cfg;
    auto* run_cmd = app.add_subcommand("run", "Full pipeline over a corpus manifest");
    run_cmd->add_option("--manifest,-m", run_manifest, "Corpus manifest (CSV or JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out,-o", out, "Output directory")->required();
    run_cmd->add_option("--models", run_models, "Comma-separated null models, or 'none'")->capture_default_str();
    run_cmd->add_option("--group-by", run_group, "Fit grouping")
        ->check(CLI::IsMember({"domain", "subdomain"}))
        ->capture_default_str();
    run_cmd->add_option("--exact-path-cutoff", run_cfg.exact_path_cutoff, "Largest n for exact mean geodesic")
        ->capture_default_str();
    run_cmd->add_option("--bootstrap-resamples", run_cfg.bootstrap_resamples, "Bootstrap resamples per fit")
        ->capture_default_str();
    add_null_options(run_cmd, run_cfg.null, run_weighting);
    run_cmd->add_option("--seed", seed, "Master seed");
    run_cmd->add_option("--threads", threads, "Worker threads");
    bool run_plots = false;
    run_cmd->add_flag("--plot-data", run_plots, "Also write plot data into <out>/plots");

    // fetch-corpus
    FetchOptions fetch_opts;
    std::string fetch_dest, fetch_sums, fetch_digest;
    auto* fetch_cmd = app.add_subcommand("fetch-corpus", "Download, verify and unpack a corpus; write a manifest stub");
    fetch_cmd->add_option("--source,-s", fetch_opts.source, "URL, archive, edge-list file or directory")->required();
    fetch_cmd->add_option("--checksums", fetch_sums, "Checksum list in sha256sum/md5sum format")->check(CLI::ExistingFile);
    fetch_cmd->add_option("--digest", fetch_digest, "Expected md5 or sha256 of the archive");
    fetch_cmd->add_option("--out,-o", fetch_dest, "Corpus directory")->required();

    // plot-data
    std::string plot_results;
    auto* plot_cmd = app.add_subcommand("plot-data", "Scatter and fit-line CSVs from a finished run");
    plot_cmd->add_option("--results,-r", plot_results, "results.json written by 'run'")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--out,-o", out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);
    threads = std::max(1u, threads);

    try {
        if (*simplify_cmd) {
            SimplifyReport rep;
            auto g = simplify_in.load(&rep);
            std::ostringstream edges, labels;
            write_edge_list(edges, g);
            write_label_map(labels, g);
            write_file(fs::path(out) / "edges.txt", edges.str());
            write_file(fs::path(out) / "labels.txt", labels.str());
            write_file(fs::path(out) / "simplify_report.json", dump(to_json(rep)));
            std::cerr << "n=" << g.n() << " m=" << g.m() << '\n';
        } else if (*measure_cmd) {
            measure_cfg.seed = seed;
            SimplifyReport rep;
            auto g = measure_in.load(&rep);
            auto rec = empirical_measures(g, measure_in.id(), measure_cfg, threads);
            write_file(fs::path(out) / "measures.csv", measure_csv_header() + "\n" + to_csv_row(rec) + "\n");
            write_file(fs::path(out) / "measures.json", dump(to_json(rec)));
            write_file(fs::path(out) / "simplify_report.json", dump(to_json(rep)));
        } else if (*null_cmd) {
            null_cfg.weighting = parse_weighting(null_weighting);
            null_cfg.threads = threads;
            auto model = parse_null_model(null_model);
            auto g = null_in.load();
            std::optional<PosteriorSample> post;
            if (!null_params.empty()) post = posterior_from_json(read_json(null_params));
            auto ens = null_expectation(g, null_in.id(), model, null_cfg, seed, post ? &*post : nullptr);
            std::string csv = null_expectation_csv_header() + "\n";
            for (auto& e : ens.expectations) csv += to_csv_row(e) + "\n";
            write_file(fs::path(out) / "null_expectations.csv", csv);
            write_file(fs::path(out) / "null_expectations.json", dump(to_json(ens)));
        } else if (*sbm_cmd) {
            auto g = sbm_in.load();
            auto weighting = parse_weighting(sbm_weighting);
            auto post = sample_parameter_sets(g, sbm_runs, sbm_samples, seed, weighting, threads, sbm_opts);
            write_file(fs::path(out) / "sbm_posterior.json", dump(posterior_json(post, weighting)));
            auto sets = nlohmann::ordered_json::array();
            for (auto& p : post.parameter_sets()) sets.push_back(to_json(p));
            write_file(fs::path(out) / "parameter_sets.json", dump(sets));
        } else if (*fit_cmd) {
            auto form = fit_form == "logarithmic" ? FitForm::logarithmic : FitForm::power_law;
            auto points = read_points(fit_input, fit_column);
            FitRecord rec;
            rec.measure = fit_column;
            rec.form = form;
            rec.fit = fit_with_bootstrap(points, form, fit_resamples, seed);
            auto j = to_json(rec);
            j.erase("group");
            j.erase("series");
            write_file(fs::path(out) / "fit.json", dump(j));
            write_file(fs::path(out) / "fit.csv",
                       "form,a,sd_a,b,sd_b,points_used,points_excluded\n" + std::string(to_string(form)) + ',' +
                           detail::format_double(rec.fit->a) + ',' + detail::format_double(rec.fit->sd_a) + ',' +
                           detail::format_double(rec.fit->b) + ',' + detail::format_double(rec.fit->sd_b) + ',' +
                           std::to_string(rec.fit->points_used) + ',' + std::to_string(rec.fit->points_excluded) + '\n');
        } else if (*run_cmd) {
            run_cfg.models = parse_models(run_models);
            run_cfg.null.weighting = parse_weighting(run_weighting);
            run_cfg.group_by = parse_group_by(run_group);
            run_cfg.seed = seed;
            run_cfg.threads = threads;
            auto manifest = load_manifest(run_manifest);
            auto bundle = run_corpus(manifest, run_cfg);
            report(write_outputs(bundle, out), out);
            if (run_plots) report(emit_plot_data(bundle, fs::path(out) / "plots"), fs::path(out) / "plots");
            for (auto& f : bundle.failures) std::cerr << "failed: " << f.id << " [" << f.stage << "] " << f.message << '\n';
            std::cerr << bundle.networks.size() << " networks processed, " << bundle.failures.size() << " failed\n";
            return bundle.ok() ? 0 : 1;
        } else if (*fetch_cmd) {
            fetch_opts.destination = fetch_dest;
            if (!fetch_sums.empty()) fetch_opts.checksum_file = fetch_sums;
            if (!fetch_digest.empty()) fetch_opts.archive_digest = fetch_digest;
            auto res = fetch_corpus(fetch_opts);
            if (res.already_present) std::cerr << "corpus already present; nothing downloaded\n";
            std::cerr << res.network_files << " network files" << (res.verified ? ", checksums verified" : ", no checksums checked")
                      << '\n';
            if (res.manifest_written) std::cerr << "manifest stub written; fill in the domain column before running\n";
            std::cout << res.manifest.string() << '\n';
        } else if (*plot_cmd) {
            auto bundle = load_result_bundle(plot_results);
            report(emit_plot_data(bundle, out), out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
