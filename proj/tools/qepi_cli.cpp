// qepi — command-line front end for the ZIP-level spatiotemporal pipeline:
// synthetic data generation, imputation/normalization, clustering (density
// baselines and the QAOA path), method benchmarking, prevalence forecasting
// and Bayesian causal analysis. Every command writes its outputs plus a
// run manifest into the chosen output directory; re-running the manifest's
// argv reproduces the outputs byte-for-byte except wall-time fields.
//
// Exit codes: 0 ok, 2 input/flag error, 3 infeasible configuration.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qepi/causal.hpp"
#include "qepi/dataset.hpp"
#include "qepi/dbscan.hpp"
#include "qepi/distance.hpp"
#include "qepi/forecast.hpp"
#include "qepi/hdbscan.hpp"
#include "qepi/metrics.hpp"
#include "qepi/qaoa.hpp"
#include "qepi/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qepi;

namespace {

struct RunContext {
    std::vector<std::string> argv;
    std::string command;
    fs::path out_dir;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir);
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
        f << content;
        outputs.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void finish() {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json manifest = {{"command", command},      {"argv", argv},       {"inputs", inputs},
                         {"outputs", outputs},      {"seed", seed},       {"threads", threads},
                         {"version", QEPI_VERSION}, {"wall_time_seconds", elapsed}};
        fs::create_directories(out_dir);
        std::ofstream f(out_dir / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
    }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Dataset load_dataset(RunContext& ctx, const std::string& path) {
    ctx.inputs.push_back(path);
    return parse_dataset(read_file(path));
}

// cluster/bench/causal accept raw complete data and normalize on the fly;
// data with holes must go through `prep` first
Dataset ensure_normalized(Dataset data) {
    if (data.normalization_state == NormState::normalized) return data;
    if (data.any_feature_missing())
        throw std::runtime_error("input has missing values; run `qepi prep` first");
    return minmax_normalize(data);
}

std::string labels_csv(const Dataset& data, const ClusterAssignment& labels) {
    std::string out = "zip,label\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out += data.records[i].zip + "," + std::to_string(labels.labels[i]) + "\n";
    return out;
}

std::string planted_csv(const Dataset& data, const ClusterAssignment& labels) {
    std::string out = "zip,year,label\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out += data.records[i].zip + "," + std::to_string(data.records[i].year) + "," +
               std::to_string(labels.labels[i]) + "\n";
    return out;
}

json cluster_geojson(const Dataset& data, const ClusterAssignment& labels) {
    json features = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& rec = data.records[i];
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", {*rec.lon, *rec.lat}}}},
                            {"properties",
                             {{"zip", rec.zip},
                              {"year", rec.year},
                              {"label", labels.labels[i]},
                              {"hiv_rate", rec.hiv_rate ? json(*rec.hiv_rate) : json()}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

std::string cluster_scatter(const Dataset& data, const ClusterAssignment& labels, const std::string& title) {
    std::vector<ScatterPoint> pts;
    pts.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        pts.push_back({*data.records[i].lon, *data.records[i].lat, labels.labels[i]});
    return scatter_svg(pts, title);
}

// truth labels: `zip,year,label` joins on (zip, year); `zip,label` on zip
ClusterAssignment load_truth(RunContext& ctx, const std::string& path, const Dataset& data) {
    ctx.inputs.push_back(path);
    const std::string text = read_file(path);
    std::map<std::string, int> by_key;
    std::size_t pos = 0;
    bool with_year = false;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line = strip_cr(std::string_view(text).substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (header) {
            if (fields.size() == 3)
                with_year = true;
            else if (fields.size() != 2)
                throw std::runtime_error("truth file: expected zip,label or zip,year,label header");
            header = false;
            continue;
        }
        const std::string key = with_year ? std::string(fields[0]) + ":" + std::string(fields[1])
                                          : std::string(fields[0]);
        by_key[key] = static_cast<int>(parse_long(fields[with_year ? 2 : 1], "truth label"));
    }
    ClusterAssignment truth;
    for (const auto& rec : data.records) {
        const std::string key = with_year ? rec.zip + ":" + std::to_string(rec.year) : rec.zip;
        auto it = by_key.find(key);
        if (it == by_key.end())
            throw std::runtime_error("truth file has no label for zip " + rec.zip + " year " +
                                     std::to_string(rec.year));
        truth.labels.push_back(it->second);
    }
    return truth;
}

struct ClusterParams {
    std::string method = "dbscan";
    double eps = 0.0;  // 0 -> 60th percentile of pairwise distances
    std::size_t min_pts = 4;
    std::size_t min_cluster_size = 4;
    std::size_t min_samples = 4;
    std::size_t k = 2;
    std::size_t p = 2;
    std::size_t shots = 1024;
    std::string encoding = "auto";
    std::size_t restarts = 3;
    double geo_weight = 0.5;
    double feat_weight = 0.5;
};

EncodingScheme pick_encoding(const ClusterParams& cp) {
    if (cp.encoding == "onehot") return EncodingScheme::onehot;
    if (cp.encoding == "compact2") return EncodingScheme::compact2;
    return cp.k == 2 ? EncodingScheme::compact2 : EncodingScheme::onehot;
}

double default_eps(const DistanceMatrix& dm) { return percentile(dm.off_diagonal(), 0.6); }

int run_synth(RunContext& ctx, const SynthConfig& cfg) {
    SynthResult res = generate_synthetic(cfg);
    ctx.write("dataset.csv", serialize_dataset(res.data));
    ctx.write("planted_labels.csv", planted_csv(res.data, res.planted));
    ctx.finish();
    std::cout << "wrote " << res.data.size() << " records (" << cfg.n_points << " zips x "
              << (cfg.year_end - cfg.year_begin + 1) << " years) to " << ctx.out_dir.string() << "\n";
    return 0;
}

int run_prep(RunContext& ctx, const std::string& in_path, std::size_t knn) {
    Dataset raw = load_dataset(ctx, in_path);
    ImputeResult imputed = knn_impute(raw, knn);
    Dataset prepped = minmax_normalize(imputed.data);
    ctx.write("prepped.csv", serialize_dataset(prepped));
    ctx.write_json("prep_report.json", {{"input_records", raw.size()},
                                        {"dropped_records", imputed.dropped},
                                        {"output_records", prepped.size()},
                                        {"knn", knn}});
    ctx.finish();
    std::cout << "imputed and normalized " << prepped.size() << " records (" << imputed.dropped
              << " dropped) to " << ctx.out_dir.string() << "\n";
    return 0;
}

int run_cluster(RunContext& ctx, const std::string& in_path, const ClusterParams& cp, bool dump_dist,
                bool dump_tree, bool trace) {
    Dataset data = ensure_normalized(load_dataset(ctx, in_path));
    DistanceMatrix dm = combined_distance(data, cp.geo_weight, cp.feat_weight, ctx.threads);
    if (dump_dist) ctx.write("dist.csv", distance_matrix_csv(dm));

    ClusterAssignment labels;
    json diagnostics;
    diagnostics["method"] = cp.method;
    const auto t0 = std::chrono::steady_clock::now();
    if (cp.method == "dbscan") {
        const double eps = cp.eps > 0.0 ? cp.eps : default_eps(dm);
        labels = dbscan(dm, eps, cp.min_pts);
        diagnostics["eps"] = eps;
        diagnostics["min_pts"] = cp.min_pts;
    } else if (cp.method == "hdbscan") {
        HdbscanResult res = hdbscan(dm, cp.min_cluster_size, cp.min_samples);
        labels = res.labels;
        diagnostics["min_cluster_size"] = cp.min_cluster_size;
        diagnostics["min_samples"] = cp.min_samples;
        diagnostics["mst_total_weight"] = res.mst_total_weight();
        if (dump_tree) ctx.write_json("tree.json", condensed_tree_json(res));
    } else if (cp.method == "qaoa") {
        QaoaOptConfig opt;
        opt.restarts = cp.restarts;
        opt.threads = ctx.threads;
        std::string trace_csv;
        std::size_t depth = cp.p;
        if (trace) {
            trace_csv = "iter";
            for (std::size_t i = 1; i <= depth; ++i) trace_csv += ",gamma" + std::to_string(i);
            for (std::size_t i = 1; i <= depth; ++i) trace_csv += ",beta" + std::to_string(i);
            trace_csv += ",energy\n";
            opt.trace = [&trace_csv, depth](std::size_t iter, const QaoaParams& prm, double energy) {
                trace_csv += std::to_string(iter);
                for (std::size_t i = 0; i < depth; ++i)
                    trace_csv += "," + fmt_double(i < prm.gammas.size() ? prm.gammas[i] : 0.0);
                for (std::size_t i = 0; i < depth; ++i)
                    trace_csv += "," + fmt_double(i < prm.betas.size() ? prm.betas[i] : 0.0);
                trace_csv += "," + fmt_double(energy) + "\n";
            };
        }
        QaoaClusterResult res = qaoa_cluster(dm, cp.k, cp.p, cp.shots, ctx.seed, pick_encoding(cp), opt);
        labels = res.labels;
        diagnostics["k"] = cp.k;
        diagnostics["p"] = cp.p;
        diagnostics["shots"] = cp.shots;
        diagnostics["encoding"] = res.encoding.scheme == EncodingScheme::compact2 ? "compact2" : "onehot";
        diagnostics["num_qubits"] = res.encoding.num_vars();
        diagnostics["expected_energy"] = res.diagnostics.expected_energy;
        diagnostics["best_sample_energy"] = res.diagnostics.best_sample_energy;
        diagnostics["feasible_sample_fraction"] = res.diagnostics.feasible_sample_fraction;
        if (!res.encoding.warnings.empty()) diagnostics["warnings"] = res.encoding.warnings;
        if (trace) ctx.write("trace.csv", trace_csv);
    } else {
        throw CLI::ValidationError("--method", "unknown method " + cp.method);
    }
    diagnostics["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    diagnostics["n_clusters"] = labels.num_clusters();

    ctx.write("labels.csv", labels_csv(data, labels));
    ctx.write("clusters.geojson", cluster_geojson(data, labels).dump(2) + "\n");
    ctx.write("clusters.svg", cluster_scatter(data, labels, "Spatiotemporal clusters (" + cp.method + ")"));
    ctx.write_json("diagnostics.json", diagnostics);
    ctx.finish();
    std::cout << cp.method << ": " << labels.num_clusters() << " clusters over " << data.size() << " records\n";
    return 0;
}

int run_bench(RunContext& ctx, const std::string& in_path, const std::string& truth_path,
              const ClusterParams& cp) {
    Dataset data = ensure_normalized(load_dataset(ctx, in_path));
    DistanceMatrix dm = combined_distance(data, cp.geo_weight, cp.feat_weight, ctx.threads);
    std::optional<ClusterAssignment> truth;
    if (!truth_path.empty()) truth = load_truth(ctx, truth_path, data);

    const double eps = cp.eps > 0.0 ? cp.eps : default_eps(dm);
    const std::uint64_t seed = ctx.seed;
    const unsigned threads = ctx.threads;
    std::vector<BenchMethod> methods = {
        {"DBSCAN", [&, eps](const DistanceMatrix& m) { return dbscan(m, eps, cp.min_pts); }},
        {"HDBSCAN",
         [&](const DistanceMatrix& m) { return hdbscan(m, cp.min_cluster_size, cp.min_samples).labels; }},
        {"Quantum Clustering", [&, seed, threads](const DistanceMatrix& m) {
             QaoaOptConfig opt;
             opt.restarts = cp.restarts;
             opt.threads = threads;
             return qaoa_cluster(m, cp.k, cp.p, cp.shots, seed, pick_encoding(cp), opt).labels;
         }},
    };
    BenchmarkReport report = benchmark(dm, truth, methods);
    ctx.write_json("report.json", benchmark_json(report));
    ctx.write("report.md", benchmark_markdown(report));
    ctx.finish();

    std::size_t failed = 0;
    for (const auto& row : report.rows) {
        if (!row.error.empty()) {
            ++failed;
            std::cerr << row.method << " failed: " << row.error << "\n";
        }
    }
    std::cout << benchmark_markdown(report);
    return failed == report.rows.size() ? 3 : 0;
}

int run_forecast(RunContext& ctx, const std::string& in_path, const std::string& model,
                 const TrainConfig& cfg) {
    Dataset data = ensure_normalized(load_dataset(ctx, in_path));
    SupervisedSet set = build_supervised(data);

    json evaluation;
    std::vector<LineSeries> series;
    auto per_year_series = [&](const ForecastEvaluation& ev, const std::string& name) {
        LineSeries s;
        s.name = name;
        std::map<int, SplitErrors> merged;
        for (const auto& [split, years] : ev.by_split_and_year)
            for (const auto& [year, err] : years) merged[year] = err;
        for (const auto& [year, err] : merged) s.points.emplace_back(static_cast<double>(year), err.rmse);
        return s;
    };

    if (model == "classical" || model == "both") {
        MlpTrainResult res = train_mlp(set, cfg);
        ctx.write("history_classical.csv", history_csv(res.history));
        ForecastEvaluation ev =
            evaluate_forecast([&](const std::vector<double>& x) { return mlp_forward(res.model, x); }, set);
        evaluation["classical"] = evaluation_json(ev);
        evaluation["classical"]["best_epoch"] = res.history.best_epoch;
        evaluation["classical"]["stopped_early"] = res.history.stopped_early;
        series.push_back(per_year_series(ev, "classical"));
    }
    if (model == "hybrid" || model == "both") {
        HybridTrainResult res = train_hybrid(set, cfg);
        ctx.write("history_hybrid.csv", history_csv(res.history));
        ForecastEvaluation ev =
            evaluate_forecast([&](const std::vector<double>& x) { return hybrid_forward(res.model, x); }, set);
        evaluation["hybrid"] = evaluation_json(ev);
        evaluation["hybrid"]["best_epoch"] = res.history.best_epoch;
        evaluation["hybrid"]["stopped_early"] = res.history.stopped_early;
        series.push_back(per_year_series(ev, "hybrid"));
    }
    ctx.write_json("evaluation.json", evaluation);
    ctx.write("forecast.svg", line_chart_svg(series, "Prediction error by target year", "target year", "RMSE"));
    ctx.finish();
    std::cout << "trained " << model << " forecaster(s) on " << set.rows.size() << " rows\n";
    return 0;
}

int run_causal(RunContext& ctx, const std::string& in_path, const std::string& target,
               std::size_t bins, const std::string& method, std::size_t shots, HillClimbConfig hc,
               double alpha, const std::string& labels_path) {
    Dataset data = ensure_normalized(load_dataset(ctx, in_path));
    DiscretizedDataset ddata = discretize(data, bins);

    const auto names = ddata.names;
    const auto target_it = std::find(names.begin(), names.end(), target);
    if (target_it == names.end())
        throw CLI::ValidationError("--target", target + " is not a dataset column");
    const std::size_t target_idx = static_cast<std::size_t>(target_it - names.begin());

    hc.threads = ctx.threads;
    auto analyze = [&](const DiscretizedDataset& dd, json& quantum_diag) {
        Dag dag = hill_climb_structure(dd, hc, ctx.seed);
        BayesNet net = fit_parameters(dag, dd, alpha);
        std::vector<std::pair<std::string, double>> scores;
        if (method == "quantum") {
            std::uint64_t call = 0;
            scores = influence_scores(net, target_idx,
                                      [&](std::size_t query, const std::map<std::size_t, std::size_t>& ev) {
                                          QuantumInferenceResult res =
                                              quantum_rejection_sample(net, query, ev, shots, ctx.seed + 7919 * (++call));
                                          json d = {{"acceptance_rate", res.acceptance_rate},
                                                    {"exact_acceptance", res.exact_acceptance},
                                                    {"iterations", res.iterations},
                                                    {"evidence_probability", res.evidence_probability}};
                                          for (const auto& [var, level] : ev) {
                                              d["factor"] = net.names[var];
                                              d["level"] = level;
                                          }
                                          quantum_diag.push_back(d);
                                          return res.distribution;
                                      });
        } else {
            scores = influence_scores(net, target_idx);
        }
        return std::make_pair(net, scores);
    };

    json quantum_diag = json::array();
    auto [net, scores] = analyze(ddata, quantum_diag);

    json net_json = bayesnet_json(net);
    net_json["bin_edges"] = json::object();
    for (std::size_t f = 0; f < ddata.num_vars(); ++f) net_json["bin_edges"][ddata.names[f]] = ddata.bin_edges[f];
    if (!ddata.warnings.empty()) net_json["warnings"] = ddata.warnings;
    ctx.write_json("net.json", net_json);
    ctx.write_json("influence.json", influence_json(scores));
    if (method == "quantum") ctx.write_json("quantum_diagnostics.json", quantum_diag);

    std::vector<BarItem> bars;
    for (const auto& [name, score] : scores) bars.push_back({name, score});
    ctx.write("influence.svg", bar_chart_svg(bars, "Influence on " + target, "max contrast"));

    // optional per-cluster re-fit: an approximate region stratification
    if (!labels_path.empty()) {
        ClusterAssignment labels = load_truth(ctx, labels_path, data);
        std::map<int, std::vector<std::size_t>> members;
        for (std::size_t i = 0; i < labels.labels.size(); ++i)
            if (labels.labels[i] >= 0) members[labels.labels[i]].push_back(i);
        for (const auto& [cid, rows] : members) {
            if (rows.size() < 3 * bins) continue;  // too small to fit anything meaningful
            DiscretizedDataset sub = ddata;
            sub.rows.clear();
            for (std::size_t r : rows) sub.rows.push_back(ddata.rows[r]);
            json sub_diag = json::array();
            auto [sub_net, sub_scores] = analyze(sub, sub_diag);
            json out = influence_json(sub_scores);
            ctx.write_json("influence_cluster_" + std::to_string(cid) + ".json", out);
        }
    }
    ctx.finish();
    std::cout << "influence ranking:";
    for (const auto& [name, score] : scores) std::cout << " " << name << "=" << fmt_fixed(score, 3);
    std::cout << "\n";
    return 0;
}

SynthConfig parse_years(SynthConfig cfg, const std::string& years) {
    const auto colon = years.find(':');
    if (colon == std::string::npos) {
        cfg.year_begin = cfg.year_end = static_cast<int>(parse_long(years, "--years"));
    } else {
        cfg.year_begin = static_cast<int>(parse_long(years.substr(0, colon), "--years"));
        cfg.year_end = static_cast<int>(parse_long(years.substr(colon + 1), "--years"));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qepi: quantum-assisted spatiotemporal epidemiology toolkit"};
    app.set_version_flag("--version", QEPI_VERSION);
    app.require_subcommand(1);

    RunContext ctx;
    for (int i = 1; i < argc; ++i) ctx.argv.emplace_back(argv[i]);

    std::string out_dir;
    std::string in_path;
    unsigned threads = 0;  // 0 -> hardware
    app.add_option("--threads", threads, "worker thread cap (0 = hardware)")->envname("QEPI_THREADS");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic planted-cluster dataset");
    SynthConfig synth_cfg;
    std::string years = "2022";
    synth->add_option("--n", synth_cfg.n_points, "number of ZIP sites")->capture_default_str();
    synth->add_option("--k", synth_cfg.k_planted, "planted cluster count")->capture_default_str();
    synth->add_option("--years", years, "year or begin:end range")->capture_default_str();
    synth->add_option("--missing-fraction", synth_cfg.missing_fraction, "hole probability per cell")
        ->capture_default_str();
    synth->add_option("--noise-sd", synth_cfg.noise_sd, "feature/geo noise scale")->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "random seed")->capture_default_str();
    synth->add_option("-o,--out", out_dir, "output directory")->required();

    // prep
    auto* prep = app.add_subcommand("prep", "impute missing cells and min-max normalize");
    std::size_t knn = 5;
    prep->add_option("--in", in_path, "input dataset CSV")->required();
    prep->add_option("--knn", knn, "neighbor count for imputation")->capture_default_str();
    prep->add_option("-o,--out", out_dir, "output directory")->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster records with dbscan, hdbscan or qaoa");
    ClusterParams cp;
    std::uint64_t seed = 0;
    bool dump_dist = false, dump_tree = false, trace = false;
    cluster->add_option("--in", in_path, "input dataset CSV")->required();
    cluster->add_option("--method", cp.method, "dbscan | hdbscan | qaoa")
        ->check(CLI::IsMember({"dbscan", "hdbscan", "qaoa"}))
        ->capture_default_str();
    cluster->add_option("--eps", cp.eps, "dbscan radius (default: 60th distance percentile)");
    cluster->add_option("--min-pts", cp.min_pts, "dbscan core threshold")->capture_default_str();
    cluster->add_option("--mcs", cp.min_cluster_size, "hdbscan minimum cluster size")->capture_default_str();
    cluster->add_option("--ms", cp.min_samples, "hdbscan core-distance neighbors")->capture_default_str();
    cluster->add_option("--k", cp.k, "cluster count for qaoa")->capture_default_str();
    cluster->add_option("--p", cp.p, "qaoa depth")->capture_default_str();
    cluster->add_option("--shots", cp.shots, "qaoa measurement shots")->capture_default_str();
    cluster->add_option("--encoding", cp.encoding, "auto | onehot | compact2")
        ->check(CLI::IsMember({"auto", "onehot", "compact2"}))
        ->capture_default_str();
    cluster->add_option("--restarts", cp.restarts, "qaoa optimizer restarts per layer")->capture_default_str();
    cluster->add_option("--geo-weight", cp.geo_weight, "geographic distance weight")->capture_default_str();
    cluster->add_option("--feat-weight", cp.feat_weight, "feature distance weight")->capture_default_str();
    cluster->add_flag("--dump-dist", dump_dist, "also write the distance matrix CSV");
    cluster->add_flag("--dump-tree", dump_tree, "also write the hdbscan condensed tree JSON");
    cluster->add_flag("--trace", trace, "write the qaoa optimizer trace CSV");
    cluster->add_option("--seed", seed, "random seed")->capture_default_str();
    cluster->add_option("-o,--out", out_dir, "output directory")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "compare dbscan, hdbscan and qaoa on one dataset");
    std::string truth_path;
    bench->add_option("--in", in_path, "input dataset CSV")->required();
    bench->add_option("--truth", truth_path, "planted labels CSV (zip[,year],label)");
    bench->add_option("--eps", cp.eps, "dbscan radius (default: 60th distance percentile)");
    bench->add_option("--min-pts", cp.min_pts, "dbscan core threshold")->capture_default_str();
    bench->add_option("--mcs", cp.min_cluster_size, "hdbscan minimum cluster size")->capture_default_str();
    bench->add_option("--ms", cp.min_samples, "hdbscan core-distance neighbors")->capture_default_str();
    bench->add_option("--k", cp.k, "cluster count for qaoa")->capture_default_str();
    bench->add_option("--p", cp.p, "qaoa depth")->capture_default_str();
    bench->add_option("--shots", cp.shots, "qaoa measurement shots")->capture_default_str();
    bench->add_option("--encoding", cp.encoding, "auto | onehot | compact2")
        ->check(CLI::IsMember({"auto", "onehot", "compact2"}))
        ->capture_default_str();
    bench->add_option("--geo-weight", cp.geo_weight, "geographic distance weight")->capture_default_str();
    bench->add_option("--feat-weight", cp.feat_weight, "feature distance weight")->capture_default_str();
    bench->add_option("--seed", seed, "random seed")->capture_default_str();
    bench->add_option("-o,--out", out_dir, "output directory")->required();

    // forecast
    auto* forecast = app.add_subcommand("forecast", "train next-year prevalence forecasters");
    std::string model = "both";
    TrainConfig train_cfg;
    forecast->add_option("--in", in_path, "input multi-year dataset CSV")->required();
    forecast->add_option("--model", model, "classical | hybrid | both")
        ->check(CLI::IsMember({"classical", "hybrid", "both"}))
        ->capture_default_str();
    forecast->add_option("--lr", train_cfg.learning_rate, "learning rate")->capture_default_str();
    forecast->add_option("--momentum", train_cfg.momentum, "momentum")->capture_default_str();
    forecast->add_option("--batch", train_cfg.batch_size, "mini-batch size")->capture_default_str();
    forecast->add_option("--epochs", train_cfg.max_epochs, "epoch cap")->capture_default_str();
    forecast->add_option("--patience", train_cfg.patience, "early-stop patience")->capture_default_str();
    forecast->add_option("--seed", seed, "random seed")->capture_default_str();
    forecast->add_option("-o,--out", out_dir, "output directory")->required();

    // causal
    auto* causal = app.add_subcommand("causal", "learn a Bayesian network and rank risk factors");
    std::string target = "hiv_rate";
    std::string causal_method = "exact";
    std::string causal_labels;
    std::size_t bins = 3, causal_shots = 4096;
    HillClimbConfig hc;
    double alpha = 1.0;
    causal->add_option("--in", in_path, "input dataset CSV")->required();
    causal->add_option("--target", target, "target column")->capture_default_str();
    causal->add_option("--bins", bins, "quantile bins per variable")->capture_default_str();
    causal->add_option("--method", causal_method, "exact | quantum")
        ->check(CLI::IsMember({"exact", "quantum"}))
        ->capture_default_str();
    causal->add_option("--shots", causal_shots, "samples per quantum inference call")->capture_default_str();
    causal->add_option("--max-parents", hc.max_parents, "structure search parent cap")->capture_default_str();
    causal->add_option("--restarts", hc.restarts, "structure search restarts")->capture_default_str();
    causal->add_option("--alpha", alpha, "Laplace pseudo-count")->capture_default_str();
    causal->add_option("--labels", causal_labels, "cluster labels CSV for per-cluster re-fitting");
    causal->add_option("--seed", seed, "random seed")->capture_default_str();
    causal->add_option("-o,--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ctx.threads = threads == 0 ? hardware_threads() : threads;
        ctx.out_dir = out_dir;
        if (synth->parsed()) {
            ctx.command = "synth";
            ctx.seed = synth_cfg.seed;
            return run_synth(ctx, parse_years(synth_cfg, years));
        }
        ctx.seed = seed;
        if (prep->parsed()) {
            ctx.command = "prep";
            return run_prep(ctx, in_path, knn);
        }
        if (cluster->parsed()) {
            ctx.command = "cluster";
            return run_cluster(ctx, in_path, cp, dump_dist, dump_tree, trace);
        }
        if (bench->parsed()) {
            ctx.command = "bench";
            return run_bench(ctx, in_path, truth_path, cp);
        }
        if (forecast->parsed()) {
            ctx.command = "forecast";
            train_cfg.seed = seed;
            return run_forecast(ctx, in_path, model, train_cfg);
        }
        if (causal->parsed()) {
            ctx.command = "causal";
            return run_causal(ctx, in_path, target, bins, causal_method, causal_shots, hc, alpha, causal_labels);
        }
    } catch (const infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
