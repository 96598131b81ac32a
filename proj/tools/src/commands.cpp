#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "chanchart/dataset_io.hpp"
#include "chanchart/errors.hpp"
#include "chanchart/features.hpp"
#include "chanchart/metrics.hpp"
#include "chanchart/model.hpp"
#include "chanchart/selection.hpp"
#include "chanchart/trainer.hpp"
#include "chanchart/util.hpp"
#include "svg.hpp"

namespace chanchart::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Sub-seed streams of the master seed; the scenario consumes the master
// directly (it derives its own trajectory/scatterer/noise streams).
enum SeedStream : std::uint64_t {
    kSelectionStream = 101,
    kModelInitStream = 102,
    kTrainerStream = 103,
    kEvalSubsampleStream = 104,
};

void require_input(const char* key, const std::string& path) {
    if (path.empty()) throw ConfigError(std::string("key ") + key + ": no path configured");
    if (!fs::exists(path))
        throw ConfigError(std::string("key ") + key + ": file not found: " + path);
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "sammon" || name == "sammon_siamese") return LossKind::sammon_siamese;
    if (name == "triplet") return LossKind::triplet;
    if (name == "split_triplet") return LossKind::split_triplet;
    throw ConfigError("key loss: expected sammon | triplet | split_triplet, got '" + name + "'");
}

struct ResolvedRun {
    double t_close = 0.0;
    double t_far = 0.0;
    double chart_extent = 0.0;
    SelectionConfig sel;
};

ResolvedRun resolve_run(const RunConfig& cfg, const Dataset& ds) {
    ResolvedRun r;
    r.t_close = cfg.t_close > 0.0 ? cfg.t_close : 3.0 * infer_sampling_interval(ds);
    r.t_far = cfg.t_far > 0.0 ? cfg.t_far : 50.0 * r.t_close;
    r.chart_extent = cfg.chart_extent > 0.0 ? cfg.chart_extent : cfg.v_max * r.t_far;
    r.sel.t_close = r.t_close;
    r.sel.t_far = r.t_far;
    r.sel.v_min = cfg.v_min;
    r.sel.v_max = cfg.v_max;
    r.sel.intersection_quantile = cfg.intersection_quantile;
    r.sel.triplets_per_anchor = cfg.triplets_per_anchor;
    r.sel.max_negative_retries = cfg.max_negative_retries;
    r.sel.reidentify = cfg.reidentify;
    r.sel.rng_seed = derive_seed(cfg.seed, kSelectionStream);
    return r;
}

json provenance_base(const char* command, const RunConfig& cfg) {
    json j;
    j["command"] = command;
    json c = json::object();
    for (const auto& [k, v] : config_items(cfg)) c[k] = v;
    j["config"] = c;
    j["config_hash"] = config_hash(cfg);
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

void write_chart_csv(const fs::path& path, const Dataset& ds,
                     const std::vector<Eigen::Vector2d>& points) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    const bool truth = ds.has_ground_truth();
    std::fputs(truth ? "index,timestamp,chart_x,chart_y,truth_x,truth_y\n"
                     : "index,timestamp,chart_x,chart_y\n",
               f);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& s = ds.samples[i];
        if (truth)
            std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, s.timestamp, points[i](0),
                         points[i](1), (*s.ground_truth)(0), (*s.ground_truth)(1));
        else
            std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", i, s.timestamp, points[i](0), points[i](1));
    }
    if (std::fclose(f) != 0) throw IoError("failed to finalize " + path.string());
}

std::vector<Eigen::Vector2d> truth_points(const Dataset& ds) {
    std::vector<Eigen::Vector2d> t;
    if (!ds.has_ground_truth()) return t;
    t.reserve(ds.samples.size());
    for (const auto& s : ds.samples) t.push_back(*s.ground_truth);
    return t;
}

struct TrainedRun {
    TrainResult result;
    ResolvedRun resolved;
    TripletSelection selection;
    std::size_t n_inertial = 0;
};

// Shared by cmd_train and cmd_compare: selection + training on an
// already-loaded dataset, artifacts under out_dir.
TrainedRun run_training(const RunConfig& cfg, const Dataset& ds,
                        const std::vector<FeatureVector>& features, const fs::path& out_dir) {
    TrainedRun run;
    run.resolved = resolve_run(cfg, ds);

    run.selection = select_triplets(ds, features, run.resolved.sel);
    auto inertial = select_inertial(ds, run.selection.triplets, run.resolved.sel);
    run.n_inertial = inertial.size();

    const auto grid = CentroidGrid::make(cfg.grid_side, run.resolved.chart_extent);
    auto model = init_model(feature_length(ds.meta), grid, derive_seed(cfg.seed, kModelInitStream));

    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.adam_beta1 = cfg.adam_beta1;
    tc.adam_beta2 = cfg.adam_beta2;
    tc.adam_eps = cfg.adam_eps;
    tc.loss.kind = parse_loss_kind(cfg.loss);
    tc.loss.lambda = cfg.lambda;
    tc.loss.b_pos = run.resolved.sel.b_pos();
    tc.loss.b_neg = run.resolved.sel.b_neg();
    tc.loss.mu = cfg.mu;
    tc.rng_seed = derive_seed(cfg.seed, kTrainerStream);
    tc.resample_each_epoch = cfg.resample_each_epoch;

    run.result = train(std::move(model), ds, features, run.selection.triplets, inertial, tc,
                       &run.resolved.sel);

    fs::create_directories(out_dir);
    const fs::path ckpt =
        cfg.checkpoint.empty() ? out_dir / "checkpoint.ccm" : fs::path(cfg.checkpoint);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    write_model(run.result.model, ckpt);
    write_loss_history_csv(run.result.history, out_dir / "loss_history.csv");
    write_triplets_csv(run.selection.triplets, out_dir / "triplets.csv");

    json j = provenance_base("train", cfg);
    j["derived"] = {{"t_close", run.resolved.t_close},
                    {"t_far", run.resolved.t_far},
                    {"chart_extent", run.resolved.chart_extent},
                    {"b_pos", run.resolved.sel.b_pos()},
                    {"b_neg", run.resolved.sel.b_neg()},
                    {"feature_length", feature_length(ds.meta)},
                    {"feature_threshold", run.selection.feature_threshold}};
    j["seeds"] = {{"master", cfg.seed},
                  {"selection", run.resolved.sel.rng_seed},
                  {"model_init", derive_seed(cfg.seed, kModelInitStream)},
                  {"trainer", tc.rng_seed}};
    j["counts"] = {{"samples", ds.samples.size()},
                   {"triplets", run.selection.triplets.size()},
                   {"inertial_triples", run.n_inertial},
                   {"skipped_anchors", run.selection.skipped_anchors},
                   {"reidentified", run.selection.reidentified_count}};
    j["artifacts"] = {ckpt.string(), (out_dir / "loss_history.csv").string(),
                      (out_dir / "triplets.csv").string()};
    write_json(out_dir / "train_provenance.json", j);
    return run;
}

std::optional<MetricsReport> run_evaluation(const RunConfig& cfg, const Dataset& ds,
                                            const std::vector<FeatureVector>& features,
                                            const ChartModel& model, const fs::path& out_dir,
                                            const std::string& title) {
    const auto points = embed_dataset(model, features);
    fs::create_directories(out_dir);
    write_chart_csv(out_dir / "chart.csv", ds, points);
    write_scatter_svg(out_dir / "chart.svg", points, truth_points(ds), title);

    if (!ds.has_ground_truth()) return std::nullopt;

    EvaluateOptions opts;
    opts.max_n = cfg.eval_max_n;
    opts.subsample_seed = derive_seed(cfg.seed, kEvalSubsampleStream);
    const auto report =
        evaluate(points_to_matrix(truth_points(ds)), points_to_matrix(points), opts);

    std::ofstream os(out_dir / "metrics.json");
    if (!os) throw IoError("cannot open metrics.json for writing");
    os << metrics_to_json(report);
    return report;
}

void print_metrics(const MetricsReport& r) {
    std::printf("  KS  %.4f\n  SR  %.4f\n", r.ks, r.sr);
    for (const auto& [k, v] : r.tw) std::printf("  TW(K=%d)  %.4f\n", k, v);
    for (const auto& [k, v] : r.ct) std::printf("  CT(K=%d)  %.4f\n", k, v);
    std::printf("  evaluated on %d samples (subsample seed %llu)\n", r.n_evaluated,
                static_cast<unsigned long long>(r.subsample_seed));
}

} // namespace

int cmd_generate(const RunConfig& cfg) {
    const ScenarioConfig sc = build_scenario(cfg);
    sc.validate();
    const Trajectory traj = generate_trajectory(sc);
    const Dataset ds = synthesize_csi(traj, sc);

    const fs::path out(cfg.dataset);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_dataset(ds, out);

    json j = provenance_base("generate", cfg);
    j["counts"] = {{"samples", ds.samples.size()},
                   {"street_segments", street_segment_count(sc)}};
    j["artifacts"] = {out.string()};
    write_json(out.string() + ".provenance.json", j);

    const double duration =
        traj.points.empty() ? 0.0 : traj.points.back().timestamp - traj.points.front().timestamp;
    std::printf("wrote %s: N=%zu, B=%d, W=%d, duration=%.1f s\n", out.string().c_str(),
                ds.samples.size(), ds.meta.array.antenna_count(), int(ds.meta.n_subcarriers),
                duration);
    return 0;
}

int cmd_featurize(const RunConfig& cfg) {
    require_input("dataset", cfg.dataset);
    const Dataset ds = read_dataset(cfg.dataset);
    auto features = extract_features(ds, cfg.threads);
    if (cfg.feature_group > 1) features = average_features(features, ds, cfg.feature_group);

    fs::create_directories(cfg.out_dir);
    const fs::path out = fs::path(cfg.out_dir) / "features.csv";
    write_features_csv(features, out);

    json j = provenance_base("featurize", cfg);
    j["counts"] = {{"features", features.size()}, {"feature_length", feature_length(ds.meta)}};
    j["artifacts"] = {out.string()};
    write_json(fs::path(cfg.out_dir) / "featurize_provenance.json", j);

    std::printf("wrote %s: %zu features of length %d\n", out.string().c_str(), features.size(),
                feature_length(ds.meta));
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    require_input("dataset", cfg.dataset);
    if (cfg.feature_group > 1)
        throw ConfigError("key feature_group: averaging is a featurize-only option");
    const Dataset ds = read_dataset(cfg.dataset);
    const auto features = extract_features(ds, cfg.threads);

    const TrainedRun run = run_training(cfg, ds, features, cfg.out_dir);

    std::printf("trained %s (mu=%g) on %zu samples, F=%d\n", cfg.loss.c_str(), cfg.mu,
                ds.samples.size(), feature_length(ds.meta));
    std::printf("selection: %zu triplets, %zu inertial triples, %zu skipped anchors, "
                "%zu reidentified\n",
                run.selection.triplets.size(), run.n_inertial, run.selection.skipped_anchors,
                run.selection.reidentified_count);
    std::printf("windows: t_close=%.3f s, t_far=%.3f s; bounds: b_pos=%.3f m, b_neg=%.3f m; "
                "chart extent %.1f m\n",
                run.resolved.t_close, run.resolved.t_far, run.resolved.sel.b_pos(),
                run.resolved.sel.b_neg(), run.resolved.chart_extent);
    std::printf("objective: per-batch mean main loss + mu * per-batch mean inertial loss\n");
    if (!run.result.history.empty())
        std::printf("loss: epoch 1 main %.6g -> epoch %zu main %.6g (inertial %.6g -> %.6g)\n",
                    run.result.history.front().mean_main_loss, run.result.history.size(),
                    run.result.history.back().mean_main_loss,
                    run.result.history.front().mean_inertial_loss,
                    run.result.history.back().mean_inertial_loss);
    std::printf("artifacts in %s: checkpoint.ccm, loss_history.csv, triplets.csv, "
                "train_provenance.json\n",
                cfg.out_dir.c_str());
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    require_input("dataset", cfg.dataset);
    const std::string ckpt =
        cfg.checkpoint.empty() ? (fs::path(cfg.out_dir) / "checkpoint.ccm").string()
                               : cfg.checkpoint;
    require_input("checkpoint", ckpt);
    if (cfg.feature_group > 1)
        throw ConfigError("key feature_group: averaging is a featurize-only option");

    const Dataset ds = read_dataset(cfg.dataset);
    const ChartModel model = read_model(ckpt);
    const auto features = extract_features(ds, cfg.threads);

    const std::string title = cfg.label.empty() ? "channel chart" : cfg.label;
    const auto report = run_evaluation(cfg, ds, features, model, cfg.out_dir, title);

    json j = provenance_base("evaluate", cfg);
    j["counts"] = {{"samples", ds.samples.size()}};
    j["derived"] = {{"checkpoint", ckpt},
                    {"eval_subsample_seed", derive_seed(cfg.seed, kEvalSubsampleStream)}};
    json artifacts = {(fs::path(cfg.out_dir) / "chart.csv").string(),
                      (fs::path(cfg.out_dir) / "chart.svg").string()};
    if (report) artifacts.push_back((fs::path(cfg.out_dir) / "metrics.json").string());
    j["artifacts"] = artifacts;
    write_json(fs::path(cfg.out_dir) / "evaluate_provenance.json", j);

    std::printf("embedded %zu samples with %s\n", ds.samples.size(), ckpt.c_str());
    if (report) {
        print_metrics(*report);
    } else {
        std::printf("dataset carries no ground truth; metrics skipped (chart.csv/chart.svg "
                    "written)\n");
    }
    return 0;
}

int cmd_compare(const RunConfig& base, const std::vector<std::string>& config_files) {
    if (config_files.size() < 2)
        throw ConfigError("compare needs at least 2 run config files");
    for (const auto& f : config_files) require_input("config", f);

    Dataset ds;
    std::string dataset_source;
    if (fs::exists(base.dataset)) {
        ds = read_dataset(base.dataset);
        dataset_source = base.dataset;
    } else {
        const ScenarioConfig sc = build_scenario(base);
        ds = synthesize_csi(generate_trajectory(sc), sc);
        dataset_source = "generated (seed " + std::to_string(base.seed) + ")";
    }
    const auto features = extract_features(ds, base.threads);

    struct Row {
        std::string label;
        double ks, sr, tw, ct;
    };
    std::vector<Row> rows;
    json runs_prov = json::array();

    for (const auto& file : config_files) {
        RunConfig rc = base;
        apply_file(rc, file);
        rc.seed = base.seed; // comparisons share the master seed
        rc.dataset = base.dataset;
        const std::string label = rc.label.empty() ? fs::path(file).stem().string() : rc.label;
        const fs::path run_dir = fs::path(base.out_dir) / label;

        try {
            std::printf("[%zu/%zu] %s\n", rows.size() + 1, config_files.size(), label.c_str());
            std::fflush(stdout);
            rc.checkpoint.clear(); // per-run checkpoint lives in run_dir
            const TrainedRun run = run_training(rc, ds, features, run_dir);
            const auto report =
                run_evaluation(rc, ds, features, run.result.model, run_dir, label);
            if (!report)
                throw DegenerateInputError("compare requires a dataset with ground truth");
            const int k5 = report->tw.rbegin()->first;
            rows.push_back({label, report->ks, report->sr, report->tw.at(k5), report->ct.at(k5)});
            runs_prov.push_back({{"config_file", file},
                                 {"label", label},
                                 {"config_hash", config_hash(rc)},
                                 {"k_5pct", k5}});
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: compare run '%s' failed\n", file.c_str());
            throw;
        }
    }

    fs::create_directories(base.out_dir);
    const fs::path csv_path = fs::path(base.out_dir) / "compare.csv";
    std::FILE* f = std::fopen(csv_path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + csv_path.string() + " for writing");
    std::fputs("label,ks,sr,tw_5pct,ct_5pct\n", f);
    for (const auto& r : rows)
        std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g\n", r.label.c_str(), r.ks, r.sr, r.tw, r.ct);
    if (std::fclose(f) != 0) throw IoError("failed to finalize " + csv_path.string());

    json j = provenance_base("compare", base);
    j["dataset_source"] = dataset_source;
    j["runs"] = runs_prov;
    j["artifacts"] = {csv_path.string()};
    write_json(fs::path(base.out_dir) / "compare_provenance.json", j);

    std::printf("\n%-24s %10s %10s %10s %10s\n", "method", "KS", "SR", "TW(5%)", "CT(5%)");
    for (const auto& r : rows)
        std::printf("%-24s %10.4f %10.4f %10.4f %10.4f\n", r.label.c_str(), r.ks, r.sr, r.tw,
                    r.ct);
    std::printf("\nwrote %s\n", csv_path.string().c_str());
    return 0;
}

} // namespace chanchart::cli
