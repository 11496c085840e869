// gyrocal command-line tool: simulation, feature analysis, calibration model
// training, and evaluation pipelines with file-based reports.
//
// Exit codes: 0 success (all declared outputs written and re-parsed),
// 1 usage/configuration error, 2 data error, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gyrocal/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct OutputSet {
    std::vector<std::string> files;

    void add(const std::string& path) { files.push_back(path); }

    // exit 0 requires every declared output to exist and re-parse
    void verify() const {
        for (const auto& path : files) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw gyrocal::Error(gyrocal::ErrorKind::EmptyStream, "missing output " + path);
            if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
                json j;
                in >> j;  // throws on malformed JSON
            } else {
                std::string line;
                if (!std::getline(in, line))
                    throw gyrocal::Error(gyrocal::ErrorKind::EmptyStream, "empty output " + path);
            }
        }
    }
};

void write_text(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gyrocal::Error(gyrocal::ErrorKind::EmptyStream, "cannot write " + path);
    out << content;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

json input_hashes(const gyrocal::PipelineConfig& cfg) {
    json h = json::object();
    if (!cfg.gyro_csv.empty()) h["gyro_csv"] = gyrocal::hash_file(cfg.gyro_csv);
    if (!cfg.ref_csv.empty()) h["ref_csv"] = gyrocal::hash_file(cfg.ref_csv);
    if (!cfg.truth_csv.empty()) h["truth_csv"] = gyrocal::hash_file(cfg.truth_csv);
    return h;
}

json config_echo(const gyrocal::PipelineConfig& cfg, const std::string& command) {
    json j;
    gyrocal::to_json(j, cfg);
    j["command"] = command;
    j["input_hashes"] = input_hashes(cfg);
    return j;
}

void write_run_config(const gyrocal::PipelineConfig& cfg, const std::string& command, OutputSet& outs) {
    const auto path = join_path(cfg.out_dir, "run_config.json");
    write_text(path, config_echo(cfg, command).dump(2) + "\n");
    outs.add(path);
}

std::vector<gyrocal::RefRecord> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gyrocal::Error(gyrocal::ErrorKind::EmptyStream, "cannot open " + path);
    gyrocal::RefSchema schema;
    schema.omega = "omega_true";
    return gyrocal::parse_ref_stream(in, schema).records;
}

gyrocal::AlignedDataset dataset_from_gyro(const std::vector<gyrocal::GyroRecord>& records) {
    using namespace gyrocal;
    AlignedDataset ds;
    ds.feature_names = gyro_channel_names();
    const auto n = static_cast<Eigen::Index>(records.size());
    ds.features.resize(n, kGyroChannelCount);
    ds.target = Eigen::VectorXd::Zero(n);
    ds.timestamps.resize(records.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = records[static_cast<std::size_t>(i)].as_array();
        ds.timestamps[static_cast<std::size_t>(i)] = a[0];
        for (int c = 0; c < kGyroChannelCount; ++c)
            ds.features(i, c) = a[static_cast<std::size_t>(c) + 1];
    }
    std::vector<double> dts;
    for (std::size_t i = 1; i < ds.timestamps.size(); ++i)
        dts.push_back(ds.timestamps[i] - ds.timestamps[i - 1]);
    if (!dts.empty()) {
        std::nth_element(dts.begin(), dts.begin() + static_cast<long>(dts.size() / 2), dts.end());
        ds.sample_interval = dts[dts.size() / 2];
    }
    return ds;
}

void write_eval_outputs(const gyrocal::EvalReport& rep, const gyrocal::PipelineConfig& cfg,
                        OutputSet& outs) {
    json j;
    gyrocal::to_json(j, rep);
    const auto eval_path = join_path(cfg.out_dir, "eval_" + rep.model_kind + ".json");
    write_text(eval_path, j.dump(2) + "\n");
    outs.add(eval_path);
    if (rep.noise_valid) {
        std::ostringstream curve;
        rep.adev.write_csv(curve);
        const auto adev_path = join_path(cfg.out_dir, "adev_" + rep.model_kind + ".csv");
        write_text(adev_path, curve.str());
        outs.add(adev_path);
    }
}

gyrocal::FittedModel train_one(const std::string& kind, const gyrocal::AlignedDataset& train,
                               const gyrocal::PipelineConfig& cfg, const std::string& out_dir,
                               OutputSet& outs,
                               const gyrocal::FeatureAnalysis* shared_analysis = nullptr) {
    using namespace gyrocal;
    FittedModel model;
    if (kind == "linear") {
        model = fit_linear_pipeline(train, cfg);
    } else {
        auto result = train_ml_pipeline(kind, train, cfg, shared_analysis);
        model = std::move(result.model);
        const auto feat_path = join_path(out_dir, "feature_report_" + kind + ".json");
        write_text(feat_path, feature_report_json(result.analysis.corr, result.analysis.importance,
                                                  result.analysis.selected)
                                      .dump(2) +
                                  "\n");
        outs.add(feat_path);
        if (kind == "mlp") {
            json hist = {{"train_mse", result.mlp_history.train_mse},
                         {"val_mse", result.mlp_history.val_mse},
                         {"best_epoch", result.mlp_history.best_epoch},
                         {"best_val_mse", result.mlp_history.best_val_mse}};
            const auto hist_path = join_path(out_dir, "train_history_mlp.json");
            write_text(hist_path, hist.dump(2) + "\n");
            outs.add(hist_path);
        }
    }
    const auto model_path = join_path(out_dir, "model_" + kind + ".json");
    write_text(model_path, model.to_model_json().dump() + "\n");
    outs.add(model_path);
    return model;
}

// --- subcommand implementations ---------------------------------------------

struct SimulateArgs {
    gyrocal::SimConfig sim = gyrocal::default_sim_config();
    gyrocal::RateProfileConfig profile;
    std::string out_dir = ".";
    std::string profile_kind = "random";  // random | staircase
    double staircase_dwell = 12.0;
    double staircase_zero_dwell = 8.0;
    bool noise_free = false;
};

int run_simulate(const SimulateArgs& args) {
    using namespace gyrocal;
    SimConfig sim = args.sim;
    if (args.noise_free) {
        sim.arw_gyro = 0.0;
        sim.bi_gyro = 0.0;
        sim.arw_ref = 0.0;
    }
    RateProfileConfig profile = args.profile;
    profile.sample_rate = sim.sample_rate;

    GroundTruth truth;
    if (args.profile_kind == "staircase") {
        truth = staircase_profile(table_staircase_rates(), args.staircase_dwell,
                                  args.staircase_zero_dwell, profile.ramp_time, sim.sample_rate);
    } else if (args.profile_kind == "random") {
        truth = gen_rate_profile(profile);
    } else {
        throw Error(ErrorKind::InvalidConfig, "unknown profile kind '" + args.profile_kind + "'");
    }
    const SimResult result = simulate_gyro(truth, sim);

    OutputSet outs;
    {
        std::ostringstream ss;
        write_gyro_csv(ss, result.gyro);
        write_text(join_path(args.out_dir, "gyro.csv"), ss.str());
        outs.add(join_path(args.out_dir, "gyro.csv"));
    }
    {
        std::ostringstream ss;
        write_ref_csv(ss, result.ref);
        write_text(join_path(args.out_dir, "ref.csv"), ss.str());
        outs.add(join_path(args.out_dir, "ref.csv"));
    }
    {
        std::ostringstream ss;
        truth.write_csv(ss);
        write_text(join_path(args.out_dir, "truth.csv"), ss.str());
        outs.add(join_path(args.out_dir, "truth.csv"));
    }
    json sidecar;
    sidecar["sim"] = sim;
    sidecar["profile"] = profile;
    sidecar["profile_kind"] = args.profile_kind;
    if (args.profile_kind == "staircase") {
        sidecar["staircase"] = {{"rates", table_staircase_rates()},
                                {"dwell", args.staircase_dwell},
                                {"zero_dwell", args.staircase_zero_dwell}};
    }
    write_text(join_path(args.out_dir, "sim_config.json"), sidecar.dump(2) + "\n");
    outs.add(join_path(args.out_dir, "sim_config.json"));
    outs.verify();
    return 0;
}

int run_features(const gyrocal::PipelineConfig& cfg) {
    using namespace gyrocal;
    const AlignedDataset ds = load_aligned(cfg.gyro_csv, cfg.ref_csv, cfg.max_gap);
    auto [train, test] = split_chronological(ds, cfg.train_frac);
    auto [fit, holdout] = split_chronological(train, cfg.fit_frac);
    const FeatureAnalysis analysis = analyze_features(fit, holdout, cfg);

    OutputSet outs;
    const auto path = join_path(cfg.out_dir, "feature_report.json");
    write_text(path,
               feature_report_json(analysis.corr, analysis.importance, analysis.selected).dump(2) + "\n");
    outs.add(path);
    write_run_config(cfg, "features", outs);
    outs.verify();
    return 0;
}

int run_fit_linear(const gyrocal::PipelineConfig& cfg) {
    using namespace gyrocal;
    const AlignedDataset ds = load_aligned(cfg.gyro_csv, cfg.ref_csv, cfg.max_gap);
    auto [train, test] = split_chronological(ds, cfg.train_frac);

    std::vector<RefRecord> ref(train.timestamps.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        ref[i] = {train.timestamps[i], train.target(static_cast<Eigen::Index>(i))};
    const auto segments = detect_segments(ref, cfg.rate_tol, cfg.min_dwell);
    const auto table = scale_factor_table(train, segments);
    const FittedModel model = fit_linear_pipeline(train, cfg);

    OutputSet outs;
    {
        std::ostringstream ss;
        write_scale_factor_csv(ss, table);
        write_text(join_path(cfg.out_dir, "scale_factors.csv"), ss.str());
        outs.add(join_path(cfg.out_dir, "scale_factors.csv"));
    }
    write_text(join_path(cfg.out_dir, "model_linear.json"), model.to_model_json().dump(2) + "\n");
    outs.add(join_path(cfg.out_dir, "model_linear.json"));
    write_run_config(cfg, "fit-linear", outs);
    outs.verify();
    return 0;
}

int run_train(const gyrocal::PipelineConfig& cfg) {
    using namespace gyrocal;
    const AlignedDataset ds = load_aligned(cfg.gyro_csv, cfg.ref_csv, cfg.max_gap);
    auto [train, test] = split_chronological(ds, cfg.train_frac);
    OutputSet outs;
    train_one(cfg.model_kind, train, cfg, cfg.out_dir, outs);
    write_run_config(cfg, "train", outs);
    outs.verify();
    return 0;
}

int run_calibrate(const gyrocal::PipelineConfig& cfg, const std::string& model_path) {
    using namespace gyrocal;
    std::ifstream min(model_path);
    if (!min) throw Error(ErrorKind::EmptyStream, "cannot open " + model_path);
    json mj;
    min >> mj;
    const FittedModel model = FittedModel::from_model_json(mj);

    std::ifstream gin(cfg.gyro_csv);
    if (!gin) throw Error(ErrorKind::EmptyStream, "cannot open " + cfg.gyro_csv);
    const auto gyro = parse_gyro_stream(gin);
    const AlignedDataset full = dataset_from_gyro(gyro.records);

    AlignedDataset projected;
    const AlignedDataset* rows = &full;
    AlignedDataset trimmed;
    if (model.kind != "linear") {
        projected = project_for_model(full, model.feature_names);
        const auto drop = full.rows() - projected.rows();
        trimmed.feature_names = full.feature_names;
        trimmed.features = full.features.bottomRows(projected.rows());
        trimmed.target = full.target.tail(projected.rows());
        trimmed.timestamps.assign(full.timestamps.begin() + drop, full.timestamps.end());
        trimmed.sample_interval = full.sample_interval;
        rows = &trimmed;
    }
    const Eigen::VectorXd omega_hat = predict_with(model, projected, *rows);

    OutputSet outs;
    std::ostringstream ss;
    ss << "t,omega_hat\n";
    for (Eigen::Index i = 0; i < omega_hat.size(); ++i)
        csv::write_row(ss, {rows->timestamps[static_cast<std::size_t>(i)], omega_hat(i)});
    const auto path = join_path(cfg.out_dir, "calibrated_" + model.kind + ".csv");
    write_text(path, ss.str());
    outs.add(path);
    write_run_config(cfg, "calibrate", outs);
    outs.verify();
    return 0;
}

int run_evaluate(const gyrocal::PipelineConfig& cfg, const std::string& model_path) {
    using namespace gyrocal;
    std::ifstream min(model_path);
    if (!min) throw Error(ErrorKind::EmptyStream, "cannot open " + model_path);
    json mj;
    min >> mj;
    const FittedModel model = FittedModel::from_model_json(mj);

    const AlignedDataset ds = load_aligned(cfg.gyro_csv, cfg.ref_csv, cfg.max_gap);
    std::vector<RefRecord> truth_rows;
    const std::vector<RefRecord>* truth = nullptr;
    if (!cfg.truth_csv.empty()) {
        truth_rows = truth_at_rows(ds, load_truth(cfg.truth_csv));
        truth = &truth_rows;
    }
    EvalReport rep = evaluate_model(model, ds, truth, cfg);
    rep.config_echo = config_echo(cfg, "evaluate");

    OutputSet outs;
    write_eval_outputs(rep, cfg, outs);
    write_run_config(cfg, "evaluate", outs);
    outs.verify();
    return 0;
}

int run_adev(const std::string& input, const std::string& column, double sample_rate,
             const std::string& out_path) {
    using namespace gyrocal;
    std::ifstream in(input);
    if (!in) throw Error(ErrorKind::EmptyStream, "cannot open " + input);
    std::vector<std::string> header;
    if (!csv::read_header(in, header)) throw Error(ErrorKind::EmptyStream, "no header in " + input);
    int tcol = -1, vcol = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "t") tcol = static_cast<int>(i);
        if (header[i] == column) vcol = static_cast<int>(i);
    }
    if (vcol < 0) throw Error(ErrorKind::MissingColumn, "column '" + column + "' not found");
    std::vector<double> ts, values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = csv::split_line(line);
        if (static_cast<std::size_t>(vcol) >= fields.size()) continue;
        const auto v = csv::parse_double(fields[static_cast<std::size_t>(vcol)]);
        if (!v) continue;
        values.push_back(*v);
        if (tcol >= 0 && static_cast<std::size_t>(tcol) < fields.size()) {
            const auto t = csv::parse_double(fields[static_cast<std::size_t>(tcol)]);
            if (t) ts.push_back(*t);
        }
    }
    double fs = sample_rate;
    if (fs <= 0.0) {
        if (ts.size() < 2) throw Error(ErrorKind::InvalidConfig, "cannot infer sample rate; pass --sample-rate");
        std::vector<double> dts;
        for (std::size_t i = 1; i < ts.size(); ++i) dts.push_back(ts[i] - ts[i - 1]);
        std::nth_element(dts.begin(), dts.begin() + static_cast<long>(dts.size() / 2), dts.end());
        fs = 1.0 / dts[dts.size() / 2];
    }
    const auto taus = default_tau_grid(values.size(), fs);
    const AdevCurve curve = overlapping_adev(values, fs, taus);
    std::ostringstream ss;
    curve.write_csv(ss);
    write_text(out_path, ss.str());
    OutputSet outs;
    outs.add(out_path);
    outs.verify();
    return 0;
}

int run_report(const gyrocal::PipelineConfig& cfg) {
    using namespace gyrocal;
    const AlignedDataset ds = load_aligned(cfg.gyro_csv, cfg.ref_csv, cfg.max_gap);
    auto [train, test] = split_chronological(ds, cfg.train_frac);

    std::vector<RefRecord> truth_rows;
    const std::vector<RefRecord>* truth = nullptr;
    if (!cfg.truth_csv.empty()) {
        truth_rows = truth_at_rows(test, load_truth(cfg.truth_csv));
        truth = &truth_rows;
    }

    Eigen::Index align_drop = 0;
    for (int k : cfg.lags) align_drop = std::max<Eigen::Index>(align_drop, k);

    // one feature analysis shared by both learned models
    auto [fit, holdout] = split_chronological(train, cfg.fit_frac);
    const FeatureAnalysis analysis = analyze_features(fit, holdout, cfg);

    OutputSet outs;
    std::vector<EvalReport> reports;
    for (const std::string kind : {"linear", "gbrt", "mlp"}) {
        const FittedModel model = train_one(kind, train, cfg, cfg.out_dir, outs, &analysis);
        EvalReport rep = evaluate_model(model, test, truth, cfg, align_drop);
        rep.config_echo = config_echo(cfg, "report");
        write_eval_outputs(rep, cfg, outs);
        reports.push_back(std::move(rep));
    }
    const auto rows = compare_report(reports);
    {
        std::ostringstream ss;
        write_comparison_csv(ss, rows);
        write_text(join_path(cfg.out_dir, "comparison.csv"), ss.str());
        outs.add(join_path(cfg.out_dir, "comparison.csv"));
    }
    {
        json j = json::array();
        for (const auto& r : rows)
            j.push_back({{"model", r.model_kind},
                         {"mse", r.mse},
                         {"r2", r.r2},
                         {"arw", r.arw},
                         {"bi", r.bi},
                         {"train_seconds", r.train_seconds},
                         {"predict_rows_per_second", r.rows_per_second}});
        write_text(join_path(cfg.out_dir, "comparison.json"), j.dump(2) + "\n");
        outs.add(join_path(cfg.out_dir, "comparison.json"));
    }
    write_run_config(cfg, "report", outs);
    outs.verify();
    return 0;
}

void load_config_file(const std::string& path, gyrocal::PipelineConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw gyrocal::Error(gyrocal::ErrorKind::InvalidConfig, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw gyrocal::Error(gyrocal::ErrorKind::InvalidConfig, std::string("bad config JSON: ") + e.what());
    }
    gyrocal::from_json(j, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEMS gyroscope calibration toolkit: simulate, analyze, train, evaluate"};
    app.require_subcommand(1);

    gyrocal::PipelineConfig cfg;
    std::string config_path;
    std::string model_path;
    std::string adev_input, adev_column = "omega_hat", adev_out = "adev.csv";
    double adev_sample_rate = 0.0;
    SimulateArgs sim_args;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--out-dir", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "master seed for stochastic stages");
    };
    auto add_data = [&](CLI::App* sub, bool need_ref) {
        sub->add_option("--gyro", cfg.gyro_csv, "gyro stream CSV")->required();
        if (need_ref) sub->add_option("--ref", cfg.ref_csv, "reference rate CSV")->required();
        sub->add_option("--max-gap", cfg.max_gap, "max bracketing reference gap, seconds");
    };

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic gyro + reference dataset");
    simulate->add_option("--config", config_path, "JSON sidecar with sim/profile sections");
    simulate->add_option("--out-dir", sim_args.out_dir, "output directory")->required();
    simulate->add_option("--seed", sim_args.sim.seed, "simulation seed");
    simulate->add_option("--profile-seed", sim_args.profile.seed, "rate profile seed");
    simulate->add_option("--duration", sim_args.profile.duration, "seconds of data");
    simulate->add_option("--sample-rate", sim_args.sim.sample_rate, "hertz");
    simulate->add_option("--rate-max", sim_args.profile.rate_max, "max |rate|, deg/s");
    simulate->add_option("--steady-fraction", sim_args.profile.steady_fraction, "zero-rate segment probability");
    simulate->add_option("--dwell-min", sim_args.profile.dwell_min, "seconds");
    simulate->add_option("--dwell-max", sim_args.profile.dwell_max, "seconds");
    simulate->add_option("--ramp-time", sim_args.profile.ramp_time, "seconds");
    simulate->add_option("--profile", sim_args.profile_kind, "random | staircase");
    simulate->add_option("--staircase-dwell", sim_args.staircase_dwell, "seconds per commanded rate");
    simulate->add_option("--staircase-zero-dwell", sim_args.staircase_zero_dwell, "seconds at zero");
    simulate->add_flag("--noise-free", sim_args.noise_free, "zero all noise magnitudes");
    simulate->add_option("--s0", sim_args.sim.s0, "base inverse scale factor");
    simulate->add_option("--omega-sat", sim_args.sim.omega_sat, "compression knee, deg/s");
    simulate->add_option("--kappa-quad", sim_args.sim.kappa_quad, "quadrature coupling");
    simulate->add_option("--beta-phase", sim_args.sim.beta_phase, "deg per hertz");
    simulate->add_option("--mode-split", sim_args.sim.mode_split, "hertz (320-440)");
    simulate->add_option("--arw-gyro", sim_args.sim.arw_gyro, "deg/sqrt(h)");
    simulate->add_option("--bi-gyro", sim_args.sim.bi_gyro, "deg/h");
    simulate->add_option("--bi-corr-time", sim_args.sim.bi_corr_time, "seconds");
    simulate->add_option("--arw-ref", sim_args.sim.arw_ref, "deg/sqrt(h)");

    auto* features = app.add_subcommand("features", "correlation / importance / selection report");
    add_data(features, true);
    add_common(features);
    features->add_option("--repeats", cfg.importance_repeats, "permutation repeats");
    features->add_option("--train-frac", cfg.train_frac, "chronological train fraction");

    auto* fit_linear = app.add_subcommand("fit-linear", "controlled-rate scale factor table + model");
    add_data(fit_linear, true);
    add_common(fit_linear);
    fit_linear->add_option("--rate-tol", cfg.rate_tol, "segment tolerance, deg/s");
    fit_linear->add_option("--min-dwell", cfg.min_dwell, "segment minimum duration, s");
    fit_linear->add_flag("--average-all", cfg.linear_average_all, "average all segments instead of the first");
    fit_linear->add_option("--train-frac", cfg.train_frac, "chronological train fraction");

    auto* train = app.add_subcommand("train", "train a calibration model on the train split");
    add_data(train, true);
    add_common(train);
    train->add_option("--model", cfg.model_kind, "linear | gbrt | mlp")->required();
    train->add_option("--train-frac", cfg.train_frac, "chronological train fraction");
    train->add_option("--lags", cfg.lags, "lag steps for feature augmentation");
    train->add_option("--rounds", cfg.gbrt.rounds, "gbrt boosting rounds");
    train->add_option("--learning-rate", cfg.gbrt.learning_rate, "gbrt shrinkage");
    train->add_option("--max-depth", cfg.gbrt.max_depth, "gbrt tree depth");
    train->add_option("--lambda", cfg.gbrt.lambda, "gbrt leaf L2");
    train->add_option("--gamma", cfg.gbrt.gamma, "gbrt split penalty");
    train->add_option("--subsample", cfg.gbrt.subsample, "gbrt row fraction per round");
    train->add_option("--colsample", cfg.gbrt.colsample, "gbrt feature fraction per round");
    train->add_option("--epochs", cfg.mlp.epochs, "mlp max epochs");
    train->add_option("--batch-size", cfg.mlp.batch_size, "mlp batch size");
    train->add_option("--step-size", cfg.mlp.step_size, "mlp step size");
    train->add_option("--patience", cfg.mlp.patience, "mlp early-stopping patience");

    auto* calibrate = app.add_subcommand("calibrate", "apply a model to a gyro stream");
    calibrate->add_option("--gyro", cfg.gyro_csv, "gyro stream CSV")->required();
    calibrate->add_option("--model", model_path, "model JSON")->required();
    add_common(calibrate);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a model against a reference stream");
    add_data(evaluate, true);
    add_common(evaluate);
    evaluate->add_option("--model", model_path, "model JSON")->required();
    evaluate->add_option("--truth", cfg.truth_csv, "ground-truth CSV for the steady slice");

    auto* adev = app.add_subcommand("adev", "overlapping Allan deviation of a CSV column");
    adev->add_option("--input", adev_input, "input CSV")->required();
    adev->add_option("--column", adev_column, "column name (default omega_hat)");
    adev->add_option("--sample-rate", adev_sample_rate, "hertz; inferred from t if omitted");
    adev->add_option("--out", adev_out, "output curve CSV");

    auto* report = app.add_subcommand("report", "full three-model comparison pipeline");
    add_data(report, true);
    add_common(report);
    report->add_option("--truth", cfg.truth_csv, "ground-truth CSV for the steady slice");
    report->add_option("--train-frac", cfg.train_frac, "chronological train fraction");
    report->add_option("--lags", cfg.lags, "lag steps for feature augmentation");
    report->add_option("--epochs", cfg.mlp.epochs, "mlp max epochs");
    report->add_option("--rounds", cfg.gbrt.rounds, "gbrt boosting rounds");

    // pre-scan for --config so file values become the defaults and explicit
    // flags override them during the regular parse
    std::string pre_config;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") pre_config = argv[i + 1];
    const bool is_simulate = argc > 1 && std::string(argv[1]) == "simulate";
    try {
        if (!pre_config.empty()) {
            if (is_simulate) {
                std::ifstream in(pre_config);
                if (!in) throw gyrocal::Error(gyrocal::ErrorKind::InvalidConfig, "cannot open " + pre_config);
                json j;
                in >> j;
                if (j.contains("sim")) sim_args.sim = j.at("sim").get<gyrocal::SimConfig>();
                if (j.contains("profile")) sim_args.profile = j.at("profile").get<gyrocal::RateProfileConfig>();
                if (j.contains("profile_kind")) sim_args.profile_kind = j.at("profile_kind").get<std::string>();
            } else {
                load_config_file(pre_config, cfg);
            }
        }
    } catch (const gyrocal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: bad config JSON: " << e.what() << "\n";
        return 1;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors map to 1; --help stays 0
    }

    try {
        cfg.gbrt.seed = cfg.seed;
        cfg.mlp.seed = cfg.seed;

        if (simulate->parsed()) return run_simulate(sim_args);
        if (features->parsed()) return run_features(cfg);
        if (fit_linear->parsed()) return run_fit_linear(cfg);
        if (train->parsed()) return run_train(cfg);
        if (calibrate->parsed()) return run_calibrate(cfg, model_path);
        if (evaluate->parsed()) return run_evaluate(cfg, model_path);
        if (adev->parsed()) return run_adev(adev_input, adev_column, adev_sample_rate, adev_out);
        if (report->parsed()) return run_report(cfg);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const gyrocal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gyrocal::exit_code_for(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
