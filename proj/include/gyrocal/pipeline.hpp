// End-to-end orchestration shared by the CLI and the acceptance suite:
// dataset loading, feature analysis, model training for the three
// calibration methods, evaluation with steady-state noise metrics, and the
// side-by-side comparison report.
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gyrocal/dataio.hpp"
#include "gyrocal/error.hpp"
#include "gyrocal/features.hpp"
#include "gyrocal/gbrt.hpp"
#include "gyrocal/linear.hpp"
#include "gyrocal/metrics.hpp"
#include "gyrocal/mlp.hpp"
#include "gyrocal/sim.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return hex64(h);
}

inline std::string hash_doubles(std::span<const double> a, std::span<const double> b = {}) {
    std::uint64_t h = fnv1a64(a.data(), a.size() * sizeof(double));
    if (!b.empty()) h = fnv1a64(b.data(), b.size() * sizeof(double), h);
    return hex64(h);
}

struct PipelineConfig {
    std::string gyro_csv;
    std::string ref_csv;
    std::string truth_csv;  // optional
    std::string out_dir = ".";
    std::string model_kind = "gbrt";  // linear | gbrt | mlp

    double max_gap = 0.5;     // seconds
    double train_frac = 0.8;  // chronological split
    double fit_frac = 0.85;   // train -> (fit, val) for early stopping / importance

    double dup_threshold = 0.99;
    double pair_threshold = 0.85;
    int importance_repeats = 5;
    double importance_rate_cap = 1.0e9;  // deg/s, optional rate cap for the probe slice
    std::vector<int> lags = {1, 2, 3, 4, 5};

    GbrtParams gbrt;
    TrainConfig mlp;
    std::array<int, 3> mlp_hidden = {64, 64, 64};

    double rate_tol = 0.5;    // deg/s, segment detection
    double min_dwell = 2.0;   // seconds
    double linear_fit_rate_cap = 40.0;  // deg/s, "initial linear region" bound
    bool linear_average_all = false;

    int residual_bins = 60;
    double steady_tol = 0.05;  // deg/s, steady-slice selection on ground truth
    std::uint64_t seed = 42;
};

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = {{"gyro_csv", c.gyro_csv},
         {"ref_csv", c.ref_csv},
         {"truth_csv", c.truth_csv},
         {"out_dir", c.out_dir},
         {"model_kind", c.model_kind},
         {"max_gap", c.max_gap},
         {"train_frac", c.train_frac},
         {"fit_frac", c.fit_frac},
         {"dup_threshold", c.dup_threshold},
         {"pair_threshold", c.pair_threshold},
         {"importance_repeats", c.importance_repeats},
         {"importance_rate_cap", c.importance_rate_cap},
         {"lags", c.lags},
         {"gbrt",
          {{"rounds", c.gbrt.rounds},
           {"learning_rate", c.gbrt.learning_rate},
           {"max_depth", c.gbrt.max_depth},
           {"lambda", c.gbrt.lambda},
           {"gamma", c.gbrt.gamma},
           {"min_child_weight", c.gbrt.min_child_weight},
           {"subsample", c.gbrt.subsample},
           {"colsample", c.gbrt.colsample},
           {"seed", c.gbrt.seed}}},
         {"mlp",
          {{"epochs", c.mlp.epochs},
           {"batch_size", c.mlp.batch_size},
           {"step_size", c.mlp.step_size},
           {"moment1_decay", c.mlp.moment1_decay},
           {"moment2_decay", c.mlp.moment2_decay},
           {"epsilon_stabilizer", c.mlp.epsilon_stabilizer},
           {"patience", c.mlp.patience},
           {"seed", c.mlp.seed}}},
         {"mlp_hidden", c.mlp_hidden},
         {"rate_tol", c.rate_tol},
         {"min_dwell", c.min_dwell},
         {"linear_fit_rate_cap", c.linear_fit_rate_cap},
         {"linear_average_all", c.linear_average_all},
         {"residual_bins", c.residual_bins},
         {"steady_tol", c.steady_tol},
         {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    c.gyro_csv = j.value("gyro_csv", c.gyro_csv);
    c.ref_csv = j.value("ref_csv", c.ref_csv);
    c.truth_csv = j.value("truth_csv", c.truth_csv);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.model_kind = j.value("model_kind", c.model_kind);
    c.max_gap = j.value("max_gap", c.max_gap);
    c.train_frac = j.value("train_frac", c.train_frac);
    c.fit_frac = j.value("fit_frac", c.fit_frac);
    c.dup_threshold = j.value("dup_threshold", c.dup_threshold);
    c.pair_threshold = j.value("pair_threshold", c.pair_threshold);
    c.importance_repeats = j.value("importance_repeats", c.importance_repeats);
    c.importance_rate_cap = j.value("importance_rate_cap", c.importance_rate_cap);
    c.lags = j.value("lags", c.lags);
    if (j.contains("gbrt")) {
        const auto& g = j.at("gbrt");
        c.gbrt.rounds = g.value("rounds", c.gbrt.rounds);
        c.gbrt.learning_rate = g.value("learning_rate", c.gbrt.learning_rate);
        c.gbrt.max_depth = g.value("max_depth", c.gbrt.max_depth);
        c.gbrt.lambda = g.value("lambda", c.gbrt.lambda);
        c.gbrt.gamma = g.value("gamma", c.gbrt.gamma);
        c.gbrt.min_child_weight = g.value("min_child_weight", c.gbrt.min_child_weight);
        c.gbrt.subsample = g.value("subsample", c.gbrt.subsample);
        c.gbrt.colsample = g.value("colsample", c.gbrt.colsample);
        c.gbrt.seed = g.value("seed", c.gbrt.seed);
    }
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        c.mlp.epochs = m.value("epochs", c.mlp.epochs);
        c.mlp.batch_size = m.value("batch_size", c.mlp.batch_size);
        c.mlp.step_size = m.value("step_size", c.mlp.step_size);
        c.mlp.moment1_decay = m.value("moment1_decay", c.mlp.moment1_decay);
        c.mlp.moment2_decay = m.value("moment2_decay", c.mlp.moment2_decay);
        c.mlp.epsilon_stabilizer = m.value("epsilon_stabilizer", c.mlp.epsilon_stabilizer);
        c.mlp.patience = m.value("patience", c.mlp.patience);
        c.mlp.seed = m.value("seed", c.mlp.seed);
    }
    if (j.contains("mlp_hidden")) {
        auto v = j.at("mlp_hidden").get<std::vector<int>>();
        if (v.size() != 3) throw Error(ErrorKind::InvalidConfig, "mlp_hidden must have 3 widths");
        c.mlp_hidden = {v[0], v[1], v[2]};
    }
    c.rate_tol = j.value("rate_tol", c.rate_tol);
    c.min_dwell = j.value("min_dwell", c.min_dwell);
    c.linear_fit_rate_cap = j.value("linear_fit_rate_cap", c.linear_fit_rate_cap);
    c.linear_average_all = j.value("linear_average_all", c.linear_average_all);
    c.residual_bins = j.value("residual_bins", c.residual_bins);
    c.steady_tol = j.value("steady_tol", c.steady_tol);
    c.seed = j.value("seed", c.seed);
}

// --- dataset loading -------------------------------------------------------

inline AlignedDataset load_aligned(const std::string& gyro_csv, const std::string& ref_csv,
                                   double max_gap) {
    std::ifstream gin(gyro_csv);
    if (!gin) throw Error(ErrorKind::EmptyStream, "cannot open " + gyro_csv);
    std::ifstream rin(ref_csv);
    if (!rin) throw Error(ErrorKind::EmptyStream, "cannot open " + ref_csv);
    const auto gyro = parse_gyro_stream(gin);
    const auto ref = parse_ref_stream(rin);
    return align(gyro.records, ref.records, max_gap);
}

// --- feature analysis ------------------------------------------------------

struct FeatureAnalysis {
    CorrelationMatrix corr;
    ImportanceReport importance;
    std::vector<std::string> selected;
};

namespace detail {
// Rows at or below rate_cap, excluding ramp transients (successive-target
// jumps), whose large residuals swamp the importance measurement.
inline AlignedDataset low_rate_rows(const AlignedDataset& ds, double rate_cap,
                                    double jump_tol = 1.0) {
    std::vector<Eigen::Index> keep;
    const auto n = ds.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(ds.target(i)) > rate_cap) continue;
        if (i > 0 && std::abs(ds.target(i) - ds.target(i - 1)) > jump_tol) continue;
        if (i + 1 < n && std::abs(ds.target(i + 1) - ds.target(i)) > jump_tol) continue;
        keep.push_back(i);
    }
    AlignedDataset out;
    out.feature_names = ds.feature_names;
    out.sample_interval = ds.sample_interval;
    out.features.resize(static_cast<Eigen::Index>(keep.size()), ds.cols());
    out.target.resize(static_cast<Eigen::Index>(keep.size()));
    out.timestamps.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(keep[k]);
        out.target(static_cast<Eigen::Index>(k)) = ds.target(keep[k]);
        out.timestamps.push_back(ds.timestamps[static_cast<std::size_t>(keep[k])]);
    }
    return out;
}
}  // namespace detail

// Correlation on the fit slice; permutation importance of a boosted-tree
// probe on the held-out slice; selection per the correlation / importance
// rule.
//
// The probe is trained and scored on steady and low-rate rows. Over the full
// rate range the in-phase channel dominates every split and the remaining
// channels never enter the trees; at low rates the in-phase structure is
// quickly exhausted and the trees turn to the error channels, which is where
// their information lives.
inline FeatureAnalysis analyze_features(const AlignedDataset& fit, const AlignedDataset& holdout,
                                        const PipelineConfig& cfg) {
    FeatureAnalysis out;
    out.corr = correlation_matrix(fit.features, fit.feature_names);

    // the probe trains on every fit row; importance is measured on the
    // held-out dwell rows (rate transients excluded), whose low residual
    // keeps the MSE deltas well above the measurement noise. The split
    // penalty keeps pure-noise splits out of the trees, so a channel the
    // model has no use for scores an exact zero and the selection
    // tie-breaks stay deterministic.
    AlignedDataset probe_holdout = detail::low_rate_rows(holdout, cfg.importance_rate_cap);
    if (probe_holdout.rows() < 32) probe_holdout = holdout;

    GbrtParams probe;
    probe.rounds = 300;
    probe.max_depth = 8;
    probe.learning_rate = 0.25;
    probe.gamma = 0.05;
    probe.min_child_weight = 10.0;
    probe.seed = cfg.seed;
    const GbrtModel probe_model = train_gbrt(fit, probe);
    Predictor predictor = [&probe_model](const Eigen::MatrixXd& X) {
        return predict_gbrt(probe_model, X);
    };
    out.importance = permutation_importance(predictor, probe_holdout.features, probe_holdout.target,
                                            probe_holdout.feature_names, cfg.importance_repeats,
                                            cfg.seed);
    out.selected = select_features(out.corr, out.importance, cfg.dup_threshold, cfg.pair_threshold);
    return out;
}

// --- trained model wrapper -------------------------------------------------

struct FittedModel {
    std::string kind;  // linear | gbrt | mlp
    LinearModel linear;
    GbrtModel gbrt;
    MlpModel mlp;
    std::vector<std::string> feature_names;  // model input columns (ml kinds)
    double train_seconds = 0.0;

    nlohmann::json to_model_json() const {
        nlohmann::json j;
        if (kind == "linear") {
            to_json(j, linear);
        } else if (kind == "gbrt") {
            to_json(j, gbrt);
        } else {
            to_json(j, mlp);
            j["feature_names"] = feature_names;
        }
        j["kind"] = kind;
        return j;
    }

    static FittedModel from_model_json(const nlohmann::json& j) {
        FittedModel m;
        m.kind = j.at("kind").get<std::string>();
        if (m.kind == "linear") {
            from_json(j, m.linear);
        } else if (m.kind == "gbrt") {
            from_json(j, m.gbrt);
            m.feature_names = m.gbrt.feature_names;
        } else if (m.kind == "mlp") {
            from_json(j, m.mlp);
            m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        } else {
            throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + m.kind + "'");
        }
        return m;
    }
};

// Splits a lagged name "base_lag_k" into its base column and lag.
inline std::pair<std::string, int> parse_lagged_name(const std::string& name) {
    const auto pos = name.rfind("_lag_");
    if (pos == std::string::npos) return {name, 0};
    return {name.substr(0, pos), std::stoi(name.substr(pos + 5))};
}

// Rebuilds exactly the columns a trained model expects from a full-channel
// aligned dataset (applying whatever lags the names encode).
inline AlignedDataset project_for_model(const AlignedDataset& full,
                                        const std::vector<std::string>& names) {
    std::vector<std::string> bases;
    std::vector<int> lags;
    for (const auto& n : names) {
        auto [base, k] = parse_lagged_name(n);
        if (std::find(bases.begin(), bases.end(), base) == bases.end()) bases.push_back(base);
        if (k > 0 && std::find(lags.begin(), lags.end(), k) == lags.end()) lags.push_back(k);
    }
    std::sort(lags.begin(), lags.end());
    AlignedDataset selected = select_columns(full, bases);
    AlignedDataset lagged = add_lags(selected, lags);
    return select_columns(lagged, names);
}

inline Eigen::VectorXd predict_with(const FittedModel& model, const AlignedDataset& projected,
                                    const AlignedDataset& full_at_same_rows) {
    if (model.kind == "linear") {
        const int col = full_at_same_rows.column_index("sense_in");
        if (col < 0) throw Error(ErrorKind::NameMismatch, "linear predict: no sense_in column");
        return model.linear.s_linear * full_at_same_rows.features.col(col);
    }
    if (model.kind == "gbrt") return predict_gbrt(model.gbrt, projected.features);
    return predict_mlp(model.mlp, projected.features);
}

// --- training --------------------------------------------------------------

inline FittedModel fit_linear_pipeline(const AlignedDataset& train, const PipelineConfig& cfg) {
    std::vector<RefRecord> ref(train.timestamps.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        ref[i] = {train.timestamps[i], train.target(static_cast<Eigen::Index>(i))};
    const auto segments = detect_segments(ref, cfg.rate_tol, cfg.min_dwell);

    FittedModel out;
    out.kind = "linear";
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.linear_average_all) {
        double acc = 0.0;
        int count = 0;
        LinearModel last;
        for (const auto& seg : segments) {
            if (seg.steady) continue;
            last = fit_scale_factor(train, seg);
            acc += last.s_linear;
            ++count;
        }
        if (count == 0) throw Error(ErrorKind::DegenerateSegment, "linear: no nonzero-rate segment found");
        out.linear = last;
        out.linear.s_linear = acc / count;
    } else {
        // the scale factor comes from the initial linear region: the first
        // controlled segment at a moderate rate; fall back to the first
        // nonzero segment when no low-rate segment exists
        const RateSegment* first = nullptr;
        for (const auto& seg : segments)
            if (!seg.steady && std::abs(seg.commanded_rate) <= cfg.linear_fit_rate_cap) {
                first = &seg;
                break;
            }
        if (!first) {
            for (const auto& seg : segments)
                if (!seg.steady) {
                    first = &seg;
                    break;
                }
        }
        if (!first) throw Error(ErrorKind::DegenerateSegment, "linear: no nonzero-rate segment found");
        out.linear = fit_scale_factor(train, *first);
    }
    out.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct MlTrainingResult {
    FittedModel model;
    FeatureAnalysis analysis;
    TrainHistory mlp_history;  // empty for gbrt
};

// Shared ML path: feature analysis on the unlagged training data, selection,
// lag augmentation, then the requested learner. A precomputed analysis may be
// passed to avoid repeating it per model.
inline MlTrainingResult train_ml_pipeline(const std::string& kind, const AlignedDataset& train,
                                          const PipelineConfig& cfg,
                                          const FeatureAnalysis* shared_analysis = nullptr) {
    MlTrainingResult out;
    if (shared_analysis) {
        out.analysis = *shared_analysis;
    } else {
        auto [fit, holdout] = split_chronological(train, cfg.fit_frac);
        out.analysis = analyze_features(fit, holdout, cfg);
    }

    const AlignedDataset selected = select_columns(train, out.analysis.selected);
    const AlignedDataset lagged = add_lags(selected, cfg.lags);

    out.model.kind = kind;
    out.model.feature_names = lagged.feature_names;
    const auto t0 = std::chrono::steady_clock::now();
    if (kind == "gbrt") {
        out.model.gbrt = train_gbrt(lagged, cfg.gbrt);
    } else if (kind == "mlp") {
        auto [lf, lv] = split_chronological(lagged, cfg.fit_frac);
        auto [m, hist] = train_mlp(lf, lv, cfg.mlp, cfg.mlp_hidden);
        out.model.mlp = std::move(m);
        out.mlp_history = std::move(hist);
    } else {
        throw Error(ErrorKind::InvalidConfig, "train: unknown model kind '" + kind + "'");
    }
    out.model.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// --- steady-state slice ----------------------------------------------------

struct SteadySlice {
    std::size_t begin = 0;
    std::size_t end = 0;  // half-open row range
    bool from_truth = false;

    std::size_t size() const { return end - begin; }
};

// Longest contiguous run of rows whose ground-truth rate is within tol of
// zero; falls back to zero-rate segment detection on the reference target.
inline SteadySlice steady_slice(const AlignedDataset& ds,
                                const std::vector<RefRecord>* truth,  // interpolated to ds rows
                                double steady_tol, double rate_tol, double min_dwell) {
    SteadySlice best;
    if (truth) {
        std::size_t i = 0;
        const auto& tr = *truth;
        while (i < tr.size()) {
            if (std::abs(tr[i].omega) > steady_tol) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < tr.size() && std::abs(tr[j].omega) <= steady_tol) ++j;
            if (j - i > best.size()) best = {i, j, true};
            i = j;
        }
        return best;
    }
    std::vector<RefRecord> ref(ds.timestamps.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        ref[i] = {ds.timestamps[i], ds.target(static_cast<Eigen::Index>(i))};
    const auto segments = detect_segments(ref, rate_tol, min_dwell);
    for (const auto& seg : segments) {
        if (!seg.steady) continue;
        const auto lo = static_cast<std::size_t>(
            std::lower_bound(ds.timestamps.begin(), ds.timestamps.end(), seg.start) -
            ds.timestamps.begin());
        const auto hi = static_cast<std::size_t>(
            std::upper_bound(ds.timestamps.begin(), ds.timestamps.end(), seg.end) -
            ds.timestamps.begin());
        if (hi - lo > best.size()) best = {lo, hi, false};
    }
    return best;
}

// --- evaluation ------------------------------------------------------------

struct EvalReport {
    std::string model_kind;
    double mse = 0.0;
    double r2 = 0.0;
    NoiseMetrics noise;
    bool noise_valid = false;
    std::string arw_mode;  // "slope_fit" or "tau1_read"
    double residual_mean = 0.0, residual_std = 0.0, residual_max_abs = 0.0;
    double train_seconds = 0.0, predict_seconds = 0.0, rows_per_second = 0.0;
    std::size_t n_test = 0;
    std::size_t steady_rows = 0;
    std::string test_hash;
    AdevCurve adev;  // steady-slice ADEV of the calibrated output
    nlohmann::json config_echo;
};

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = {{"model_kind", r.model_kind},
         {"mse", r.mse},
         {"r2", r.r2},
         {"noise",
          {{"arw", r.noise.arw},
           {"bi", r.noise.bi},
           {"bi_tau", r.noise.bi_tau},
           {"bi_at_boundary", r.noise.bi_at_boundary},
           {"flicker_corrected", r.noise.flicker_corrected},
           {"slope_fit_tau_lo", r.noise.slope_fit_tau_lo},
           {"slope_fit_tau_hi", r.noise.slope_fit_tau_hi},
           {"valid", r.noise_valid},
           {"arw_mode", r.arw_mode}}},
         {"residuals", {{"mean", r.residual_mean}, {"std", r.residual_std}, {"max_abs", r.residual_max_abs}}},
         {"timing",
          {{"train_seconds", r.train_seconds},
           {"predict_seconds", r.predict_seconds},
           {"rows_per_second", r.rows_per_second}}},
         {"n_test", r.n_test},
         {"steady_rows", r.steady_rows},
         {"test_hash", r.test_hash},
         {"config", r.config_echo}};
}

// align_drop forces at least that many leading rows to be discarded so
// reports over models with different lag requirements cover identical rows.
inline EvalReport evaluate_model(const FittedModel& model, const AlignedDataset& test_full,
                                 const std::vector<RefRecord>* truth_at_rows,
                                 const PipelineConfig& cfg, Eigen::Index align_drop = 0) {
    EvalReport rep;
    rep.model_kind = model.kind;

    AlignedDataset projected;
    Eigen::Index model_drop = 0;
    if (model.kind != "linear") {
        projected = project_for_model(test_full, model.feature_names);
        model_drop = test_full.rows() - projected.rows();
    }
    const Eigen::Index total_drop = std::max(align_drop, model_drop);
    if (model.kind != "linear" && total_drop > model_drop) {
        const auto keep = projected.rows() - (total_drop - model_drop);
        AlignedDataset shrunk;
        shrunk.feature_names = projected.feature_names;
        shrunk.features = projected.features.bottomRows(keep);
        shrunk.target = projected.target.tail(keep);
        shrunk.timestamps.assign(projected.timestamps.end() - keep, projected.timestamps.end());
        shrunk.sample_interval = projected.sample_interval;
        projected = std::move(shrunk);
    }
    const AlignedDataset* rows = &test_full;
    AlignedDataset full_trimmed;
    if (total_drop > 0) {
        const auto keep = test_full.rows() - total_drop;
        full_trimmed.feature_names = test_full.feature_names;
        full_trimmed.features = test_full.features.bottomRows(keep);
        full_trimmed.target = test_full.target.tail(keep);
        full_trimmed.timestamps.assign(test_full.timestamps.begin() + total_drop, test_full.timestamps.end());
        full_trimmed.sample_interval = test_full.sample_interval;
        rows = &full_trimmed;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd pred = predict_with(model, projected, *rows);
    rep.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.train_seconds = model.train_seconds;
    rep.n_test = static_cast<std::size_t>(rows->rows());
    rep.rows_per_second = rep.predict_seconds > 0.0
                              ? static_cast<double>(rep.n_test) / rep.predict_seconds
                              : 0.0;

    std::vector<double> y(rows->target.data(), rows->target.data() + rows->target.size());
    std::vector<double> yhat(pred.data(), pred.data() + pred.size());
    rep.mse = mse(y, yhat);
    rep.r2 = r2(y, yhat);
    const auto res = residual_report(y, yhat, cfg.residual_bins);
    rep.residual_mean = res.mean;
    rep.residual_std = res.stddev;
    rep.residual_max_abs = res.max_abs;
    rep.test_hash = hash_doubles(std::span<const double>(rows->timestamps),
                                 std::span<const double>(y));

    // steady-state noise metrics on the calibrated output
    std::vector<RefRecord> truth_trimmed;
    const std::vector<RefRecord>* truth = nullptr;
    if (truth_at_rows) {
        const std::size_t drop = truth_at_rows->size() - rep.n_test;
        truth_trimmed.assign(truth_at_rows->begin() + static_cast<long>(drop), truth_at_rows->end());
        truth = &truth_trimmed;
    }
    const SteadySlice slice = steady_slice(*rows, truth, cfg.steady_tol, cfg.rate_tol, cfg.min_dwell);
    rep.steady_rows = slice.size();
    if (slice.size() >= 16) {
        const std::vector<double> steady(yhat.begin() + static_cast<long>(slice.begin),
                                         yhat.begin() + static_cast<long>(slice.end));
        const double fs = 1.0 / rows->sample_interval;
        const auto taus = default_tau_grid(steady.size(), fs);
        rep.adev = overlapping_adev(steady, fs, taus);
        BiasInstability bi = extract_bi(rep.adev, false);
        rep.noise.bi = bi.bi;
        rep.noise.bi_tau = bi.bi_tau;
        rep.noise.bi_at_boundary = bi.at_boundary;
        try {
            rep.noise.arw = extract_arw(rep.adev, &rep.noise.slope_fit_tau_lo, &rep.noise.slope_fit_tau_hi);
            rep.arw_mode = "slope_fit";
        } catch (const Error&) {
            // no clean -1/2 region: read the curve at the tau closest to 1 s
            std::size_t at = 0;
            for (std::size_t i = 1; i < rep.adev.taus.size(); ++i)
                if (std::abs(std::log(rep.adev.taus[i])) < std::abs(std::log(rep.adev.taus[at]))) at = i;
            rep.noise.arw = 60.0 * rep.adev.sigma[at] * std::sqrt(rep.adev.taus[at]);
            rep.arw_mode = "tau1_read";
        }
        rep.noise_valid = true;
    }
    return rep;
}

// --- comparison ------------------------------------------------------------

struct ComparisonRow {
    std::string model_kind;
    double mse = 0.0, r2 = 0.0, arw = 0.0, bi = 0.0;
    double train_seconds = 0.0, rows_per_second = 0.0;
};

inline std::vector<ComparisonRow> compare_report(const std::vector<EvalReport>& reports) {
    if (reports.size() < 2) throw Error(ErrorKind::InvalidConfig, "compare: need at least 2 reports");
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].n_test != reports[0].n_test || reports[i].test_hash != reports[0].test_hash)
            throw Error(ErrorKind::InconsistentTestSets, "compare: reports cover different test data");
    }
    std::vector<ComparisonRow> rows;
    for (const auto& r : reports)
        rows.push_back({r.model_kind, r.mse, r.r2, r.noise.arw, r.noise.bi, r.train_seconds,
                        r.rows_per_second});
    return rows;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "model,mse,r2,arw,bi,train_seconds,predict_rows_per_second\n";
    for (const auto& r : rows) {
        out << r.model_kind << ',' << csv::format_double(r.mse) << ',' << csv::format_double(r.r2)
            << ',' << csv::format_double(r.arw) << ',' << csv::format_double(r.bi) << ','
            << csv::format_double(r.train_seconds) << ',' << csv::format_double(r.rows_per_second)
            << '\n';
    }
}

// Interpolates a (t, omega_true) stream onto dataset timestamps.
inline std::vector<RefRecord> truth_at_rows(const AlignedDataset& ds,
                                            const std::vector<RefRecord>& truth) {
    std::vector<RefRecord> out;
    out.reserve(ds.timestamps.size());
    std::size_t k = 0;
    for (double t : ds.timestamps) {
        while (k + 2 < truth.size() && truth[k + 1].t < t) ++k;
        double omega;
        if (t <= truth.front().t) {
            omega = truth.front().omega;
        } else if (t >= truth.back().t) {
            omega = truth.back().omega;
        } else {
            const double gap = truth[k + 1].t - truth[k].t;
            const double w = gap > 0.0 ? (t - truth[k].t) / gap : 0.0;
            omega = truth[k].omega + w * (truth[k + 1].omega - truth[k].omega);
        }
        out.push_back({t, omega});
    }
    return out;
}

}  // namespace gyrocal
