// Feature analysis: Pearson correlation matrix, permutation importance,
// the correlation/importance-driven selection rule, and lagged-feature
// augmentation of an aligned dataset.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "gyrocal/error.hpp"
#include "gyrocal/metrics.hpp"
#include "gyrocal/rng.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd rho;               // d x d, Pearson coefficients
    std::vector<bool> zero_variance;   // flagged columns produce NaN entries

    double operator()(int i, int j) const { return rho(i, j); }
};

inline CorrelationMatrix correlation_matrix(const Eigen::MatrixXd& X,
                                            const std::vector<std::string>& names) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (n < 2) throw Error(ErrorKind::TooFewSamples, "correlation: need at least 2 rows");
    if (static_cast<Eigen::Index>(names.size()) != d)
        throw Error(ErrorKind::NameMismatch, "correlation: names/columns mismatch");

    CorrelationMatrix out;
    out.names = names;
    out.rho.resize(d, d);
    out.zero_variance.assign(static_cast<std::size_t>(d), false);

    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
    Eigen::VectorXd norm(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        norm(j) = centered.col(j).norm();
        if (norm(j) == 0.0) out.zero_variance[static_cast<std::size_t>(j)] = true;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            double r;
            if (i == j) {
                r = out.zero_variance[static_cast<std::size_t>(i)] ? nan : 1.0;
            } else if (out.zero_variance[static_cast<std::size_t>(i)] ||
                       out.zero_variance[static_cast<std::size_t>(j)]) {
                r = nan;
            } else {
                r = centered.col(i).dot(centered.col(j)) / (norm(i) * norm(j));
                r = std::clamp(r, -1.0, 1.0);
            }
            out.rho(i, j) = r;
            out.rho(j, i) = r;
        }
    }
    return out;
}

struct ImportanceReport {
    std::vector<std::string> names;
    std::vector<double> scores;  // mean MSE increase under column permutation
    int repeats = 0;
    std::uint64_t seed = 0;
};

// Batch predictor over a feature matrix.
using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// score_j = mean over repeats of MSE(y, predict(X with column j permuted))
//           - MSE(y, predict(X)).
// Each (feature, repeat) pair draws its permutation from an independently
// derived stream, so results do not depend on evaluation order.
inline ImportanceReport permutation_importance(const Predictor& model, const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y,
                                               const std::vector<std::string>& names, int repeats,
                                               std::uint64_t seed) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (repeats < 1) throw Error(ErrorKind::InvalidConfig, "importance: repeats must be >= 1");
    if (y.size() != n) throw Error(ErrorKind::DimensionMismatch, "importance: X/y row mismatch");
    if (static_cast<Eigen::Index>(names.size()) != d)
        throw Error(ErrorKind::NameMismatch, "importance: names/columns mismatch");
    if (n < 2) throw Error(ErrorKind::TooFewSamples, "importance: need at least 2 rows");

    const Eigen::VectorXd base_pred = model(X);
    if (base_pred.size() != n) throw Error(ErrorKind::DimensionMismatch, "importance: predictor output size");
    const double base_mse = (base_pred - y).squaredNorm() / static_cast<double>(n);

    ImportanceReport rep;
    rep.names = names;
    rep.repeats = repeats;
    rep.seed = seed;
    rep.scores.assign(static_cast<std::size_t>(d), 0.0);

    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    Eigen::MatrixXd Xp = X;
    for (Eigen::Index j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int r = 0; r < repeats; ++r) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(repeats) +
                                          static_cast<std::uint64_t>(r)));
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            for (Eigen::Index i = 0; i < n; ++i)
                Xp(i, j) = X(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), j);
            const Eigen::VectorXd pred = model(Xp);
            acc += (pred - y).squaredNorm() / static_cast<double>(n) - base_mse;
        }
        Xp.col(j) = X.col(j);
        rep.scores[static_cast<std::size_t>(j)] = acc / repeats;
    }
    return rep;
}

// Correlation/importance selection:
//  (a) members of a near-duplicate pair (|rho| >= dup_threshold) keep only
//      the higher-importance feature;
//  (b) members of a correlated pair (|rho| >= pair_threshold) keep only the
//      higher-importance feature unless both rank in the top half by
//      importance, in which case both stay.
// Ties break toward the lower column index. Output preserves column order.
inline std::vector<std::string> select_features(const CorrelationMatrix& corr,
                                                const ImportanceReport& imp,
                                                double dup_threshold = 0.99,
                                                double pair_threshold = 0.85) {
    if (corr.names != imp.names) throw Error(ErrorKind::NameMismatch, "select: correlation/importance name lists differ");
    const auto d = static_cast<std::size_t>(corr.rho.rows());
    if (imp.scores.size() != d) throw Error(ErrorKind::NameMismatch, "select: importance size mismatch");

    // rank by (score desc, index asc); top half = first ceil(d/2) ranks
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (imp.scores[a] != imp.scores[b]) return imp.scores[a] > imp.scores[b];
        return a < b;
    });
    std::vector<std::size_t> rank(d);
    for (std::size_t pos = 0; pos < d; ++pos) rank[order[pos]] = pos;
    const std::size_t top_half = (d + 1) / 2;

    // lower-priority member of a pair: smaller score, ties toward higher index
    auto loser = [&](std::size_t i, std::size_t j) {
        if (imp.scores[i] != imp.scores[j]) return imp.scores[i] < imp.scores[j] ? i : j;
        return i > j ? i : j;
    };

    std::vector<bool> dropped(d, false);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double r = std::abs(corr.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            if (std::isnan(r)) continue;
            if (r >= dup_threshold) {
                dropped[loser(i, j)] = true;
            } else if (r >= pair_threshold) {
                if (rank[i] < top_half && rank[j] < top_half) continue;
                dropped[loser(i, j)] = true;
            }
        }
    }
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < d; ++i)
        if (!dropped[i]) kept.push_back(corr.names[i]);
    return kept;
}

// Appends, for every feature f and lag k, a column f_lag_k holding f shifted
// k rows into the past. The first max(lags) rows are dropped so no fabricated
// values enter the series head.
inline AlignedDataset add_lags(const AlignedDataset& ds, const std::vector<int>& lags) {
    if (lags.empty()) return ds;
    int max_lag = 0;
    for (int k : lags) {
        if (k <= 0) throw Error(ErrorKind::InvalidConfig, "lags must be positive");
        max_lag = std::max(max_lag, k);
    }
    const auto n = ds.rows();
    const auto d = ds.cols();
    if (static_cast<Eigen::Index>(max_lag) >= n)
        throw Error(ErrorKind::LagTooLarge, "max lag must be smaller than the row count");

    const auto n_out = n - max_lag;
    const auto d_out = d + d * static_cast<Eigen::Index>(lags.size());
    AlignedDataset out;
    out.features.resize(n_out, d_out);
    out.feature_names.reserve(static_cast<std::size_t>(d_out));
    for (const auto& name : ds.feature_names) out.feature_names.push_back(name);
    for (Eigen::Index j = 0; j < d; ++j)
        for (int k : lags)
            out.feature_names.push_back(ds.feature_names[static_cast<std::size_t>(j)] + "_lag_" +
                                        std::to_string(k));

    out.features.leftCols(d) = ds.features.middleRows(max_lag, n_out);
    Eigen::Index col = d;
    for (Eigen::Index j = 0; j < d; ++j)
        for (int k : lags)
            out.features.col(col++) = ds.features.col(j).segment(max_lag - k, n_out);

    out.target = ds.target.tail(n_out);
    out.timestamps.assign(ds.timestamps.begin() + max_lag, ds.timestamps.end());
    out.sample_interval = ds.sample_interval;
    return out;
}

// Projects a dataset onto a subset of its columns (by name, given order).
inline AlignedDataset select_columns(const AlignedDataset& ds, const std::vector<std::string>& names) {
    AlignedDataset out;
    out.timestamps = ds.timestamps;
    out.target = ds.target;
    out.sample_interval = ds.sample_interval;
    out.feature_names = names;
    out.features.resize(ds.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const int src = ds.column_index(names[j]);
        if (src < 0) throw Error(ErrorKind::NameMismatch, "unknown feature '" + names[j] + "'");
        out.features.col(static_cast<Eigen::Index>(j)) = ds.features.col(src);
    }
    return out;
}

// JSON report: {names, rho (row-major), scores, selected}.
inline nlohmann::json feature_report_json(const CorrelationMatrix& corr, const ImportanceReport& imp,
                                          const std::vector<std::string>& selected) {
    std::vector<double> rho_flat;
    rho_flat.reserve(static_cast<std::size_t>(corr.rho.size()));
    for (Eigen::Index i = 0; i < corr.rho.rows(); ++i)
        for (Eigen::Index j = 0; j < corr.rho.cols(); ++j) rho_flat.push_back(corr.rho(i, j));
    return {{"names", corr.names},
            {"rho", rho_flat},
            {"scores", imp.scores},
            {"repeats", imp.repeats},
            {"seed", imp.seed},
            {"selected", selected}};
}

}  // namespace gyrocal
