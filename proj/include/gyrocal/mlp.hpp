// Multilayer perceptron regressor: three ELU hidden layers trained by
// mini-batch gradient descent with first/second-moment adaptive steps.
// Inputs and target are z-score standardized from training statistics; the
// voltage and frequency channels span many orders of magnitude otherwise.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "gyrocal/error.hpp"
#include "gyrocal/rng.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

inline double elu(double x, double alpha = 1.0) {
    return x > 0.0 ? x : alpha * std::expm1(x);
}

inline double elu_grad(double x, double alpha = 1.0) {
    return x > 0.0 ? 1.0 : alpha * std::exp(x);
}

struct MlpModel {
    std::vector<int> layer_dims;           // [d, h1, h2, h3, 1]
    std::vector<Eigen::MatrixXd> weights;  // per layer, (out x in)
    std::vector<Eigen::VectorXd> biases;   // per layer
    double elu_alpha = 1.0;
    Eigen::VectorXd input_mean, input_std;  // d
    double target_mean = 0.0;
    double target_std = 1.0;

    int input_dim() const { return layer_dims.empty() ? 0 : layer_dims.front(); }
    std::size_t layer_count() const { return weights.size(); }
};

struct TrainConfig {
    int epochs = 5000;
    int batch_size = 256;
    double step_size = 1e-3;
    double moment1_decay = 0.9;
    double moment2_decay = 0.999;
    double epsilon_stabilizer = 1e-8;
    int patience = 50;  // epochs without val improvement; <= 0 disables
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 0) throw Error(ErrorKind::InvalidConfig, "mlp: epochs must be >= 0");
        if (batch_size < 1) throw Error(ErrorKind::InvalidConfig, "mlp: batch_size must be >= 1");
        if (!(step_size > 0.0)) throw Error(ErrorKind::InvalidConfig, "mlp: step_size must be > 0");
        if (moment1_decay < 0.0 || moment1_decay >= 1.0 || moment2_decay < 0.0 || moment2_decay >= 1.0)
            throw Error(ErrorKind::InvalidConfig, "mlp: moment decays must be in [0,1)");
    }
};

struct TrainHistory {
    std::vector<double> train_mse;  // per epoch, raw target units
    std::vector<double> val_mse;
    int best_epoch = -1;
    double best_val_mse = std::numeric_limits<double>::infinity();
};

// Weights ~ N(0, 2/fan_in), biases zero. Exactly three hidden layers.
inline MlpModel init_mlp(int d, const std::array<int, 3>& hidden, std::uint64_t seed) {
    if (d < 1) throw Error(ErrorKind::InvalidDims, "mlp: input dim must be >= 1");
    for (int h : hidden)
        if (h < 1) throw Error(ErrorKind::InvalidDims, "mlp: hidden widths must be >= 1");

    MlpModel m;
    m.layer_dims = {d, hidden[0], hidden[1], hidden[2], 1};
    Rng rng(derive_seed(seed, 0x317));
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const int fan_in = m.layer_dims[l];
        const int fan_out = m.layer_dims[l + 1];
        const double std_dev = std::sqrt(2.0 / fan_in);
        Eigen::MatrixXd W(fan_out, fan_in);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = rng.normal(0.0, std_dev);
        m.weights.push_back(std::move(W));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    m.input_mean = Eigen::VectorXd::Zero(d);
    m.input_std = Eigen::VectorXd::Ones(d);
    return m;
}

namespace detail {

// Batched forward pass on standardized inputs; columns are samples.
// Returns the standardized network output (1 x batch); optionally keeps the
// pre-activations and activations for backprop.
inline Eigen::RowVectorXd mlp_forward_std(const MlpModel& m, const Eigen::MatrixXd& Xstd,
                                          std::vector<Eigen::MatrixXd>* pre = nullptr,
                                          std::vector<Eigen::MatrixXd>* act = nullptr) {
    Eigen::MatrixXd a = Xstd;  // (d x batch)
    if (act) act->push_back(a);
    const std::size_t L = m.weights.size();
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z = (m.weights[l] * a).colwise() + m.biases[l];
        if (pre) pre->push_back(z);
        if (l + 1 == L) {
            a = z;  // linear output layer
        } else {
            a = z.unaryExpr([&](double v) { return elu(v, m.elu_alpha); });
        }
        if (act) act->push_back(a);
    }
    return a.row(0);
}

inline Eigen::MatrixXd standardize_inputs(const MlpModel& m, const Eigen::MatrixXd& X) {
    // X is (n x d) row-per-sample; output is (d x n) column-per-sample
    Eigen::MatrixXd Xstd = X.transpose();
    Xstd.colwise() -= m.input_mean;
    Xstd.array().colwise() /= m.input_std.array();
    return Xstd;
}

struct MlpGradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

// Mean-squared-error loss over the batch on the standardized scale, with
// full backprop. Returns the loss.
inline double mlp_loss_and_grad(const MlpModel& m, const Eigen::MatrixXd& Xstd,
                                const Eigen::RowVectorXd& ystd, MlpGradients* grads) {
    std::vector<Eigen::MatrixXd> pre, act;
    const Eigen::RowVectorXd out = mlp_forward_std(m, Xstd, &pre, &act);
    const auto batch = static_cast<double>(Xstd.cols());
    const Eigen::RowVectorXd resid = out - ystd;
    const double loss = resid.squaredNorm() / batch;
    if (!grads) return loss;

    const std::size_t L = m.weights.size();
    grads->dW.resize(L);
    grads->db.resize(L);
    // dL/dz for the output layer (1 x batch)
    Eigen::MatrixXd dz = (2.0 / batch) * resid;
    for (std::size_t l = L; l-- > 0;) {
        grads->dW[l] = dz * act[l].transpose();
        grads->db[l] = dz.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd da = m.weights[l].transpose() * dz;
            dz = da.array() * pre[l - 1].unaryExpr([&](double v) { return elu_grad(v, m.elu_alpha); }).array();
        }
    }
    return loss;
}

}  // namespace detail

inline double forward(const MlpModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.input_dim()) throw Error(ErrorKind::DimensionMismatch, "mlp forward: input size");
    Eigen::MatrixXd col = x;
    const Eigen::MatrixXd xstd =
        (col.colwise() - m.input_mean).array().colwise() / m.input_std.array();
    const double out = detail::mlp_forward_std(m, xstd)(0);
    return out * m.target_std + m.target_mean;
}

inline Eigen::VectorXd predict_mlp(const MlpModel& m, const Eigen::MatrixXd& X) {
    if (X.cols() != m.input_dim()) throw Error(ErrorKind::DimensionMismatch, "mlp predict: feature count");
    const Eigen::MatrixXd Xstd = detail::standardize_inputs(m, X);
    Eigen::RowVectorXd out = detail::mlp_forward_std(m, Xstd);
    return (out.transpose().array() * m.target_std + m.target_mean).matrix();
}

inline std::pair<MlpModel, TrainHistory> train_mlp(const AlignedDataset& train,
                                                   const AlignedDataset& val, const TrainConfig& cfg,
                                                   const std::array<int, 3>& hidden = {64, 64, 64}) {
    cfg.validate();
    const auto n = train.rows();
    const auto d = train.cols();
    if (n < 1) throw Error(ErrorKind::EmptyTrainingSet, "mlp: empty training set");
    if (val.cols() != d) throw Error(ErrorKind::DimensionMismatch, "mlp: train/val feature mismatch");
    if (!train.features.allFinite() || !train.target.allFinite())
        throw Error(ErrorKind::NonFiniteInput, "mlp: non-finite training values");

    MlpModel model = init_mlp(static_cast<int>(d), hidden, cfg.seed);
    // standardization statistics from the training split only
    model.input_mean = train.features.colwise().mean();
    Eigen::MatrixXd centered = train.features.rowwise() - model.input_mean.transpose();
    model.input_std = (centered.array().square().colwise().sum() / static_cast<double>(n))
                          .sqrt()
                          .matrix()
                          .transpose();
    for (Eigen::Index j = 0; j < model.input_std.size(); ++j)
        if (!(model.input_std(j) > 0.0)) model.input_std(j) = 1.0;  // constant column guard
    model.target_mean = train.target.mean();
    model.target_std = std::sqrt((train.target.array() - model.target_mean).square().sum() /
                                 static_cast<double>(n));
    if (!(model.target_std > 0.0)) model.target_std = 1.0;

    const Eigen::MatrixXd Xstd = detail::standardize_inputs(model, train.features);
    const Eigen::RowVectorXd ystd =
        ((train.target.array() - model.target_mean) / model.target_std).matrix().transpose();
    const Eigen::MatrixXd Xval = detail::standardize_inputs(model, val.features);
    const Eigen::RowVectorXd yval =
        ((val.target.array() - model.target_mean) / model.target_std).matrix().transpose();
    const double raw_scale = model.target_std * model.target_std;

    TrainHistory history;
    if (cfg.epochs == 0) return {model, history};

    // adaptive-moment state
    const std::size_t L = model.weights.size();
    std::vector<Eigen::MatrixXd> mW(L), vW(L);
    std::vector<Eigen::VectorXd> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mW[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        vW[l] = mW[l];
        mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        vb[l] = mb[l];
    }

    MlpModel best = model;
    Rng rng(derive_seed(cfg.seed, 0xba7c));
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    long step = 0;
    int stall = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const auto b = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Eigen::MatrixXd xb(d, b);
            Eigen::RowVectorXd yb(b);
            for (Eigen::Index k = 0; k < b; ++k) {
                const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(start + k)]);
                xb.col(k) = Xstd.col(src);
                yb(k) = ystd(src);
            }
            detail::MlpGradients grads;
            detail::mlp_loss_and_grad(model, xb, yb, &grads);
            ++step;
            const double corr1 = 1.0 - std::pow(cfg.moment1_decay, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(cfg.moment2_decay, static_cast<double>(step));
            for (std::size_t l = 0; l < L; ++l) {
                mW[l] = cfg.moment1_decay * mW[l] + (1.0 - cfg.moment1_decay) * grads.dW[l];
                vW[l] = cfg.moment2_decay * vW[l] +
                        (1.0 - cfg.moment2_decay) * grads.dW[l].array().square().matrix();
                mb[l] = cfg.moment1_decay * mb[l] + (1.0 - cfg.moment1_decay) * grads.db[l];
                vb[l] = cfg.moment2_decay * vb[l] +
                        (1.0 - cfg.moment2_decay) * grads.db[l].array().square().matrix();
                model.weights[l].array() -=
                    cfg.step_size * (mW[l].array() / corr1) /
                    ((vW[l].array() / corr2).sqrt() + cfg.epsilon_stabilizer);
                model.biases[l].array() -=
                    cfg.step_size * (mb[l].array() / corr1) /
                    ((vb[l].array() / corr2).sqrt() + cfg.epsilon_stabilizer);
            }
        }
        const double train_loss = detail::mlp_loss_and_grad(model, Xstd, ystd, nullptr) * raw_scale;
        const double val_loss = detail::mlp_loss_and_grad(model, Xval, yval, nullptr) * raw_scale;
        history.train_mse.push_back(train_loss);
        history.val_mse.push_back(val_loss);
        if (val_loss < history.best_val_mse) {
            history.best_val_mse = val_loss;
            history.best_epoch = epoch;
            best = model;
            stall = 0;
        } else if (cfg.patience > 0 && ++stall >= cfg.patience) {
            break;
        }
    }
    return {best, history};
}

// Central-difference gradient verification over every parameter. Returns the
// maximum relative error; per_layer (optional) receives one entry per layer
// covering its weights and biases.
inline double grad_check(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double eps, std::vector<double>* per_layer = nullptr) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidEps, "grad_check: eps must be > 0");
    if (X.rows() == 0) throw Error(ErrorKind::EmptyTrainingSet, "grad_check: empty batch");
    if (X.cols() != model.input_dim() || y.size() != X.rows())
        throw Error(ErrorKind::DimensionMismatch, "grad_check: batch shape");

    MlpModel m = model;  // perturbed copy
    const Eigen::MatrixXd Xstd = detail::standardize_inputs(m, X);
    const Eigen::RowVectorXd ystd =
        ((y.array() - m.target_mean) / m.target_std).matrix().transpose();

    detail::MlpGradients grads;
    detail::mlp_loss_and_grad(m, Xstd, ystd, &grads);

    const std::size_t L = m.weights.size();
    if (per_layer) per_layer->assign(L, 0.0);
    double worst = 0.0;
    auto check_param = [&](double& theta, double analytic, std::size_t layer) {
        const double saved = theta;
        theta = saved + eps;
        const double lp = detail::mlp_loss_and_grad(m, Xstd, ystd, nullptr);
        theta = saved - eps;
        const double lm = detail::mlp_loss_and_grad(m, Xstd, ystd, nullptr);
        theta = saved;
        const double numeric = (lp - lm) / (2.0 * eps);
        const double rel = std::abs(analytic - numeric) /
                           std::max(std::abs(analytic) + std::abs(numeric), 1e-12);
        worst = std::max(worst, rel);
        if (per_layer) (*per_layer)[layer] = std::max((*per_layer)[layer], rel);
    };
    for (std::size_t l = 0; l < L; ++l) {
        for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c)
                check_param(m.weights[l](r, c), grads.dW[l](r, c), l);
        for (Eigen::Index r = 0; r < m.biases[l].size(); ++r)
            check_param(m.biases[l](r), grads.db[l](r), l);
    }
    return worst;
}

// --- JSON serialization: dims, elu_alpha, row-major weights/biases,
//     standardization statistics. ---

inline void to_json(nlohmann::json& j, const MlpModel& m) {
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (const auto& W : m.weights) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(W.size()));
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) flat.push_back(W(r, c));
        weights.push_back(flat);
    }
    for (const auto& b : m.biases)
        biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    j = {{"kind", "mlp"},
         {"layer_dims", m.layer_dims},
         {"elu_alpha", m.elu_alpha},
         {"weights", weights},
         {"biases", biases},
         {"input_mean", std::vector<double>(m.input_mean.data(), m.input_mean.data() + m.input_mean.size())},
         {"input_std", std::vector<double>(m.input_std.data(), m.input_std.data() + m.input_std.size())},
         {"target_mean", m.target_mean},
         {"target_std", m.target_std}};
}

inline void from_json(const nlohmann::json& j, MlpModel& m) {
    m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    m.elu_alpha = j.at("elu_alpha").get<double>();
    m.weights.clear();
    m.biases.clear();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const int rows = m.layer_dims[l + 1];
        const int cols = m.layer_dims[l];
        const auto flat = weights.at(l).get<std::vector<double>>();
        if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw Error(ErrorKind::InvalidDims, "mlp json: weight shape mismatch");
        Eigen::MatrixXd W(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                W(r, c) = flat[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                               static_cast<std::size_t>(c)];
        m.weights.push_back(std::move(W));
        const auto bflat = biases.at(l).get<std::vector<double>>();
        m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bflat.data(),
                                                             static_cast<Eigen::Index>(bflat.size())));
    }
    const auto mean = j.at("input_mean").get<std::vector<double>>();
    const auto stdv = j.at("input_std").get<std::vector<double>>();
    m.input_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.input_std = Eigen::Map<const Eigen::VectorXd>(stdv.data(), static_cast<Eigen::Index>(stdv.size()));
    m.target_mean = j.at("target_mean").get<double>();
    m.target_std = j.at("target_std").get<double>();
}

}  // namespace gyrocal
