#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gyrocal/mlp.hpp"
#include "gyrocal/rng.hpp"

using namespace gyrocal;

namespace {

AlignedDataset make_ds(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    AlignedDataset ds;
    ds.features = X;
    ds.target = y;
    for (Eigen::Index j = 0; j < X.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (Eigen::Index i = 0; i < X.rows(); ++i) ds.timestamps.push_back(0.1 * static_cast<double>(i));
    ds.sample_interval = 0.1;
    return ds;
}

MlpModel chain_net() {
    // 1-1-1-1-1 network, all weights 1, all biases 0, identity stats
    MlpModel m;
    m.layer_dims = {1, 1, 1, 1, 1};
    for (int l = 0; l < 4; ++l) {
        m.weights.push_back(Eigen::MatrixXd::Ones(1, 1));
        m.biases.push_back(Eigen::VectorXd::Zero(1));
    }
    m.input_mean = Eigen::VectorXd::Zero(1);
    m.input_std = Eigen::VectorXd::Ones(1);
    return m;
}

bool same_params(const MlpModel& a, const MlpModel& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l] != b.weights[l]) return false;
        if (a.biases[l] != b.biases[l]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("elu hand values") {
    CHECK(elu(0.0, 1.0) == 0.0);
    CHECK(elu(2.0, 1.0) == 2.0);
    CHECK(elu(-1.0, 1.0) == Catch::Approx(-0.6321205588285577).margin(1e-15));
    CHECK(elu(-1.0, 2.0) == Catch::Approx(2.0 * -0.6321205588285577).margin(1e-15));
    // derivative continuity at 0 for alpha=1
    CHECK(elu_grad(0.0, 1.0) == Catch::Approx(1.0));
    CHECK(elu_grad(-1e-12, 1.0) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("init is deterministic and correctly shaped") {
    const auto a = init_mlp(42, {64, 64, 64}, 9);
    const auto b = init_mlp(42, {64, 64, 64}, 9);
    CHECK(same_params(a, b));
    const auto c = init_mlp(42, {64, 64, 64}, 10);
    CHECK_FALSE(same_params(a, c));

    REQUIRE(a.weights.size() == 4);
    CHECK(a.weights[0].rows() == 64);
    CHECK(a.weights[0].cols() == 42);
    CHECK(a.weights[1].rows() == 64);
    CHECK(a.weights[1].cols() == 64);
    CHECK(a.weights[2].rows() == 64);
    CHECK(a.weights[2].cols() == 64);
    CHECK(a.weights[3].rows() == 1);
    CHECK(a.weights[3].cols() == 64);
    for (const auto& bias : a.biases) CHECK(bias.isZero());
    CHECK_THROWS_AS(init_mlp(0, {4, 4, 4}, 1), Error);
    CHECK_THROWS_AS(init_mlp(3, {4, 0, 4}, 1), Error);
}

TEST_CASE("init weight scale matches sqrt(2/fan_in)") {
    const auto m = init_mlp(64, {64, 64, 64}, 123);
    // hidden layers have fan_in 64: 64*64 = 4096 draws each
    for (int l : {0, 1, 2}) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c)
                acc += m.weights[l](r, c) * m.weights[l](r, c);
        const double std_meas = std::sqrt(acc / static_cast<double>(m.weights[l].size()));
        CHECK(std_meas == Catch::Approx(std::sqrt(2.0 / 64.0)).epsilon(0.10));
    }
}

TEST_CASE("forward pass hand values") {
    MlpModel zero;
    zero.layer_dims = {3, 4, 4, 4, 1};
    zero.elu_alpha = 1.0;
    for (std::size_t l = 0; l + 1 < zero.layer_dims.size(); ++l) {
        zero.weights.push_back(Eigen::MatrixXd::Zero(zero.layer_dims[l + 1], zero.layer_dims[l]));
        zero.biases.push_back(Eigen::VectorXd::Zero(zero.layer_dims[l + 1]));
    }
    zero.input_mean = Eigen::VectorXd::Zero(3);
    zero.input_std = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd x(3);
    x << 5.0, -3.0, 100.0;
    CHECK(forward(zero, x) == 0.0);

    const auto chain = chain_net();
    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK(forward(chain, one) == 1.0);  // positive pass-through
    Eigen::VectorXd minus(1);
    minus << -1.0;
    // three ELU applications of -1, then the linear output layer
    CHECK(forward(chain, minus) == Catch::Approx(-0.3740823052826776).margin(1e-14));

    Eigen::VectorXd wrong(2);
    wrong.setZero();
    CHECK_THROWS_AS(forward(chain, wrong), Error);
}

TEST_CASE("forward is continuous in its input") {
    const auto m = init_mlp(3, {8, 8, 8}, 4);
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x(j) = rng.normal();
        const double base = forward(m, x);
        double prev_gap = std::numeric_limits<double>::max();
        for (double delta : {1e-2, 1e-4, 1e-6}) {
            Eigen::VectorXd xp = x;
            xp(0) += delta;
            const double gap = std::abs(forward(m, xp) - base);
            CHECK(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-4);
    }
}

TEST_CASE("epochs=0 returns the initialized parameters") {
    Rng rng(8);
    Eigen::MatrixXd X(50, 2);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
        y(i) = X(i, 0);
    }
    const auto ds = make_ds(X, y);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 77;
    auto [model, history] = train_mlp(ds, ds, cfg, {4, 4, 4});
    const auto fresh = init_mlp(2, {4, 4, 4}, 77);
    CHECK(same_params(model, fresh));
    CHECK(history.train_mse.empty());
}

TEST_CASE("learns y = 2x") {
    Rng rng(123);
    const Eigen::Index n = 1000;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(-1.0, 1.0);
        y(i) = 2.0 * X(i, 0);
    }
    Eigen::MatrixXd Xv(200, 1);
    Eigen::VectorXd yv(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        Xv(i, 0) = rng.uniform(-1.0, 1.0);
        yv(i) = 2.0 * Xv(i, 0);
    }
    TrainConfig cfg;
    cfg.epochs = 2000;
    cfg.batch_size = 64;
    cfg.patience = 0;  // run to convergence or the epoch cap
    cfg.seed = 3;
    auto [model, history] = train_mlp(make_ds(X, y), make_ds(Xv, yv), cfg, {16, 16, 16});
    CHECK(history.best_val_mse < 1e-3);
    // converges far sooner than the cap; record the achieved epoch
    CHECK(history.best_epoch >= 0);
    INFO("best epoch " << history.best_epoch);
    CHECK(history.best_epoch < 2000);
}

TEST_CASE("training is deterministic per seed") {
    Rng rng(55);
    Eigen::MatrixXd X(200, 2);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
        y(i) = X(i, 0) - 0.5 * X(i, 1);
    }
    const auto ds = make_ds(X, y);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 31;
    auto [a, ha] = train_mlp(ds, ds, cfg, {8, 8, 8});
    auto [b, hb] = train_mlp(ds, ds, cfg, {8, 8, 8});
    CHECK(same_params(a, b));
    CHECK(ha.train_mse == hb.train_mse);
    CHECK(ha.val_mse == hb.val_mse);
    cfg.seed = 32;
    auto [c, hc] = train_mlp(ds, ds, cfg, {8, 8, 8});
    CHECK_FALSE(same_params(a, c));
}

TEST_CASE("best-validation snapshot is no worse than the final epoch") {
    Rng rng(91);
    Eigen::MatrixXd X(300, 1);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < 300; ++i) {
        X(i, 0) = rng.uniform(-2.0, 2.0);
        y(i) = std::sin(2.0 * X(i, 0)) + 0.3 * rng.normal();  // noisy; val wobbles
    }
    Eigen::MatrixXd Xv(100, 1);
    Eigen::VectorXd yv(100);
    for (Eigen::Index i = 0; i < 100; ++i) {
        Xv(i, 0) = rng.uniform(-2.0, 2.0);
        yv(i) = std::sin(2.0 * Xv(i, 0)) + 0.3 * rng.normal();
    }
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.patience = 0;
    cfg.seed = 6;
    auto [model, history] = train_mlp(make_ds(X, y), make_ds(Xv, yv), cfg, {8, 8, 8});
    REQUIRE_FALSE(history.val_mse.empty());
    CHECK(history.best_val_mse <= history.val_mse.back() + 1e-15);
    // the returned parameters reproduce the best val mse
    const auto pred = predict_mlp(model, Xv);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 100; ++i) acc += (pred(i) - yv(i)) * (pred(i) - yv(i));
    CHECK(acc / 100.0 == Catch::Approx(history.best_val_mse).epsilon(1e-9));
}

TEST_CASE("standardization round-trip") {
    Rng rng(14);
    const Eigen::Index n = 240;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 3.0e6 + 40.0 * rng.normal();  // wildly different scales
        X(i, 1) = 1e-3 * rng.normal();
        y(i) = 100.0 + 20.0 * rng.normal();
    }
    const auto ds = make_ds(X, y);
    auto stats_of = [&](const Eigen::MatrixXd& M) {
        Eigen::VectorXd mean = M.colwise().mean();
        Eigen::MatrixXd centered = M.rowwise() - mean.transpose();
        Eigen::VectorXd sd = (centered.array().square().colwise().sum() / static_cast<double>(M.rows()))
                                 .sqrt()
                                 .matrix()
                                 .transpose();
        return std::make_pair(mean, sd);
    };
    auto [xm, xs] = stats_of(X);
    const double ym = y.mean();
    const double ys = std::sqrt((y.array() - ym).square().sum() / static_cast<double>(n));
    Eigen::MatrixXd Xstd = (X.rowwise() - xm.transpose());
    for (Eigen::Index j = 0; j < 2; ++j) Xstd.col(j) /= xs(j);
    Eigen::VectorXd ystd = ((y.array() - ym) / ys).matrix();
    const auto ds_std = make_ds(Xstd, ystd);

    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 44;
    auto [raw_model, h1] = train_mlp(ds, ds, cfg, {6, 6, 6});
    auto [std_model, h2] = train_mlp(ds_std, ds_std, cfg, {6, 6, 6});

    const auto pred_raw = predict_mlp(raw_model, X);
    Eigen::VectorXd pred_std = predict_mlp(std_model, Xstd);
    pred_std = (pred_std.array() * ys + ym).matrix();
    for (Eigen::Index i = 0; i < n; ++i)
        CHECK(pred_raw(i) == Catch::Approx(pred_std(i)).margin(1e-9 * std::abs(pred_raw(i)) + 1e-9));
}

TEST_CASE("gradient check on random small networks") {
    Rng rng(1);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto model = init_mlp(3, {4, 4, 4}, seed);
        model.input_mean = Eigen::VectorXd::Zero(3);
        model.input_std = Eigen::VectorXd::Ones(3);
        Eigen::MatrixXd X(8, 3);
        Eigen::VectorXd y(8);
        for (Eigen::Index i = 0; i < 8; ++i) {
            for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
            y(i) = rng.normal();
        }
        std::vector<double> per_layer;
        const double worst = grad_check(model, X, y, 1e-6, &per_layer);
        CHECK(worst < 1e-5);
        REQUIRE(per_layer.size() == 4);
        for (double e : per_layer) CHECK(e < 1e-5);
    }
}

TEST_CASE("gradient check on an all-zero network") {
    MlpModel zero;
    zero.layer_dims = {2, 3, 3, 3, 1};
    for (std::size_t l = 0; l + 1 < zero.layer_dims.size(); ++l) {
        zero.weights.push_back(Eigen::MatrixXd::Zero(zero.layer_dims[l + 1], zero.layer_dims[l]));
        zero.biases.push_back(Eigen::VectorXd::Zero(zero.layer_dims[l + 1]));
    }
    zero.input_mean = Eigen::VectorXd::Zero(2);
    zero.input_std = Eigen::VectorXd::Ones(2);
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, -1, 0.5, 3, -2, 0.25, 1;
    Eigen::VectorXd y(4);
    y << 1, -1, 2, 0.5;
    const double worst = grad_check(zero, X, y, 1e-6);
    CHECK(worst < 1e-9);
}

TEST_CASE("grad_check validates eps and batch") {
    auto model = init_mlp(2, {3, 3, 3}, 5);
    Eigen::MatrixXd X(2, 2);
    X.setZero();
    Eigen::VectorXd y(2);
    y.setZero();
    CHECK_THROWS_AS(grad_check(model, X, y, 0.0), Error);
    CHECK_THROWS_AS(grad_check(model, X, y, -1e-6), Error);
    Eigen::MatrixXd empty(0, 2);
    Eigen::VectorXd ye(0);
    CHECK_THROWS_AS(grad_check(model, empty, ye, 1e-6), Error);
}

TEST_CASE("mlp json round-trip preserves predictions") {
    Rng rng(70);
    Eigen::MatrixXd X(60, 3);
    Eigen::VectorXd y(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y(i) = X(i, 0) + 2.0;
    }
    const auto ds = make_ds(X, y);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 20;
    auto [model, history] = train_mlp(ds, ds, cfg, {5, 5, 5});
    nlohmann::json j = model;
    const auto restored = j.get<MlpModel>();
    const auto a = predict_mlp(model, X);
    const auto b = predict_mlp(restored, X);
    for (Eigen::Index i = 0; i < 60; ++i) CHECK(a(i) == b(i));
}
