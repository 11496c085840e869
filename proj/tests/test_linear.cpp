#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gyrocal/dataio.hpp"
#include "gyrocal/linear.hpp"
#include "gyrocal/metrics.hpp"
#include "gyrocal/sim.hpp"

using namespace gyrocal;

namespace {

SimConfig noise_free_config() {
    SimConfig cfg = default_sim_config();
    cfg.arw_gyro = 0.0;
    cfg.bi_gyro = 0.0;
    cfg.arw_ref = 0.0;
    return cfg;
}

AlignedDataset simulate_aligned(const GroundTruth& truth, const SimConfig& cfg) {
    const auto result = simulate_gyro(truth, cfg);
    return align(result.gyro, result.ref, 1.0);
}

std::vector<RefRecord> ref_of(const AlignedDataset& ds) {
    std::vector<RefRecord> ref(ds.timestamps.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        ref[i] = {ds.timestamps[i], ds.target(static_cast<Eigen::Index>(i))};
    return ref;
}

}  // namespace

TEST_CASE("detect a single constant segment") {
    std::vector<RefRecord> ref;
    for (int i = 0; i < 100; ++i) ref.push_back({0.1 * i, 20.0});
    const auto segs = detect_segments(ref, 0.5, 1.0);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].commanded_rate == Catch::Approx(20.0));
    CHECK_FALSE(segs[0].steady);
}

TEST_CASE("alternating rates yield no segment") {
    std::vector<RefRecord> ref;
    for (int i = 0; i < 200; ++i) ref.push_back({0.1 * i, (i % 2) ? 20.0 : -20.0});
    const auto segs = detect_segments(ref, 0.5, 1.0);
    CHECK(segs.empty());
}

TEST_CASE("zero-rate segments are labeled steady") {
    std::vector<RefRecord> ref;
    for (int i = 0; i < 60; ++i) ref.push_back({0.1 * i, 0.01});
    const auto segs = detect_segments(ref, 0.5, 1.0);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].steady);
}

TEST_CASE("staircase run yields the ten commanded segments") {
    const auto truth = staircase_profile(table_staircase_rates(), 12.0, 8.0, 2.0, 25.0);
    const auto ds = simulate_aligned(truth, noise_free_config());
    const auto segs = detect_segments(ref_of(ds), 0.5, 2.0);
    std::vector<double> rates;
    for (const auto& s : segs)
        if (!s.steady) rates.push_back(s.commanded_rate);
    const auto expected = table_staircase_rates();
    REQUIRE(rates.size() == expected.size());
    for (std::size_t i = 0; i < rates.size(); ++i)
        CHECK(rates[i] == Catch::Approx(expected[i]).margin(0.5));
}

TEST_CASE("fit at the first peak reproduces the published scale factor") {
    const auto truth = staircase_profile(table_staircase_rates(), 12.0, 8.0, 2.0, 25.0);
    const auto ds = simulate_aligned(truth, noise_free_config());
    const auto segs = detect_segments(ref_of(ds), 0.5, 2.0);
    const RateSegment* first = nullptr;
    for (const auto& s : segs)
        if (!s.steady) {
            first = &s;
            break;
        }
    REQUIRE(first != nullptr);
    CHECK(first->commanded_rate == Catch::Approx(20.0).margin(0.2));
    const auto model = fit_scale_factor(ds, *first);
    CHECK(model.s_linear == Catch::Approx(0.161).margin(2e-3));
}

TEST_CASE("fit errors") {
    AlignedDataset ds;
    ds.feature_names = gyro_channel_names();
    const int n = 40;
    ds.features = Eigen::MatrixXd::Zero(n, kGyroChannelCount);
    ds.target = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) ds.timestamps.push_back(0.1 * i);
    ds.sample_interval = 0.1;

    RateSegment seg{0.0, 3.9, 20.0, false};
    CHECK_THROWS_AS(fit_scale_factor(ds, seg), Error);  // zero mean voltage

    const int col = ds.column_index("sense_in");
    for (int i = 0; i < n; ++i) ds.features(i, col) = 20.0;
    const auto model = fit_scale_factor(ds, seg);
    CHECK(model.s_linear == 1.0);  // mean sense_in equals commanded rate

    RateSegment tiny{0.0, 0.5, 20.0, false};  // 6 samples < 10
    CHECK_THROWS_AS(fit_scale_factor(ds, tiny), Error);
}

TEST_CASE("scale factor table matches the published trend") {
    const auto truth = staircase_profile(table_staircase_rates(), 12.0, 8.0, 2.0, 25.0);
    const auto ds = simulate_aligned(truth, noise_free_config());
    const auto segs = detect_segments(ref_of(ds), 0.5, 2.0);
    const auto table = scale_factor_table(ds, segs);
    REQUIRE(table.size() == 10);
    const SimConfig cfg = noise_free_config();
    for (const auto& row : table) {
        REQUIRE(row.ok);
        // each peak recovers s0*(1+|rate|/omega_sat) within 0.1%
        const double expected = cfg.scale_factor(row.segment.commanded_rate);
        CHECK(row.scale_factor == Catch::Approx(expected).epsilon(1e-3));
    }
    // anchored values at 20 and 120 deg/s
    CHECK(table[0].scale_factor == Catch::Approx(0.161).margin(2e-3));
    CHECK(table[6].scale_factor == Catch::Approx(0.198).margin(2e-3));
    // monotone in |rate|
    for (const auto& a : table)
        for (const auto& b : table)
            if (a.segment.commanded_rate < b.segment.commanded_rate)
                CHECK(a.scale_factor < b.scale_factor + 1e-9);
}

TEST_CASE("empty and single segment tables") {
    AlignedDataset ds;
    ds.feature_names = gyro_channel_names();
    ds.features = Eigen::MatrixXd::Ones(20, kGyroChannelCount);
    ds.target = Eigen::VectorXd::Zero(20);
    for (int i = 0; i < 20; ++i) ds.timestamps.push_back(0.1 * i);
    ds.sample_interval = 0.1;
    CHECK(scale_factor_table(ds, {}).empty());
    const auto table = scale_factor_table(ds, {RateSegment{0.0, 1.9, 5.0, false}});
    REQUIRE(table.size() == 1);
    CHECK(table[0].ok);
    CHECK(table[0].scale_factor == Catch::Approx(5.0));
}

TEST_CASE("apply_linear hand values and linearity") {
    LinearModel model;
    model.s_linear = 0.161;
    std::vector<double> v{100.0, 0.0, -50.0};
    const auto omega = apply_linear(model, v);
    CHECK(omega[0] == Catch::Approx(16.1));
    CHECK(omega[1] == 0.0);
    CHECK(omega[2] == Catch::Approx(-8.05));

    // linearity: apply(aV + bW) = a*apply(V) + b*apply(W)
    std::vector<double> w{3.0, -2.0, 7.0};
    const double a = 2.0, b = -0.5;
    std::vector<double> mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = a * v[i] + b * w[i];
    const auto direct = apply_linear(model, mix);
    const auto va = apply_linear(model, v);
    const auto wa = apply_linear(model, w);
    for (int i = 0; i < 3; ++i)
        CHECK(direct[i] == Catch::Approx(a * va[i] + b * wa[i]).margin(1e-12));
}

TEST_CASE("linear model under-reads extreme rates") {
    // fit at 20 deg/s, apply at a true 120 deg/s
    const auto truth = staircase_profile(table_staircase_rates(), 12.0, 8.0, 2.0, 25.0);
    const auto ds = simulate_aligned(truth, noise_free_config());
    const auto segs = detect_segments(ref_of(ds), 0.5, 2.0);
    const RateSegment* first = nullptr;
    const RateSegment* at120 = nullptr;
    for (const auto& s : segs) {
        if (s.steady) continue;
        if (!first) first = &s;
        if (!at120 && std::abs(s.commanded_rate - 120.0) < 1.0) at120 = &s;
    }
    REQUIRE(first);
    REQUIRE(at120);
    const auto model = fit_scale_factor(ds, *first);
    const int col = ds.column_index("sense_in");
    double mean_v = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < ds.timestamps.size(); ++i) {
        if (ds.timestamps[i] < at120->start || ds.timestamps[i] > at120->end) continue;
        mean_v += ds.features(static_cast<Eigen::Index>(i), col);
        ++count;
    }
    mean_v /= count;
    const auto est = apply_linear(model, std::vector<double>{mean_v});
    CHECK(est[0] == Catch::Approx(120.0 * 0.161 / 0.198).epsilon(0.02));  // ~97.6
    CHECK(est[0] < 100.0);
}

TEST_CASE("linear R2 is below one and degrades with rate range") {
    auto run_r2 = [](double scale) {
        auto rates = table_staircase_rates();
        for (auto& r : rates) r *= scale;
        const auto truth = staircase_profile(rates, 12.0, 8.0, 2.0, 25.0);
        const auto ds = simulate_aligned(truth, noise_free_config());
        const auto segs = detect_segments(ref_of(ds), 0.5 * scale, 2.0);
        const RateSegment* first = nullptr;
        for (const auto& s : segs)
            if (!s.steady) {
                first = &s;
                break;
            }
        REQUIRE(first != nullptr);
        const auto model = fit_scale_factor(ds, *first);
        const int col = ds.column_index("sense_in");
        std::vector<double> v(static_cast<std::size_t>(ds.rows()));
        for (Eigen::Index i = 0; i < ds.rows(); ++i) v[static_cast<std::size_t>(i)] = ds.features(i, col);
        const auto yhat = apply_linear(model, v);
        std::vector<double> y(ds.target.data(), ds.target.data() + ds.rows());
        return r2(y, yhat);
    };
    const double r2_small = run_r2(1.0);
    const double r2_large = run_r2(2.0);
    CHECK(r2_small < 1.0);
    CHECK(r2_large < r2_small);
}

TEST_CASE("linear model json round-trip") {
    LinearModel model;
    model.s_linear = 0.16123456789012345;
    model.source_segment = {10.0, 22.0, 20.0, false};
    nlohmann::json j = model;
    const auto back = j.get<LinearModel>();
    CHECK(back.s_linear == model.s_linear);
    CHECK(back.source_segment.start == 10.0);
    CHECK(back.source_segment.commanded_rate == 20.0);
}
