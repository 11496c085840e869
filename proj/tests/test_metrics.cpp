#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gyrocal/metrics.hpp"
#include "gyrocal/rng.hpp"

using namespace gyrocal;

TEST_CASE("mse hand values") {
    std::vector<double> a{1, 2, 3};
    CHECK(mse(a, a) == 0.0);
    std::vector<double> y{0, 0, 0, 0}, yhat{1, 1, 1, 1};
    CHECK(mse(y, yhat) == 1.0);
    std::vector<double> y2{2, -2}, yhat2{0, 0};
    CHECK(mse(y2, yhat2) == 4.0);  // (4+4)/2
    CHECK_THROWS_AS(mse(y, a), Error);
}

TEST_CASE("mse zero iff equal, permutation invariant") {
    Rng rng(11);
    std::vector<double> y(50), yhat(50);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.normal();
        yhat[i] = y[i] + rng.normal() * 0.1;
    }
    const double base = mse(y, yhat);
    CHECK(base > 0.0);
    // joint permutation leaves mse unchanged
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) order[i] = y.size() - 1 - i;
    std::vector<double> yp(y.size()), yhp(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        yp[i] = y[order[i]];
        yhp[i] = yhat[order[i]];
    }
    CHECK(mse(yp, yhp) == Catch::Approx(base).epsilon(1e-15));
}

TEST_CASE("r2 hand values") {
    std::vector<double> y{1, 2, 3};
    CHECK(r2(y, y) == 1.0);
    std::vector<double> mean_pred{2, 2, 2};
    CHECK(r2(y, mean_pred) == 0.0);
    std::vector<double> rev{3, 2, 1};
    CHECK(r2(y, rev) == Catch::Approx(-3.0).margin(1e-12));  // 1 - 8/2
    std::vector<double> flat{5, 5, 5};
    CHECK_THROWS_AS(r2(flat, y), Error);
}

TEST_CASE("r2 bounded by 1 and affine invariant") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(40), yhat(40);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = rng.normal();
            yhat[i] = rng.normal();
        }
        const double base = r2(y, yhat);
        CHECK(base <= 1.0);
        const double a = 2.5, b = -7.0;
        std::vector<double> ya(y.size()), yha(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            ya[i] = a * y[i] + b;
            yha[i] = a * yhat[i] + b;
        }
        CHECK(r2(ya, yha) == Catch::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("adev constant series is zero") {
    std::vector<double> flat(500, 3.25);
    std::vector<double> taus{1.0, 10.0, 100.0};
    const auto curve = overlapping_adev(flat, 1.0, taus);
    for (double s : curve.sigma) CHECK(s == 0.0);
}

TEST_CASE("adev linear ramp closed form") {
    // rate(t) = c*t  =>  sigma(tau) = c*tau/sqrt(2), exactly
    const double c = 0.01;
    const std::size_t n = 5000;
    std::vector<double> ramp(n);
    for (std::size_t i = 0; i < n; ++i) ramp[i] = c * static_cast<double>(i);
    std::vector<double> taus{10.0, 25.0, 100.0, 500.0};
    const auto curve = overlapping_adev(ramp, 1.0, taus);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double expected = c * taus[k] / std::sqrt(2.0);
        CHECK(curve.sigma[k] == Catch::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("adev white noise follows 1/sqrt(m)") {
    const std::size_t n = 100000;
    Rng rng(2024);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    std::vector<double> taus;
    for (std::size_t m : {1, 2, 5, 10, 20, 50, 100}) taus.push_back(static_cast<double>(m));
    const auto curve = overlapping_adev(x, 1.0, taus);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double expected = 1.0 / std::sqrt(taus[k]);
        CHECK(curve.sigma[k] == Catch::Approx(expected).epsilon(0.10));
    }
}

TEST_CASE("adev white plus independent ramp adds in variance") {
    const std::size_t n = 20000;
    Rng rng(5);
    const double c = 5e-4;
    std::vector<double> white(n), ramp(n), both(n);
    for (std::size_t i = 0; i < n; ++i) {
        white[i] = rng.normal();
        ramp[i] = c * static_cast<double>(i);
        both[i] = white[i] + ramp[i];
    }
    std::vector<double> taus{10.0, 50.0, 200.0};
    const auto cw = overlapping_adev(white, 1.0, taus);
    const auto cr = overlapping_adev(ramp, 1.0, taus);
    const auto cb = overlapping_adev(both, 1.0, taus);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double sum = cw.sigma[k] * cw.sigma[k] + cr.sigma[k] * cr.sigma[k];
        const double tot = cb.sigma[k] * cb.sigma[k];
        CHECK(tot == Catch::Approx(sum).epsilon(0.15));
    }
}

TEST_CASE("adev tau validation") {
    std::vector<double> x(100, 0.0);
    std::vector<double> too_large{60.0};  // m > (n-1)/2 = 49
    CHECK_THROWS_AS(overlapping_adev(x, 1.0, too_large), Error);
    std::vector<double> tiny(2, 0.0);
    std::vector<double> t1{1.0};
    CHECK_THROWS_AS(overlapping_adev(tiny, 1.0, t1), Error);
}

TEST_CASE("default tau grid spans the valid range") {
    const auto taus = default_tau_grid(100000, 25.0);
    CHECK(taus.front() == Catch::Approx(1.0 / 25.0));
    CHECK(taus.back() <= (100000.0 - 1.0) / (2.0 * 25.0));
    for (std::size_t i = 1; i < taus.size(); ++i) CHECK(taus[i] > taus[i - 1]);
}

TEST_CASE("arw from an exact -1/2 curve") {
    // sigma(tau) = 0.01/sqrt(tau) deg/s  =>  ARW = 60*0.01 = 0.6 deg/sqrt(h)
    AdevCurve curve;
    curve.sample_rate = 10.0;
    for (double tau = 0.1; tau <= 200.0; tau *= 1.5) {
        curve.taus.push_back(tau);
        curve.sigma.push_back(0.01 / std::sqrt(tau));
    }
    double lo = 0, hi = 0;
    const double arw = extract_arw(curve, &lo, &hi);
    CHECK(arw == Catch::Approx(0.6).epsilon(1e-9));
    CHECK(lo <= curve.taus.front() * 1.5 + 1e-12);
    CHECK(hi >= 100.0);
}

TEST_CASE("arw rejects a flat curve") {
    AdevCurve curve;
    for (double tau = 0.1; tau <= 100.0; tau *= 2.0) {
        curve.taus.push_back(tau);
        curve.sigma.push_back(0.5);
    }
    CHECK_THROWS_AS(extract_arw(curve), Error);
}

TEST_CASE("arw recovers the injected level of a white stream") {
    // white rate noise with density N (deg/s)/sqrt(Hz): ARW = 60*N deg/sqrt(h)
    const double fs = 10.0;
    const double injected_arw = 0.35;  // deg/sqrt(h)
    const double sigma = injected_arw / 60.0 * std::sqrt(fs);
    const std::size_t n = 100000;
    Rng rng(99);
    std::vector<double> x(n);
    for (auto& v : x) v = sigma * rng.normal();
    const auto taus = default_tau_grid(n, fs);
    const auto curve = overlapping_adev(x, fs, taus);
    const double arw = extract_arw(curve);
    CHECK(arw == Catch::Approx(injected_arw).epsilon(0.15));
}

TEST_CASE("bi extraction hand values") {
    AdevCurve curve;
    curve.taus = {50.0, 100.0, 200.0, 400.0, 800.0};
    curve.sigma = {0.004, 0.002, 0.001, 0.0015, 0.003};
    const auto bi = extract_bi(curve, false);
    CHECK(bi.bi == Catch::Approx(3.6));  // 3600 * 0.001
    CHECK(bi.bi_tau == 200.0);
    CHECK_FALSE(bi.at_boundary);
    const auto bic = extract_bi(curve, true);
    CHECK(bic.bi == Catch::Approx(3.6 / 0.664));
}

TEST_CASE("bi flags a boundary minimum") {
    AdevCurve curve;
    curve.taus = {1.0, 2.0, 4.0, 8.0};
    curve.sigma = {0.8, 0.4, 0.2, 0.1};
    const auto bi = extract_bi(curve, false);
    CHECK(bi.at_boundary);
    CHECK(bi.bi_tau == 8.0);
}

TEST_CASE("residual report hand values") {
    std::vector<double> y{1, 2, 3}, same{1, 2, 3};
    const auto rep = residual_report(y, same, 5);
    CHECK(rep.stddev == 0.0);
    CHECK(rep.max_abs == 0.0);
    std::size_t occupied = 0, total = 0;
    for (auto c : rep.counts) {
        if (c > 0) ++occupied;
        total += c;
    }
    CHECK(occupied == 1);
    CHECK(total == y.size());

    std::vector<double> y2{0, 0}, yhat2{1, -1};
    const auto rep2 = residual_report(y2, yhat2, 2);
    CHECK(rep2.mean == 0.0);
    CHECK(rep2.counts[0] == 1);
    CHECK(rep2.counts[1] == 1);
}

TEST_CASE("residual counts always sum to n") {
    Rng rng(3);
    std::vector<double> y(137), yhat(137);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.normal();
        yhat[i] = rng.normal();
    }
    for (int bins : {1, 3, 10, 50}) {
        const auto rep = residual_report(y, yhat, bins);
        std::size_t total = 0;
        for (auto c : rep.counts) total += c;
        CHECK(total == y.size());
    }
}
