// Evaluation suite: regression metrics (MSE, R^2), the overlapping Allan
// deviation estimator, angle-random-walk / bias-instability extraction from
// an ADEV curve, and residual reporting.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gyrocal/csv.hpp"
#include "gyrocal/error.hpp"

namespace gyrocal {

inline double mse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw Error(ErrorKind::LengthMismatch, "mse: length mismatch");
    if (y.empty()) throw Error(ErrorKind::LengthMismatch, "mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        acc += d * d;
    }
    return acc / static_cast<double>(y.size());
}

inline double r2(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw Error(ErrorKind::LengthMismatch, "r2: length mismatch");
    if (y.size() < 2) throw Error(ErrorKind::TooFewSamples, "r2: need at least 2 samples");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - yhat[i];
        const double c = y[i] - mean;
        ss_res += r * r;
        ss_tot += c * c;
    }
    if (ss_tot <= 0.0) throw Error(ErrorKind::ZeroVariance, "r2: constant target");
    return 1.0 - ss_res / ss_tot;
}

// Allan deviation curve over averaging times tau.
struct AdevCurve {
    std::vector<double> taus;   // seconds, strictly increasing
    std::vector<double> sigma;  // degrees/second
    double sample_rate = 0.0;   // hertz
    std::size_t n_samples = 0;

    void write_csv(std::ostream& out) const {
        out << "tau,sigma\n";
        for (std::size_t i = 0; i < taus.size(); ++i) csv::write_row(out, {taus[i], sigma[i]});
    }
};

// Log-spaced tau grid, ~points_per_decade values per decade, snapped to
// integer multiples of the sample interval and deduplicated. Spans
// [1/sample_rate, (n-1)/(2*sample_rate)].
inline std::vector<double> default_tau_grid(std::size_t n, double sample_rate,
                                            int points_per_decade = 20) {
    if (n < 3) throw Error(ErrorKind::TooFewSamples, "tau grid: need at least 3 samples");
    const std::size_t max_m = (n - 1) / 2;
    std::vector<double> taus;
    std::vector<std::size_t> ms;
    const double decades = std::log10(static_cast<double>(max_m));
    const int steps = std::max(1, static_cast<int>(std::ceil(decades * points_per_decade)));
    for (int i = 0; i <= steps; ++i) {
        const double m_real = std::pow(10.0, decades * i / steps);
        std::size_t m = static_cast<std::size_t>(std::llround(m_real));
        m = std::clamp<std::size_t>(m, 1, max_m);
        if (ms.empty() || m > ms.back()) ms.push_back(m);
    }
    taus.reserve(ms.size());
    for (std::size_t m : ms) taus.push_back(static_cast<double>(m) / sample_rate);
    return taus;
}

// Overlapping Allan deviation of a rate series:
//   sigma^2(m*T0) = 1/(2*(n-2m+1)) * sum_{j=0}^{n-2m} (Abar_{j+m} - Abar_j)^2
// with Abar_j the mean of samples j..j+m-1. Each requested tau must be an
// integer multiple m of the sample interval with 1 <= m <= (n-1)/2.
inline AdevCurve overlapping_adev(std::span<const double> rate, double sample_rate,
                                  std::span<const double> taus) {
    const std::size_t n = rate.size();
    if (n < 3) throw Error(ErrorKind::TooFewSamples, "adev: need at least 3 samples");
    if (!(sample_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "adev: sample_rate must be > 0");

    // prefix sums; Abar_j = (P[j+m]-P[j])/m
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + rate[i];

    AdevCurve curve;
    curve.sample_rate = sample_rate;
    curve.n_samples = n;
    const std::size_t max_m = (n - 1) / 2;
    for (double tau : taus) {
        const double m_real = tau * sample_rate;
        const auto m = static_cast<std::size_t>(std::llround(m_real));
        if (m < 1 || std::abs(m_real - static_cast<double>(m)) > 1e-6)
            throw Error(ErrorKind::InvalidConfig, "adev: tau is not an integer multiple of 1/sample_rate");
        if (m > max_m) throw Error(ErrorKind::TauTooLarge, "adev: tau exceeds (n-1)/(2*sample_rate)");
        const std::size_t terms = n - 2 * m + 1;
        double acc = 0.0;
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t j = 0; j + 2 * m <= n; ++j) {
            const double diff = (prefix[j + 2 * m] - 2.0 * prefix[j + m] + prefix[j]) * inv_m;
            acc += diff * diff;
        }
        curve.taus.push_back(static_cast<double>(m) / sample_rate);
        curve.sigma.push_back(std::sqrt(acc / (2.0 * static_cast<double>(terms))));
    }
    return curve;
}

// Noise figures extracted from an ADEV curve.
struct NoiseMetrics {
    double arw = 0.0;                // degrees/sqrt(hour)
    double bi = 0.0;                 // degrees/hour
    double bi_tau = 0.0;             // seconds, location of the ADEV minimum
    bool bi_at_boundary = false;     // true when the minimum sits at the largest tau
    bool flicker_corrected = false;  // true when bi was divided by 0.664
    double slope_fit_tau_lo = 0.0;   // ARW fit range
    double slope_fit_tau_hi = 0.0;
};

// Angle random walk: find the longest consecutive run of curve points whose
// local log-log slope is within +/-0.15 of -1/2, least-squares fit
// log(sigma) vs log(tau) over that run, and read the fitted sigma at
// tau = 1 s. 1 (deg/s)/sqrt(Hz) = 60 deg/sqrt(h).
inline double extract_arw(const AdevCurve& curve, double* fit_lo = nullptr, double* fit_hi = nullptr,
                          double slope_tol = 0.15) {
    const std::size_t k = curve.taus.size();
    if (k < 3) throw Error(ErrorKind::NoSlopeRegion, "arw: curve has fewer than 3 points");

    std::vector<bool> ok(k - 1, false);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (curve.sigma[i] <= 0.0 || curve.sigma[i + 1] <= 0.0) continue;
        const double slope = (std::log(curve.sigma[i + 1]) - std::log(curve.sigma[i])) /
                             (std::log(curve.taus[i + 1]) - std::log(curve.taus[i]));
        ok[i] = std::abs(slope + 0.5) <= slope_tol;
    }
    // longest run of qualifying segments; a run of s segments spans s+1 points
    std::size_t best_start = 0, best_len = 0, run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < ok.size(); ++i) {
        if (ok[i]) {
            if (run_len == 0) run_start = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len < 2) throw Error(ErrorKind::NoSlopeRegion, "arw: no qualifying -1/2 slope region of >= 3 points");

    const std::size_t lo = best_start, hi = best_start + best_len;  // inclusive point range [lo, hi]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        const double x = std::log(curve.taus[i]);
        const double y = std::log(curve.sigma[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = count * sxx - sx * sx;
    if (denom <= 0.0) throw Error(ErrorKind::NoSlopeRegion, "arw: degenerate fit");
    const double slope = (count * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / count;
    if (fit_lo) *fit_lo = curve.taus[lo];
    if (fit_hi) *fit_hi = curve.taus[hi];
    return 60.0 * std::exp(intercept);  // sigma at tau=1s, in deg/s, converted to deg/sqrt(h)
}

// Bias instability: 3600 * min(sigma), optionally divided by the 0.664
// flicker-noise constant. at_boundary reports an unresolved floor (minimum at
// the largest tau).
struct BiasInstability {
    double bi = 0.0;       // degrees/hour
    double bi_tau = 0.0;   // seconds
    bool at_boundary = false;
};

inline BiasInstability extract_bi(const AdevCurve& curve, bool flicker_correction = false) {
    if (curve.taus.empty()) throw Error(ErrorKind::TooFewSamples, "bi: empty curve");
    std::size_t arg = 0;
    for (std::size_t i = 1; i < curve.sigma.size(); ++i)
        if (curve.sigma[i] < curve.sigma[arg]) arg = i;
    BiasInstability out;
    out.bi = 3600.0 * curve.sigma[arg];
    if (flicker_correction) out.bi /= 0.664;
    out.bi_tau = curve.taus[arg];
    out.at_boundary = (arg + 1 == curve.sigma.size());
    return out;
}

// Residuals (yhat - y), an equal-width histogram, and summary statistics.
struct ResidualReport {
    std::vector<double> residuals;
    std::vector<double> bin_edges;  // bins+1 edges
    std::vector<std::size_t> counts;
    double mean = 0.0;
    double stddev = 0.0;
    double max_abs = 0.0;

    nlohmann::json summary_json() const {
        return {{"mean", mean}, {"std", stddev}, {"max_abs", max_abs},
                {"bin_edges", bin_edges}, {"counts", counts}};
    }
};

inline ResidualReport residual_report(std::span<const double> y, std::span<const double> yhat,
                                      int bins) {
    if (y.size() != yhat.size()) throw Error(ErrorKind::LengthMismatch, "residuals: length mismatch");
    if (y.empty()) throw Error(ErrorKind::LengthMismatch, "residuals: empty input");
    if (bins < 1) throw Error(ErrorKind::InvalidConfig, "residuals: bins must be >= 1");

    ResidualReport rep;
    rep.residuals.resize(y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        rep.residuals[i] = yhat[i] - y[i];
        acc += rep.residuals[i];
        rep.max_abs = std::max(rep.max_abs, std::abs(rep.residuals[i]));
    }
    rep.mean = acc / static_cast<double>(y.size());
    double var = 0.0;
    for (double r : rep.residuals) var += (r - rep.mean) * (r - rep.mean);
    rep.stddev = std::sqrt(var / static_cast<double>(y.size()));

    double lo = *std::min_element(rep.residuals.begin(), rep.residuals.end());
    double hi = *std::max_element(rep.residuals.begin(), rep.residuals.end());
    if (!(hi > lo)) {  // degenerate range: center a unit-wide window
        lo -= 0.5;
        hi += 0.5;
    }
    rep.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        rep.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    rep.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double r : rep.residuals) {
        auto b = static_cast<long>((r - lo) / width);
        b = std::clamp<long>(b, 0, bins - 1);  // max value falls in the last bin
        ++rep.counts[static_cast<std::size_t>(b)];
    }
    return rep;
}

}  // namespace gyrocal
