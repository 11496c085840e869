// Synthetic gyroscope + reference-IMU generator with known ground truth.
//
// The rate-to-voltage map is a compressive nonlinearity
//     V(omega) = omega / (s0 * (1 + |omega|/omega_sat))
// whose two-point anchoring (the 20 and 120 deg/s scale factors) reproduces
// the measured trend of a fitted scale factor that grows with rate. Channel
// noise is budgeted so that the Allan deviation of the raw rate-equivalent
// sense signal shows the configured angle random walk in its -1/2 slope
// region and a bias-instability floor from a first-order Gauss-Markov bias.
//
// Cross-channel structure (all magnitudes derived from the config):
//   * a shared loop-tracking residual u drives both frequency-error channels
//     and leaks into the in-phase voltage (detuning error),
//   * the drive phase error follows the sense frequency error plus a
//     demodulation disturbance w that also leaks into the in-phase voltage,
//   * a fast quadrature component q appears in both the quadrature channel
//     and (attenuated) the in-phase voltage,
// so the auxiliary channels carry genuine information about the in-phase
// error terms, and the published channel correlations (0.88 between sense
// frequency error and drive phase error, 0.60 between in-phase and
// quadrature) hold by construction.
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gyrocal/csv.hpp"
#include "gyrocal/error.hpp"
#include "gyrocal/rng.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

// Piecewise-constant random rate profile joined by linear ramps.
struct RateProfileConfig {
    double duration = 2700.0;       // seconds
    double dwell_min = 15.0;        // seconds
    double dwell_max = 120.0;       // seconds
    double rate_max = 200.0;        // degrees/second
    double steady_fraction = 0.35;  // probability a segment is zero-rate
    double ramp_time = 2.0;         // seconds
    double sample_rate = 25.0;      // hertz
    std::uint64_t seed = 10;

    void validate() const {
        if (!(duration > 0.0)) throw Error(ErrorKind::InvalidConfig, "profile: duration must be > 0");
        if (!(dwell_min > 0.0) || dwell_min > dwell_max)
            throw Error(ErrorKind::InvalidConfig, "profile: dwell range invalid");
        if (!(rate_max > 0.0)) throw Error(ErrorKind::InvalidConfig, "profile: rate_max must be > 0");
        if (steady_fraction < 0.0 || steady_fraction > 1.0)
            throw Error(ErrorKind::InvalidConfig, "profile: steady_fraction must be in [0,1]");
        if (ramp_time < 0.0) throw Error(ErrorKind::InvalidConfig, "profile: ramp_time must be >= 0");
        if (!(sample_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "profile: sample_rate must be > 0");
    }
};

struct GroundTruth {
    std::vector<double> timestamps;  // uniform grid
    std::vector<double> omega_true;  // degrees/second

    void write_csv(std::ostream& out) const {
        out << "t,omega_true\n";
        for (std::size_t i = 0; i < timestamps.size(); ++i)
            csv::write_row(out, {timestamps[i], omega_true[i]});
    }
};

struct SimConfig {
    double s0 = 0.15360;           // degrees/second per volt at zero rate
    double omega_sat = 415.135;    // degrees/second, compression knee
    double kappa_quad = 0.10;      // in-phase -> quadrature coupling
    double beta_phase = 2.0;       // degrees per hertz, freq-err -> phase-err
    double f0 = 3.0e6;             // hertz, sense resonance
    double mode_split = 380.0;     // hertz, drive - sense resonance
    double temp_coeff = 90.0;      // hertz per kelvin
    double arw_gyro = 0.44;        // degrees/sqrt(hour)
    double bi_gyro = 3.0;          // degrees/hour
    double bi_corr_time = 2500.0;  // seconds, Gauss-Markov bias correlation time
    double arw_ref = 0.35;         // degrees/sqrt(hour), reference IMU
    double sample_rate = 25.0;     // hertz
    std::uint64_t seed = 7;

    void validate() const {
        if (!(s0 > 0.0)) throw Error(ErrorKind::InvalidConfig, "sim: s0 must be > 0");
        if (!(omega_sat > 0.0)) throw Error(ErrorKind::InvalidConfig, "sim: omega_sat must be > 0");
        if (mode_split < kModeSplitBandLo || mode_split > kModeSplitBandHi)
            throw Error(ErrorKind::InvalidConfig, "sim: mode_split outside the 320-440 Hz band");
        if (arw_gyro < 0.0 || bi_gyro < 0.0 || arw_ref < 0.0)
            throw Error(ErrorKind::InvalidConfig, "sim: noise magnitudes must be >= 0");
        if (!(bi_corr_time > 0.0)) throw Error(ErrorKind::InvalidConfig, "sim: bi_corr_time must be > 0");
        if (!(sample_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "sim: sample_rate must be > 0");
        if (!(f0 > 0.0)) throw Error(ErrorKind::InvalidConfig, "sim: f0 must be > 0");
    }

    static constexpr double kModeSplitBandLo = 320.0;
    static constexpr double kModeSplitBandHi = 440.0;

    // Compressive scale factor S(omega) = s0 * (1 + |omega|/omega_sat), the
    // ratio omega / V(omega).
    double scale_factor(double omega) const { return s0 * (1.0 + std::abs(omega) / omega_sat); }

    double voltage(double omega) const { return omega / scale_factor(omega); }
};

// Defaults anchored to the two-point solution of
//   S(20) = 0.161, S(120) = 0.198 with S(w) = s0*(1+|w|/omega_sat).
inline SimConfig default_sim_config() {
    constexpr double r1 = 20.0, s1 = 0.161;
    constexpr double r2 = 120.0, s2 = 0.198;
    SimConfig cfg;
    cfg.omega_sat = (s1 * r2 - s2 * r1) / (s2 - s1);
    cfg.s0 = s1 * cfg.omega_sat / (cfg.omega_sat + r1);
    return cfg;
}

inline GroundTruth gen_rate_profile(const RateProfileConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x5ea1));

    // breakpoints: (time, rate) nodes of a piecewise-linear profile
    std::vector<std::pair<double, double>> nodes;
    double t = 0.0;
    double rate = 0.0;
    auto draw_rate = [&]() {
        if (rng.uniform() < cfg.steady_fraction) return 0.0;
        return rng.uniform(-cfg.rate_max, cfg.rate_max);
    };
    rate = draw_rate();
    nodes.emplace_back(0.0, rate);
    while (t < cfg.duration) {
        const double dwell = rng.uniform(cfg.dwell_min, cfg.dwell_max);
        t += dwell;
        nodes.emplace_back(t, rate);
        const double next = draw_rate();
        t += cfg.ramp_time;
        nodes.emplace_back(t, next);
        rate = next;
    }

    GroundTruth truth;
    const auto n = static_cast<std::size_t>(std::floor(cfg.duration * cfg.sample_rate));
    if (n < 2) throw Error(ErrorKind::InvalidConfig, "profile: fewer than 2 samples");
    truth.timestamps.resize(n);
    truth.omega_true.resize(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) / cfg.sample_rate;
        while (seg + 1 < nodes.size() && nodes[seg + 1].first < ti) ++seg;
        double omega = nodes[seg].second;
        if (seg + 1 < nodes.size() && nodes[seg + 1].first > nodes[seg].first) {
            const double f = (ti - nodes[seg].first) / (nodes[seg + 1].first - nodes[seg].first);
            omega = nodes[seg].second + f * (nodes[seg + 1].second - nodes[seg].second);
        }
        truth.timestamps[i] = ti;
        truth.omega_true[i] = omega;
    }
    return truth;
}

// Controlled-rate staircase: hold each commanded rate for `dwell` seconds
// with zero-rate holds in between, ramping over `ramp_time`.
inline GroundTruth staircase_profile(const std::vector<double>& rates, double dwell,
                                     double zero_dwell, double ramp_time, double sample_rate) {
    if (rates.empty()) throw Error(ErrorKind::InvalidConfig, "staircase: no rates");
    if (!(dwell > 0.0) || !(zero_dwell > 0.0) || ramp_time < 0.0 || !(sample_rate > 0.0))
        throw Error(ErrorKind::InvalidConfig, "staircase: invalid timing");

    std::vector<std::pair<double, double>> nodes;
    double t = 0.0;
    nodes.emplace_back(t, 0.0);
    t += zero_dwell;
    nodes.emplace_back(t, 0.0);
    for (double r : rates) {
        t += ramp_time;
        nodes.emplace_back(t, r);
        t += dwell;
        nodes.emplace_back(t, r);
        t += ramp_time;
        nodes.emplace_back(t, 0.0);
        t += zero_dwell;
        nodes.emplace_back(t, 0.0);
    }
    GroundTruth truth;
    const auto n = static_cast<std::size_t>(std::floor(t * sample_rate));
    truth.timestamps.resize(n);
    truth.omega_true.resize(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) / sample_rate;
        while (seg + 1 < nodes.size() && nodes[seg + 1].first < ti) ++seg;
        double omega = nodes[seg].second;
        if (seg + 1 < nodes.size() && nodes[seg + 1].first > nodes[seg].first) {
            const double f = (ti - nodes[seg].first) / (nodes[seg + 1].first - nodes[seg].first);
            omega = nodes[seg].second + f * (nodes[seg + 1].second - nodes[seg].second);
        }
        truth.timestamps[i] = ti;
        truth.omega_true[i] = omega;
    }
    return truth;
}

// Commanded-rate sequence of the controlled-rate table.
inline std::vector<double> table_staircase_rates() {
    return {20.0, 40.0, 80.0, 40.0, 80.0, 160.0, 120.0, 40.0, 20.0, 120.0};
}

struct SimResult {
    std::vector<GyroRecord> gyro;
    std::vector<RefRecord> ref;
};

namespace detail {

// Internal generator constants. These are not physical specs; they shape the
// cross-channel structure described at the top of this header.
struct SimInternals {
    // ARW budget shares of the three leaked processes (u, w, q); the white
    // component absorbs the remainder so the total -1/2 region matches
    // arw_gyro.
    double share_u = 0.45;
    double share_w = 0.45;
    double share_q = 0.30;
    double tau_fast_samples = 1.0;  // correlation time of u, w, q in sample intervals

    double sigma_freq_err = 0.05;  // hertz, loop residual scale
    double meas_sfe = 0.04;        // extra measurement noise ratio, sense freq err
    double rate_share_sfe = 0.25;  // variance share of the Coriolis detuning term
    double dfe_gain = 0.92;        // drive loop tracks the same residual, rescaled
    double spe_gain = 0.80;        // sense-loop phase-to-frequency-error ratio
    // drive-phase disturbance mix entering drive_phase_err: fast additive
    // part w, signal-dependent modulation readout, white remainder
    double dpe_share_fast = 0.25;
    double dpe_share_mod = 0.95;
    double tau_mod = 0.12;             // seconds, demodulation disturbance correlation time
    double demod_mod_depth = 1.0e-3;   // amplitude modulation per unit w_mod at default noise
    double temp_scale_coeff = 2.0e-3;  // per kelvin, scale-factor drift with temperature

    double tau_quad_slow = 200.0;  // seconds, slow quadrature drift
    double quad_share_fast = 0.55;
    double quad_share_slow = 0.15;

    double temp_amp = 0.35;      // kelvin
    double temp_period = 900.0;  // seconds
    double temp_phase = 0.7;
    double temp_drift = 1.0e-4;  // kelvin/second

    double sigma_sense_freq = 1.0;  // hertz, frequency readout noise
    double sigma_drive_freq = 1.5;

    double drive_amp = 500.0;     // volts, drive in-phase level
    double drive_quad0 = 25.0;    // volts
    double sigma_drive_in = 1.0;  // volts
    double sigma_drive_quad = 0.8;
    double drive_gm_tau = 5.0;    // seconds
    double drive_share = 0.8;     // shared drive-loop fraction in drive_in
    double drive_quad_share = 0.35;
};

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline SimResult simulate_gyro(const GroundTruth& truth, const SimConfig& cfg) {
    cfg.validate();
    if (truth.timestamps.empty()) throw Error(ErrorKind::InvalidConfig, "sim: empty ground truth");
    if (truth.timestamps.size() != truth.omega_true.size())
        throw Error(ErrorKind::InvalidConfig, "sim: ground truth length mismatch");
    const std::size_t n = truth.timestamps.size();
    const double dt = 1.0 / cfg.sample_rate;
    if (n >= 2) {
        const double step = truth.timestamps[1] - truth.timestamps[0];
        if (std::abs(step - dt) > 1e-9)
            throw Error(ErrorKind::InvalidConfig, "sim: ground truth grid does not match sample_rate");
    }

    const detail::SimInternals in;

    // noise budget in rate units (deg/s)
    const double n_tot = cfg.arw_gyro / 60.0;  // (deg/s)/sqrt(Hz)
    const double n_u = in.share_u * n_tot;
    const double n_w = in.share_w * n_tot;
    const double n_q = in.share_q * n_tot;
    const double white_share_sq =
        1.0 - in.share_u * in.share_u - in.share_w * in.share_w - in.share_q * in.share_q;
    const double n_white = n_tot * std::sqrt(std::max(0.0, white_share_sq));
    const double sigma_white = n_white * std::sqrt(cfg.sample_rate);  // per-sample, deg/s
    // a unit-variance AR(1) with decay phi looks white at long averaging
    // times with density sigma * sqrt(T0 * (1+phi)/(1-phi)); keeping the
    // correlation time near one sample confines the transition region to the
    // first few taus so the -1/2 slope carries the full configured density
    const double tau_fast = in.tau_fast_samples * dt;
    const double phi_fast = std::exp(-dt / tau_fast);
    const double fast_density = std::sqrt(dt * (1.0 + phi_fast) / (1.0 - phi_fast));
    const double lam_u = n_u / fast_density;
    const double lam_w = n_w / fast_density;
    const double lam_q = n_q / fast_density;

    // Gauss-Markov bias sized so the ADEV valley of white + rising GM sits at
    // the configured floor: with N the white density and tau_c >> valley time,
    // sigma_min^2 = 2*N*sigma_b*sqrt(2/(3*tau_c))  =>  solve for sigma_b.
    const double bi_rate = cfg.bi_gyro / 3600.0;  // deg/s
    double sigma_b = 0.0;
    if (bi_rate > 0.0) {
        sigma_b = (n_tot > 0.0)
                      ? bi_rate * bi_rate * std::sqrt(3.0 * cfg.bi_corr_time / 2.0) / (2.0 * n_tot)
                      : bi_rate;
    }

    // independent per-channel streams
    Rng rng_u(derive_seed(cfg.seed, 1)), rng_w(derive_seed(cfg.seed, 2)), rng_q(derive_seed(cfg.seed, 3));
    Rng rng_bias(derive_seed(cfg.seed, 4)), rng_white(derive_seed(cfg.seed, 5));
    Rng rng_eta1(derive_seed(cfg.seed, 6)), rng_eta2(derive_seed(cfg.seed, 7));
    Rng rng_dpe(derive_seed(cfg.seed, 8)), rng_spe_gm(derive_seed(cfg.seed, 9)), rng_spe_w(derive_seed(cfg.seed, 10));
    Rng rng_qs(derive_seed(cfg.seed, 11)), rng_qw(derive_seed(cfg.seed, 12));
    Rng rng_sf(derive_seed(cfg.seed, 13)), rng_df(derive_seed(cfg.seed, 14));
    Rng rng_drv(derive_seed(cfg.seed, 15)), rng_d1(derive_seed(cfg.seed, 16)), rng_d2(derive_seed(cfg.seed, 17));
    Rng rng_ref(derive_seed(cfg.seed, 18));
    Rng rng_mod(derive_seed(cfg.seed, 19));

    GaussMarkov gm_u(1.0, tau_fast, dt, rng_u);
    GaussMarkov gm_w(1.0, tau_fast, dt, rng_w);
    GaussMarkov gm_q(1.0, tau_fast, dt, rng_q);
    GaussMarkov gm_bias(sigma_b > 0.0 ? sigma_b : 1.0, cfg.bi_corr_time, dt, rng_bias);
    GaussMarkov gm_qslow(1.0, in.tau_quad_slow, dt, rng_qs);
    GaussMarkov gm_spe(1.0, tau_fast, dt, rng_spe_gm);
    GaussMarkov gm_drv(1.0, in.drive_gm_tau, dt, rng_drv);
    GaussMarkov gm_mod(1.0, in.tau_mod, dt, rng_mod);

    std::vector<double> u(n), w(n), q(n), bias(n), qslow(n), spe_gm(n), drv(n), wslow(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = gm_u.step(rng_u);
        w[i] = gm_w.step(rng_w);
        q[i] = gm_q.step(rng_q);
        bias[i] = sigma_b > 0.0 ? gm_bias.step(rng_bias) : 0.0;
        qslow[i] = gm_qslow.step(rng_qs);
        spe_gm[i] = gm_spe.step(rng_spe_gm);
        drv[i] = gm_drv.step(rng_drv);
        wslow[i] = gm_mod.step(rng_mod);
    }

    // frequency-error channels: both loops track the same residual u plus a
    // Coriolis detuning term proportional to the rotation rate; the drive
    // loop reports the same quantity rescaled, so the pair is exactly
    // proportional
    const double std_rate = detail::sample_std(truth.omega_true);
    const double fr = std_rate > 0.0 ? in.rate_share_sfe : 0.0;
    const double norm_sfe = std::sqrt(1.0 - fr) / std::sqrt(1.0 + in.meas_sfe * in.meas_sfe);
    std::vector<double> sfe(n), dfe(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rate_term =
            fr > 0.0 ? std::sqrt(fr) * truth.omega_true[i] / std_rate : 0.0;
        sfe[i] = in.sigma_freq_err * (norm_sfe * (u[i] + in.meas_sfe * rng_eta1.normal()) + rate_term);
        dfe[i] = in.dfe_gain * sfe[i];
    }
    const double std_sfe = detail::sample_std(sfe);

    // drive phase error: beta * sense_freq_err plus the demodulation
    // disturbance w, sized for rho(sense_freq_err, drive_phase_err) = 0.88;
    // the sense phase error follows the drive phase error with its own
    // disturbance at the cross-mode correlation rho_spe
    // the demodulation disturbance the phase detector reports scales with
    // the in-phase signal amplitude; at zero rate the term vanishes
    std::vector<double> mod_obs(n);
    for (std::size_t i = 0; i < n; ++i) mod_obs[i] = cfg.voltage(truth.omega_true[i]) * wslow[i];
    const double std_mod = detail::sample_std(mod_obs);
    if (std_mod > 0.0)
        for (double& v : mod_obs) v /= std_mod;

    const double kPhaseNoiseRatio = std::sqrt(1.0 / (0.88 * 0.88) - 1.0);
    const double c_dpe = kPhaseNoiseRatio * cfg.beta_phase * std_sfe;
    const double dpe_share_white = std::sqrt(std::max(
        0.0, 1.0 - in.dpe_share_fast * in.dpe_share_fast - in.dpe_share_mod * in.dpe_share_mod));
    std::vector<double> dpe(n), spe(n);
    for (std::size_t i = 0; i < n; ++i)
        dpe[i] = cfg.beta_phase * sfe[i] +
                 c_dpe * (in.dpe_share_fast * w[i] + in.dpe_share_mod * mod_obs[i] +
                          dpe_share_white * rng_dpe.normal());
    // the sense-loop phase error tracks its own frequency error through the
    // loop filter; unlike the drive demodulator it carries no independent
    // disturbance, so the channel is exactly proportional
    for (std::size_t i = 0; i < n; ++i) spe[i] = in.spe_gain * cfg.beta_phase * sfe[i];

    // in-phase voltage: compressed rate, modulated by the slow scale-factor
    // drift with temperature that the resonant-frequency channels expose,
    // plus rate-unit error terms mapped through the zero-rate scale
    const double mod_depth = in.demod_mod_depth * (cfg.arw_gyro / 0.44);
    std::vector<double> sense_in(n), temp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = truth.timestamps[i];
        temp[i] = in.temp_amp * std::sin(2.0 * std::numbers::pi * t / in.temp_period + in.temp_phase) +
                  in.temp_drift * t;
        const double err_rate = bias[i] + lam_u * u[i] + lam_w * w[i] + lam_q * q[i] +
                                sigma_white * rng_white.normal();
        sense_in[i] = cfg.voltage(truth.omega_true[i]) *
                          (1.0 + in.temp_scale_coeff * temp[i] + mod_depth * wslow[i]) +
                      err_rate / cfg.s0;
    }
    const double std_si = detail::sample_std(sense_in);

    // quadrature: kappa * in-phase plus extra variance sized for rho = 0.60
    // (extra std = 4/3 * kappa * std(sense_in)), split fast/slow/white
    const double extra = (4.0 / 3.0) * std::abs(cfg.kappa_quad) * std_si;
    const double s_fast = in.quad_share_fast * extra;
    const double s_slow = in.quad_share_slow * extra;
    const double s_wh = extra * std::sqrt(std::max(
                            0.0, 1.0 - in.quad_share_fast * in.quad_share_fast -
                                     in.quad_share_slow * in.quad_share_slow));

    SimResult out;
    out.gyro.resize(n);
    out.ref.resize(n);
    const double sigma_ref = (cfg.arw_ref / 60.0) * std::sqrt(cfg.sample_rate);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = truth.timestamps[i];
        const double f_sense = cfg.f0 - cfg.temp_coeff * temp[i];

        GyroRecord& g = out.gyro[i];
        g.t = t;
        g.sense_in = sense_in[i];
        g.sense_quad = cfg.kappa_quad * sense_in[i] + s_fast * q[i] + s_slow * qslow[i] +
                       s_wh * rng_qw.normal();
        const double freq_noise = in.sigma_sense_freq * rng_sf.normal();
        g.sense_freq = f_sense + freq_noise;
        g.sense_freq_err = sfe[i];
        g.sense_phase_err = spe[i];
        g.drive_in = in.drive_amp +
                     in.sigma_drive_in * (in.drive_share * drv[i] +
                                          std::sqrt(1.0 - in.drive_share * in.drive_share) * rng_d1.normal());
        g.drive_quad = in.drive_quad0 +
                       in.sigma_drive_quad *
                           (in.drive_quad_share * drv[i] +
                            std::sqrt(1.0 - in.drive_quad_share * in.drive_quad_share) * rng_d2.normal());
        g.drive_freq = f_sense + cfg.mode_split + freq_noise;
        g.drive_freq_err = dfe[i];
        g.drive_phase_err = dpe[i];

        out.ref[i] = {t, truth.omega_true[i] + sigma_ref * rng_ref.normal()};
    }
    return out;
}

// --- JSON (de)serialization for the reproducibility sidecar ---

inline void to_json(nlohmann::json& j, const RateProfileConfig& c) {
    j = {{"duration", c.duration},   {"dwell_min", c.dwell_min},
         {"dwell_max", c.dwell_max}, {"rate_max", c.rate_max},
         {"steady_fraction", c.steady_fraction}, {"ramp_time", c.ramp_time},
         {"sample_rate", c.sample_rate}, {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, RateProfileConfig& c) {
    c.duration = j.value("duration", c.duration);
    c.dwell_min = j.value("dwell_min", c.dwell_min);
    c.dwell_max = j.value("dwell_max", c.dwell_max);
    c.rate_max = j.value("rate_max", c.rate_max);
    c.steady_fraction = j.value("steady_fraction", c.steady_fraction);
    c.ramp_time = j.value("ramp_time", c.ramp_time);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json& j, const SimConfig& c) {
    j = {{"s0", c.s0},
         {"omega_sat", c.omega_sat},
         {"kappa_quad", c.kappa_quad},
         {"beta_phase", c.beta_phase},
         {"f0", c.f0},
         {"mode_split", c.mode_split},
         {"temp_coeff", c.temp_coeff},
         {"arw_gyro", c.arw_gyro},
         {"bi_gyro", c.bi_gyro},
         {"bi_corr_time", c.bi_corr_time},
         {"arw_ref", c.arw_ref},
         {"sample_rate", c.sample_rate},
         {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
    c.s0 = j.value("s0", c.s0);
    c.omega_sat = j.value("omega_sat", c.omega_sat);
    c.kappa_quad = j.value("kappa_quad", c.kappa_quad);
    c.beta_phase = j.value("beta_phase", c.beta_phase);
    c.f0 = j.value("f0", c.f0);
    c.mode_split = j.value("mode_split", c.mode_split);
    c.temp_coeff = j.value("temp_coeff", c.temp_coeff);
    c.arw_gyro = j.value("arw_gyro", c.arw_gyro);
    c.bi_gyro = j.value("bi_gyro", c.bi_gyro);
    c.bi_corr_time = j.value("bi_corr_time", c.bi_corr_time);
    c.arw_ref = j.value("arw_ref", c.arw_ref);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.seed = j.value("seed", c.seed);
}

}  // namespace gyrocal
