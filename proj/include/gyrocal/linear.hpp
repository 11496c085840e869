// Traditional calibration baseline: detect controlled-rate segments in the
// reference stream, fit a constant scale factor from one segment, and apply
// omega = s_linear * V_sense_in.
#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gyrocal/csv.hpp"
#include "gyrocal/error.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

struct RateSegment {
    double start = 0.0;           // seconds
    double end = 0.0;             // seconds
    double commanded_rate = 0.0;  // degrees/second, segment mean
    bool steady = false;          // |rate| within tolerance of zero
};

struct LinearModel {
    double s_linear = 0.0;  // degrees/second per volt
    RateSegment source_segment;
};

// Maximal intervals where |omega - segment mean| <= rate_tol for at least
// min_dwell seconds. Greedy scan; the running mean drifts off during ramps,
// which terminates the interval.
inline std::vector<RateSegment> detect_segments(const std::vector<RefRecord>& ref, double rate_tol,
                                                double min_dwell) {
    std::vector<RateSegment> out;
    if (ref.empty()) return out;
    std::size_t i = 0;
    while (i < ref.size()) {
        double sum = ref[i].omega;
        double lo = ref[i].omega;
        double hi = ref[i].omega;
        std::size_t count = 1;
        std::size_t j = i + 1;
        while (j < ref.size()) {
            const double mean_next = (sum + ref[j].omega) / static_cast<double>(count + 1);
            const double lo_next = std::min(lo, ref[j].omega);
            const double hi_next = std::max(hi, ref[j].omega);
            // every member must stay within tolerance of the running mean;
            // tracking the extremes makes the check exact
            if (hi_next - mean_next > rate_tol || mean_next - lo_next > rate_tol) break;
            sum += ref[j].omega;
            lo = lo_next;
            hi = hi_next;
            ++count;
            ++j;
        }
        const double duration = ref[j - 1].t - ref[i].t;
        if (count >= 2 && duration >= min_dwell) {
            RateSegment seg;
            seg.start = ref[i].t;
            seg.end = ref[j - 1].t;
            seg.commanded_rate = sum / static_cast<double>(count);
            seg.steady = std::abs(seg.commanded_rate) <= rate_tol;
            out.push_back(seg);
        }
        i = j;
    }
    return out;
}

// s_linear = commanded_rate / mean(sense_in over the segment).
inline LinearModel fit_scale_factor(const AlignedDataset& ds, const RateSegment& seg) {
    const int col = ds.column_index("sense_in");
    if (col < 0) throw Error(ErrorKind::NameMismatch, "fit_scale_factor: dataset has no sense_in column");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.timestamps.size(); ++i) {
        if (ds.timestamps[i] < seg.start || ds.timestamps[i] > seg.end) continue;
        sum += ds.features(static_cast<Eigen::Index>(i), col);
        ++count;
    }
    if (count < 10) throw Error(ErrorKind::InsufficientOverlap, "fit_scale_factor: fewer than 10 samples in segment");
    const double mean_v = sum / static_cast<double>(count);
    if (std::abs(mean_v) < 1e-12)
        throw Error(ErrorKind::DegenerateSegment, "fit_scale_factor: near-zero mean voltage");
    LinearModel model;
    model.s_linear = seg.commanded_rate / mean_v;
    model.source_segment = seg;
    if (!std::isfinite(model.s_linear) || model.s_linear == 0.0)
        throw Error(ErrorKind::DegenerateSegment, "fit_scale_factor: degenerate scale factor");
    return model;
}

struct ScaleFactorRow {
    int peak_index = 0;  // 1-based, order of appearance
    RateSegment segment;
    double scale_factor = 0.0;
    bool ok = false;
    std::string error;
};

// One row per nonzero-rate segment; per-segment failures are recorded inline.
inline std::vector<ScaleFactorRow> scale_factor_table(const AlignedDataset& ds,
                                                      const std::vector<RateSegment>& segments) {
    std::vector<ScaleFactorRow> rows;
    int peak = 0;
    for (const auto& seg : segments) {
        if (seg.steady) continue;
        ScaleFactorRow row;
        row.peak_index = ++peak;
        row.segment = seg;
        try {
            row.scale_factor = fit_scale_factor(ds, seg).s_linear;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_scale_factor_csv(std::ostream& out, const std::vector<ScaleFactorRow>& rows) {
    out << "peak_index,commanded_rate,scale_factor\n";
    for (const auto& r : rows) {
        out << r.peak_index << ',' << csv::format_double(r.segment.commanded_rate) << ','
            << (r.ok ? csv::format_double(r.scale_factor) : std::string("nan")) << '\n';
    }
}

inline std::vector<double> apply_linear(const LinearModel& model, std::span<const double> sense_in) {
    std::vector<double> omega(sense_in.size());
    for (std::size_t i = 0; i < sense_in.size(); ++i) omega[i] = model.s_linear * sense_in[i];
    return omega;
}

inline void to_json(nlohmann::json& j, const RateSegment& s) {
    j = {{"start", s.start}, {"end", s.end}, {"commanded_rate", s.commanded_rate}, {"steady", s.steady}};
}

inline void from_json(const nlohmann::json& j, RateSegment& s) {
    s.start = j.at("start").get<double>();
    s.end = j.at("end").get<double>();
    s.commanded_rate = j.at("commanded_rate").get<double>();
    s.steady = j.value("steady", false);
}

inline void to_json(nlohmann::json& j, const LinearModel& m) {
    j = {{"kind", "linear"}, {"s_linear", m.s_linear}, {"source_segment", m.source_segment}};
}

inline void from_json(const nlohmann::json& j, LinearModel& m) {
    m.s_linear = j.at("s_linear").get<double>();
    m.source_segment = j.at("source_segment").get<RateSegment>();
}

}  // namespace gyrocal
