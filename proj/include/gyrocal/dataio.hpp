// Parsing, validation and time-alignment of the gyroscope multi-channel
// stream with the reference-IMU rate stream.
//
// CSV conventions: comma separated, header row required, decimal numbers with
// optional exponent, UTF-8. Rows with unparsable or non-finite values (or a
// non-positive resonant frequency) are skipped and counted, not fatal.
#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gyrocal/csv.hpp"
#include "gyrocal/error.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

// Column-name map for the gyro stream. Defaults to the canonical names.
struct GyroSchema {
    std::string t = "t";
    std::string sense_in = "sense_in";
    std::string sense_quad = "sense_quad";
    std::string sense_freq = "sense_freq";
    std::string sense_freq_err = "sense_freq_err";
    std::string sense_phase_err = "sense_phase_err";
    std::string drive_in = "drive_in";
    std::string drive_quad = "drive_quad";
    std::string drive_freq = "drive_freq";
    std::string drive_freq_err = "drive_freq_err";
    std::string drive_phase_err = "drive_phase_err";

    std::vector<std::string> columns() const {
        return {t,        sense_in,   sense_quad, sense_freq,     sense_freq_err, sense_phase_err,
                drive_in, drive_quad, drive_freq, drive_freq_err, drive_phase_err};
    }
};

struct RefSchema {
    std::string t = "t";
    std::string omega = "omega";
};

struct ParseResult {
    std::vector<GyroRecord> records;
    std::size_t skipped = 0;
};

namespace detail {
inline int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}
}  // namespace detail

inline ParseResult parse_gyro_stream(std::istream& in, const GyroSchema& schema = {}) {
    std::vector<std::string> header;
    if (!csv::read_header(in, header)) throw Error(ErrorKind::EmptyStream, "gyro stream has no header row");

    const auto wanted = schema.columns();
    std::vector<int> idx(wanted.size());
    for (std::size_t i = 0; i < wanted.size(); ++i) {
        idx[i] = detail::find_column(header, wanted[i]);
        if (idx[i] < 0) throw Error(ErrorKind::MissingColumn, "gyro stream missing column '" + wanted[i] + "'");
    }

    ParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        double values[11];
        bool ok = true;
        for (std::size_t i = 0; i < 11 && ok; ++i) {
            const auto col = static_cast<std::size_t>(idx[i]);
            if (col >= fields.size()) {
                ok = false;
                break;
            }
            const auto v = csv::parse_double(fields[col]);
            if (!v || !std::isfinite(*v)) {
                ok = false;
                break;
            }
            values[i] = *v;
        }
        if (ok) {
            GyroRecord rec{values[0], values[1], values[2], values[3], values[4], values[5],
                           values[6], values[7], values[8], values[9], values[10]};
            if (!rec.valid()) ok = false;
            if (ok) result.records.push_back(rec);
        }
        if (!ok) ++result.skipped;
    }
    if (result.records.empty()) throw Error(ErrorKind::EmptyStream, "gyro stream has zero valid rows");
    return result;
}

struct RefParseResult {
    std::vector<RefRecord> records;
    std::size_t skipped = 0;
};

inline RefParseResult parse_ref_stream(std::istream& in, const RefSchema& schema = {}) {
    std::vector<std::string> header;
    if (!csv::read_header(in, header)) throw Error(ErrorKind::EmptyStream, "reference stream has no header row");
    const int ti = detail::find_column(header, schema.t);
    const int oi = detail::find_column(header, schema.omega);
    if (ti < 0) throw Error(ErrorKind::MissingColumn, "reference stream missing column '" + schema.t + "'");
    if (oi < 0) throw Error(ErrorKind::MissingColumn, "reference stream missing column '" + schema.omega + "'");

    RefParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        const std::size_t need = static_cast<std::size_t>(std::max(ti, oi));
        if (need >= fields.size()) {
            ++result.skipped;
            continue;
        }
        const auto t = csv::parse_double(fields[static_cast<std::size_t>(ti)]);
        const auto o = csv::parse_double(fields[static_cast<std::size_t>(oi)]);
        if (!t || !o || !std::isfinite(*t) || !std::isfinite(*o)) {
            ++result.skipped;
            continue;
        }
        result.records.push_back({*t, *o});
    }
    if (result.records.empty()) throw Error(ErrorKind::EmptyStream, "reference stream has zero valid rows");
    return result;
}

inline void write_gyro_csv(std::ostream& out, const std::vector<GyroRecord>& records,
                           const GyroSchema& schema = {}) {
    const auto cols = schema.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out << ',';
        out << cols[i];
    }
    out << '\n';
    for (const auto& r : records) {
        const auto a = r.as_array();
        csv::write_row(out, std::vector<double>(a.begin(), a.end()));
    }
}

inline void write_ref_csv(std::ostream& out, const std::vector<RefRecord>& records,
                          const RefSchema& schema = {}) {
    out << schema.t << ',' << schema.omega << '\n';
    for (const auto& r : records) csv::write_row(out, {r.t, r.omega});
}

namespace detail {
inline void require_strictly_increasing(const std::vector<double>& ts, const char* what) {
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (!(ts[i] > ts[i - 1]))
            throw Error(ErrorKind::NonFiniteInput, std::string(what) + ": timestamps not strictly increasing");
}
}  // namespace detail

// Interpolates the reference rate onto the gyro timestamps. A gyro sample is
// dropped when it falls outside the reference time span or when its bracketing
// reference gap exceeds max_gap. Feature columns are the 10 gyro channels.
inline AlignedDataset align(const std::vector<GyroRecord>& gyro, const std::vector<RefRecord>& ref,
                            double max_gap) {
    if (gyro.empty() || ref.empty()) throw Error(ErrorKind::EmptyStream, "align: empty input stream");
    {
        std::vector<double> gt, rt;
        gt.reserve(gyro.size());
        rt.reserve(ref.size());
        for (const auto& g : gyro) gt.push_back(g.t);
        for (const auto& r : ref) rt.push_back(r.t);
        detail::require_strictly_increasing(gt, "align gyro");
        detail::require_strictly_increasing(rt, "align ref");
    }
    if (gyro.back().t < ref.front().t || gyro.front().t > ref.back().t)
        throw Error(ErrorKind::NoOverlap, "align: gyro and reference time spans are disjoint");

    std::vector<std::size_t> kept;
    std::vector<double> target;
    if (ref.size() < 2) throw Error(ErrorKind::TooFewSamples, "align: reference needs at least 2 samples");
    std::size_t k = 0;  // ref index, two-pointer sweep
    for (std::size_t i = 0; i < gyro.size(); ++i) {
        const double t = gyro[i].t;
        if (t < ref.front().t || t > ref.back().t) continue;
        while (k + 2 < ref.size() && ref[k + 1].t < t) ++k;
        // bracket [k, k+1] with ref[k].t <= t <= ref[k+1].t
        const double gap = ref[k + 1].t - ref[k].t;
        if (gap > max_gap) continue;
        const double w = (t - ref[k].t) / gap;
        kept.push_back(i);
        target.push_back(ref[k].omega + w * (ref[k + 1].omega - ref[k].omega));
    }
    if (kept.size() < 2) throw Error(ErrorKind::TooFewSamples, "align: fewer than 2 samples after drops");

    AlignedDataset ds;
    ds.feature_names = gyro_channel_names();
    const auto n = static_cast<Eigen::Index>(kept.size());
    ds.features.resize(n, kGyroChannelCount);
    ds.target.resize(n);
    ds.timestamps.resize(kept.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& g = gyro[kept[static_cast<std::size_t>(r)]];
        const auto a = g.as_array();
        ds.timestamps[static_cast<std::size_t>(r)] = g.t;
        for (int c = 0; c < kGyroChannelCount; ++c) ds.features(r, c) = a[static_cast<std::size_t>(c) + 1];
        ds.target(r) = target[static_cast<std::size_t>(r)];
    }
    std::vector<double> dts;
    dts.reserve(kept.size() - 1);
    for (std::size_t i = 1; i < kept.size(); ++i) dts.push_back(ds.timestamps[i] - ds.timestamps[i - 1]);
    std::nth_element(dts.begin(), dts.begin() + static_cast<long>(dts.size() / 2), dts.end());
    ds.sample_interval = dts[dts.size() / 2];
    ds.validate();
    return ds;
}

// Chronological split: train takes the earliest floor(n*train_frac) rows.
// No shuffling; lagged features would leak future information otherwise.
inline std::pair<AlignedDataset, AlignedDataset> split_chronological(const AlignedDataset& ds,
                                                                     double train_frac) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw Error(ErrorKind::InvalidConfig, "split: train_frac must be in (0,1)");
    const auto n = ds.rows();
    const auto n_train = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * train_frac));
    const auto n_test = n - n_train;
    if (n_train < 2 || n_test < 2)
        throw Error(ErrorKind::TooFewSamples, "split: each side needs at least 2 rows");

    auto slice = [&](Eigen::Index start, Eigen::Index count) {
        AlignedDataset part;
        part.feature_names = ds.feature_names;
        part.features = ds.features.middleRows(start, count);
        part.target = ds.target.segment(start, count);
        part.timestamps.assign(ds.timestamps.begin() + start, ds.timestamps.begin() + start + count);
        part.sample_interval = ds.sample_interval;
        return part;
    };
    return {slice(0, n_train), slice(n_train, n_test)};
}

}  // namespace gyrocal
