// Core record and dataset types shared across the calibration pipeline.
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gyrocal/error.hpp"

namespace gyrocal {

// One timestamped multi-channel sample of the resonator outputs: in-phase and
// quadrature demodulated voltages, resonant frequencies, and the loop
// frequency/phase tracking errors for both the sense and drive modes.
struct GyroRecord {
    double t = 0.0;                // seconds, monotone clock
    double sense_in = 0.0;         // volts
    double sense_quad = 0.0;       // volts
    double sense_freq = 0.0;       // hertz
    double sense_freq_err = 0.0;   // hertz
    double sense_phase_err = 0.0;  // degrees
    double drive_in = 0.0;         // volts
    double drive_quad = 0.0;       // volts
    double drive_freq = 0.0;       // hertz
    double drive_freq_err = 0.0;   // hertz
    double drive_phase_err = 0.0;  // degrees

    bool finite() const {
        for (double v : as_array())
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool valid() const { return finite() && sense_freq > 0.0 && drive_freq > 0.0; }

    std::array<double, 11> as_array() const {
        return {t,        sense_in, sense_quad, sense_freq, sense_freq_err, sense_phase_err,
                drive_in, drive_quad, drive_freq, drive_freq_err, drive_phase_err};
    }
};

// Channel names in canonical column order (the GyroRecord fields minus t).
inline const std::vector<std::string>& gyro_channel_names() {
    static const std::vector<std::string> names = {
        "sense_in",  "sense_quad", "sense_freq", "sense_freq_err", "sense_phase_err",
        "drive_in",  "drive_quad", "drive_freq", "drive_freq_err", "drive_phase_err"};
    return names;
}

constexpr int kGyroChannelCount = 10;

// Reference IMU sample: Z-axis rotation rate at a timestamp.
struct RefRecord {
    double t = 0.0;      // seconds
    double omega = 0.0;  // degrees/second
};

// Time-aligned supervised dataset: one row per retained gyro sample, feature
// columns from the gyro channels (possibly lag-augmented), target from the
// interpolated reference rate.
struct AlignedDataset {
    std::vector<double> timestamps;         // seconds, strictly increasing
    Eigen::MatrixXd features;               // n x d
    std::vector<std::string> feature_names; // d
    Eigen::VectorXd target;                 // degrees/second
    double sample_interval = 0.0;           // seconds, median delta-t

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    void validate() const {
        const Eigen::Index n = features.rows();
        if (n < 2) throw Error(ErrorKind::TooFewSamples, "dataset needs at least 2 rows");
        if (static_cast<Eigen::Index>(timestamps.size()) != n || target.size() != n)
            throw Error(ErrorKind::LengthMismatch, "timestamps/target/features row mismatch");
        if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
            throw Error(ErrorKind::NameMismatch, "feature_names does not match feature columns");
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (!(timestamps[i] > timestamps[i - 1]))
                throw Error(ErrorKind::NonFiniteInput, "timestamps not strictly increasing");
        if (!features.allFinite() || !target.allFinite())
            throw Error(ErrorKind::NonFiniteInput, "non-finite feature or target value");
    }

    int column_index(const std::string& name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j)
            if (feature_names[j] == name) return static_cast<int>(j);
        return -1;
    }
};

}  // namespace gyrocal
