// Error taxonomy shared by all gyrocal modules.
#pragma once

#include <stdexcept>
#include <string>

namespace gyrocal {

enum class ErrorKind {
    // input / data errors
    MissingColumn,
    EmptyStream,
    NoOverlap,
    TooFewSamples,
    LengthMismatch,
    DimensionMismatch,
    NameMismatch,
    LagTooLarge,
    InsufficientOverlap,
    EmptyTrainingSet,
    InconsistentTestSets,
    // configuration errors
    InvalidConfig,
    InvalidDims,
    InvalidEps,
    // numeric failures
    NonFiniteInput,
    DegenerateSegment,
    ZeroVariance,
    TauTooLarge,
    NoSlopeRegion,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::EmptyStream: return "EmptyStream";
        case ErrorKind::NoOverlap: return "NoOverlap";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NameMismatch: return "NameMismatch";
        case ErrorKind::LagTooLarge: return "LagTooLarge";
        case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorKind::InconsistentTestSets: return "InconsistentTestSets";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InvalidDims: return "InvalidDims";
        case ErrorKind::InvalidEps: return "InvalidEps";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::DegenerateSegment: return "DegenerateSegment";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::TauTooLarge: return "TauTooLarge";
        case ErrorKind::NoSlopeRegion: return "NoSlopeRegion";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Process exit codes used by the CLI. Usage errors (bad flags, bad config)
// map to 1, data errors to 2, numeric failures to 3.
inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidDims:
        case ErrorKind::InvalidEps:
            return 1;
        case ErrorKind::NonFiniteInput:
        case ErrorKind::DegenerateSegment:
        case ErrorKind::ZeroVariance:
        case ErrorKind::TauTooLarge:
        case ErrorKind::NoSlopeRegion:
            return 3;
        default:
            return 2;
    }
}

}  // namespace gyrocal
