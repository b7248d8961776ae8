#pragma once

#include <stdexcept>
#include <string>

namespace nlcp {

// Domain errors thrown by the statistical procedures. Precondition
// violations (bad dimensions, invalid configs) use std::invalid_argument.

struct ZeroOutputWeightError : std::runtime_error {
    explicit ZeroOutputWeightError(const std::string& what) : std::runtime_error(what) {}
};

struct NotPsdError : std::runtime_error {
    explicit NotPsdError(const std::string& what) : std::runtime_error(what) {}
};

struct TooShortError : std::invalid_argument {
    explicit TooShortError(const std::string& what) : std::invalid_argument(what) {}
};

struct SegmentTooShortError : std::runtime_error {
    explicit SegmentTooShortError(const std::string& what) : std::runtime_error(what) {}
};

struct AllWeightsZeroError : std::runtime_error {
    explicit AllWeightsZeroError(const std::string& what) : std::runtime_error(what) {}
};

// The (eta, gamma) = (0, 1/2) corner has no bridge-type limit; callers must
// switch to the finite-sample bootstrap calibration.
struct UseFiniteSampleCalibration : std::runtime_error {
    explicit UseFiniteSampleCalibration(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nlcp
