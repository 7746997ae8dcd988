#pragma once

#include <stdexcept>
#include <string>

namespace bot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry with zero range, bearing undefined
struct InvalidGeometry : Error {
    using Error::Error;
};

struct FilterError : Error {
    using Error::Error;
};

// innovation variance dropped to zero or below
struct NumericalFailure : FilterError {
    using FilterError::FilterError;
};

// non-finite state or covariance
struct FilterDivergence : FilterError {
    using FilterError::FilterError;
};

// covariance factorization failed even after regularisation
struct FilterHealthError : FilterError {
    using FilterError::FilterError;
};

// API misuse, e.g. stepping a finished episode
struct UsageError : Error {
    using Error::Error;
};

// non-finite network output
struct ModelCorruption : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace bot
