#pragma once

#include <stdexcept>
#include <string>

namespace csmooth {

// Error taxonomy, mapped onto CLI exit codes:
//   ConfigError -> 2, DataError -> 3, NumericError -> 4, IoError -> 5.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimation-stage failures. All are numeric errors for exit-code purposes
// but callers (refuters, the ATE table) distinguish them by type.
struct WeakInstrumentError : NumericError {
    using NumericError::NumericError;
};

struct StratumError : NumericError {
    using NumericError::NumericError;
};

struct SingularDesignError : NumericError {
    using NumericError::NumericError;
};

struct IdentificationError : NumericError {
    using NumericError::NumericError;
};

struct TrainingError : NumericError {
    using NumericError::NumericError;
};

struct LookupError : NumericError {
    using NumericError::NumericError;
};

struct RefutationError : NumericError {
    using NumericError::NumericError;
};

}  // namespace csmooth
