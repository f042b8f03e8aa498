#pragma once

#include <stdexcept>
#include <string>

namespace smokegram {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape mismatch between matrices/vectors.
struct DimensionError : Error {
    using Error::Error;
};

// Input data violates a contract (bad label, non-monotone timestamps, ...).
struct DataError : Error {
    using Error::Error;
};

// Text that does not parse (CSV rows, key-value files, model files).
struct ParseError : Error {
    using Error::Error;
};

struct MissingFileError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required (loss, gradients).
struct NumericError : Error {
    using Error::Error;
};

// Artifacts that parse but cannot be used together (feature order,
// model family, unsupported format version).
struct CompatibilityError : Error {
    using Error::Error;
};

// Distinct model-load failures.
struct ModelVersionError : CompatibilityError {
    using CompatibilityError::CompatibilityError;
};
struct ModelFamilyError : CompatibilityError {
    using CompatibilityError::CompatibilityError;
};
struct ModelChecksumError : ParseError {
    using ParseError::ParseError;
};
struct ModelTruncatedError : ParseError {
    using ParseError::ParseError;
};

} // namespace smokegram
