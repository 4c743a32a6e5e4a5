#pragma once

#include <stdexcept>
#include <string>

namespace ovconv {

// Base for all library errors. Input/shape problems and numerical failures
// derive from it separately so callers can map them to distinct exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed inputs.
struct InputError : Error {
    using Error::Error;
};
struct DimensionMismatch : InputError {
    using InputError::InputError;
};
struct NotHermitian : InputError {
    using InputError::InputError;
};
struct WeightsInvalid : InputError {
    using InputError::InputError;
};
struct NegativeScale : InputError {
    using InputError::InputError;
};
struct NotInHalfPlane : InputError {
    using InputError::InputError;
};
struct NotCompletelyPositive : InputError {
    using InputError::InputError;
};
struct TooLarge : InputError {
    using InputError::InputError;
};
struct TruncationTooLarge : InputError {
    using InputError::InputError;
};
struct DegreeExceedsTruncation : InputError {
    using InputError::InputError;
};
struct IncompatibleSpec : InputError {
    using InputError::InputError;
};
struct OutsideInversionDomain : InputError {
    using InputError::InputError;
};
struct PreconditionViolated : InputError {
    using InputError::InputError;
};
struct ParseError : InputError {
    using InputError::InputError;
};

// Numerical failures.
struct NumericError : Error {
    using Error::Error;
};
struct IllConditioned : NumericError {
    using NumericError::NumericError;
};
struct SingularExponent : NumericError {
    using NumericError::NumericError;
};
struct NonConvergence : NumericError {
    using NumericError::NumericError;
};

}  // namespace ovconv
