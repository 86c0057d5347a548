#pragma once

#include <stdexcept>
#include <string>

namespace latcorr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid distribution or model parameter (e.g. t with df <= 2).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Numerical procedure failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or config.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace latcorr
