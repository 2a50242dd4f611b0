#pragma once

#include <stdexcept>
#include <string>

namespace nploc {

/** Base class for every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class DegenerateParametrization : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

// Eigensolver non-convergence, singular factorization and similar.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class MissingEigenvalue : public Error {
public:
    using Error::Error;
};

class MultiplicityMismatch : public Error {
public:
    using Error::Error;
};

class TrackingError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class InsufficientGrid : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace nploc
