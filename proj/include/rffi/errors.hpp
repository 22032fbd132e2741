#pragma once

#include <stdexcept>
#include <string>

namespace rffi {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration (bad spreading factor, K < 2, odd embedding dim, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Input too short for the requested operation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Zero-power or otherwise unusable signal.
class DegenerateSignalError : public Error {
public:
    using Error::Error;
};

// Correlation peak never reached the detection threshold.
class NoPacketError : public Error {
public:
    using Error::Error;
};

// Shape mismatch between tensors/vectors.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Out-of-range label or index.
class IndexError : public Error {
public:
    using Error::Error;
};

// Corrupt, truncated or incompatible file.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace rffi
