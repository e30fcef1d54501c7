#pragma once

#include <stdexcept>
#include <string>

namespace campro {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster/tensor dimensions do not agree or are degenerate.
class ShapeError : public Error {
public:
    using Error::Error;
};

class InvalidKernelError : public Error {
public:
    using Error::Error;
};

class InvalidThresholdError : public Error {
public:
    using Error::Error;
};

class InvalidRangeError : public Error {
public:
    using Error::Error;
};

/// Input carries no usable content (empty mask, empty histogram, ...).
class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Metric is not defined for this input (e.g. weighted F on an empty GT).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace campro
