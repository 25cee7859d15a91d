#pragma once

#include <stdexcept>
#include <string>

namespace longmem {

// Common base so callers can catch everything raised by this library in one
// handler while still discriminating on the concrete type when they care.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A parameter is outside its mathematical domain (H outside (0,1), sigma <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// The circulant embedding produced eigenvalues too negative to clamp.
class EmbeddingFailure : public Error {
public:
    using Error::Error;
};

// Dense covariance factorization failed (matrix not numerically SPD).
class FactorizationFailure : public Error {
public:
    using Error::Error;
};

// An SDE discretization would be unstable with the requested step size.
class StabilityError : public Error {
public:
    using Error::Error;
};

// A window or lag set collapsed to something with no usable variation.
class DegenerateWindow : public Error {
public:
    using Error::Error;
};

// The input series is too short for the requested statistic.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// An estimator could not produce a finite value from otherwise valid input.
class EstimationFailure : public Error {
public:
    using Error::Error;
};

// Tensor or sequence dimensions do not match what an operation expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A gradient became NaN or infinite during backpropagation or an update.
class NonFiniteGradient : public Error {
public:
    using Error::Error;
};

// Training loss diverged beyond the configured tolerance for recovery.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

// A model checkpoint is malformed, truncated, or from an unknown version.
class CheckpointError : public Error {
public:
    using Error::Error;
};

// A run configuration is self-inconsistent or incomplete.
class ConfigError : public Error {
public:
    using Error::Error;
};

// File input/output failed (missing file, parse error, write failure).
class IoError : public Error {
public:
    using Error::Error;
};

}
