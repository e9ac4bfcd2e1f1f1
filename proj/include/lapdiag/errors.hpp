#pragma once

#include <stdexcept>
#include <string>

namespace lapdiag {

/// Bad caller input: dimension mismatch, violated precondition, malformed file.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but outside the domain of the operation
/// (non-PD weighting matrix, non-finite potential inside a quadrature box).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base class for failures of an otherwise valid numerical computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mode search left every reasonable neighbourhood of the start point.
/// For logistic regression this signals a non-existent (infinite) MLE.
class ModeDivergedError : public NumericalError {
public:
    explicit ModeDivergedError(const std::string& what)
        : NumericalError("mode diverged: " + what) {}
};

/// Hessian at the located mode is not positive definite.
class DegenerateFitError : public NumericalError {
public:
    explicit DegenerateFitError(const std::string& what)
        : NumericalError("degenerate fit: " + what) {}
};

/// A model lacks the derivative structure an estimator requires.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class UnsupportedDimensionError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

}  // namespace lapdiag
