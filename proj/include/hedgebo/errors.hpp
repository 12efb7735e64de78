#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace hedgebo {

/// Bad shapes, out-of-range parameters, non-finite inputs.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization failed even after jitter escalation, or round-off produced
/// a clearly negative variance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Test function evaluated outside of its box.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Acquisition kind that cannot be evaluated pointwise (Thompson sampling).
class UnsupportedDispatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The black-box objective returned a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, Eigen::VectorXd x)
        : std::runtime_error(what), x_(std::move(x)) {}

    const Eigen::VectorXd& point() const { return x_; }

private:
    Eigen::VectorXd x_;
};

/// Gap metric undefined because the first sample already attains the optimum.
class DegenerateStart : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A registered test function failed its optimum self-check.
class SelfCheckError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Aggregation requested over a record without a single successful trial.
class EmptyAggregate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace hedgebo
