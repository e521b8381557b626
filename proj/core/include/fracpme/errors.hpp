#pragma once

#include <stdexcept>
#include <string>

namespace fracpme {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. k(t) at t <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or construction parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid input to an audit/verification routine (mismatched grids, bad test fields).
class InputError : public Error {
public:
    using Error::Error;
};

/// Value outside a tabulated range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A structural hypothesis on the problem data failed its numerical probe.
class HypothesisViolation : public Error {
public:
    HypothesisViolation(std::string hypothesis, const std::string& what)
        : Error(hypothesis + ": " + what), hypothesis_(std::move(hypothesis)) {}

    const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

/// Quadrature or compression could not reach the requested accuracy.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Broken internal invariant (missing history step, size mismatch inside a solver).
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace fracpme
