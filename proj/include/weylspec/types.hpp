#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace weylspec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I_unit{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration; `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A documented precondition of an operation was violated by its arguments.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical computation failed (step underflow, non-convergence, singular solve).
class ComputationError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public ComputationError {
public:
    IntegrationError(const std::string& what, double location)
        : ComputationError(what + " (at x = " + std::to_string(location) + ")"), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

class ConvergenceError : public ComputationError {
public:
    ConvergenceError(const std::string& what, double achieved)
        : ComputationError(what + " (achieved increment " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class SingularityError : public ComputationError {
public:
    SingularityError(const std::string& what, double condition)
        : ComputationError(what + " (reciprocal condition " + std::to_string(condition) + ")"),
          condition_(condition) {}
    double reciprocal_condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Square root on the branch Im(sqrt(z)) >= 0.
inline cplx sqrt_upper(cplx z) {
    cplx w = std::sqrt(z);
    if (w.imag() < 0.0) w = -w;
    return w;
}

}  // namespace weylspec
