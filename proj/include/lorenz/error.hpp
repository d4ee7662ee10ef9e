#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lorenz {

/// Base of every error raised by the toolkit. The CLI maps these to exit
/// status 1; ValidationError maps to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Raised when the adaptive integrator cannot continue (step-size underflow,
/// non-finite state, runaway growth). Carries the last accepted point.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t, const Eigen::Vector3d& state)
        : Error(what), last_time_(t), last_state_(state) {}

    double last_time() const { return last_time_; }
    const Eigen::Vector3d& last_state() const { return last_state_; }

private:
    double last_time_;
    Eigen::Vector3d last_state_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residual_history() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// A Lyapunov run that could not finish. The partial exponents are the
/// accumulated log stretches divided by the time reached.
class LyapunovError : public Error {
public:
    LyapunovError(const std::string& what, std::vector<double> partial, double time)
        : Error(what), partial_(std::move(partial)), time_(time) {}

    const std::vector<double>& partial_exponents() const { return partial_; }
    double accumulated_time() const { return time_; }

private:
    std::vector<double> partial_;
    double time_;
};

}  // namespace lorenz
