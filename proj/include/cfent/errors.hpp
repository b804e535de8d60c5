#ifndef CFENT_ERRORS_HPP
#define CFENT_ERRORS_HPP

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cfent {

namespace detail {

// Short %g rendering for error messages.
inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A denominator or normalisation factor vanished.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested steady state of a drift matrix that is unstable or marginal.
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear algebra failed (singular system, residual above tolerance).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double condition = 0.0)
        : std::runtime_error(what), condition_(condition) {}

    /// Reciprocal condition estimate of the failing system, 0 if unknown.
    double condition() const { return condition_; }

private:
    double condition_;
};

/// Propagation produced non-finite entries.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : NumericalError(what), step_(step) {}

    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Covariance matrix violates the uncertainty principle.
class PhysicalityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation requested outside the regime where its closed form holds.
class UnsupportedRegimeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Matrix of the wrong shape or symmetry.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sweep in which every grid point was unstable.
class NoFeasiblePointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cfent

#endif
