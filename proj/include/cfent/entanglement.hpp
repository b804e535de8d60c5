#ifndef CFENT_ENTANGLEMENT_HPP
#define CFENT_ENTANGLEMENT_HPP

// Gaussian entanglement measures on quadrature covariance matrices.
//
// Convention: quadratures are normalised so that the vacuum variance is 1/2.
// A covariance matrix is physical iff every symplectic eigenvalue is >= 1/2,
// and two modes are entangled iff the smallest symplectic eigenvalue of the
// partially transposed matrix is below 1/2.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynamics.hpp"
#include "errors.hpp"

namespace cfent {

using Matrix4 = Eigen::Matrix4d;

inline constexpr double vacuum_variance = 0.5;
inline constexpr double physicality_tolerance = 1e-8;
inline constexpr double negativity_floor = 1e-12;

/// Block diagonal form with [[0, 1], [-1, 0]] per mode.
inline Eigen::MatrixXd symplectic_form(int modes)
{
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

/// diag(1, 1, 1, -1): flips the momentum of the second mode.
inline Matrix4 partial_transpose_matrix()
{
    return Eigen::Vector4d(1.0, 1.0, 1.0, -1.0).asDiagonal();
}

inline Matrix4 partial_transpose(const Matrix4& v)
{
    const Matrix4 p = partial_transpose_matrix();
    return p * v * p;
}

namespace detail {

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& v, double rel = 1e-10)
{
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    return v.rows() == v.cols() && (v - v.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

}  // namespace detail

/// Covariance of the two mechanical modes: the top-left 4x4 block.
inline Matrix4 mechanical_submatrix(const Matrix6& v)
{
    if (!detail::is_symmetric(v)) {
        throw ShapeError("mechanical_submatrix: covariance matrix is not symmetric");
    }
    return v.topLeftCorner<4, 4>();
}

/// Symplectic eigenvalues in ascending order, read off the imaginary parts of
/// the spectrum of Omega V (which is {+-i nu_k} for positive-definite V).
inline std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& v)
{
    if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0) {
        throw ShapeError("symplectic_spectrum: matrix must be 2n x 2n");
    }
    if (!detail::is_symmetric(v)) {
        throw ShapeError("symplectic_spectrum: matrix is not symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(v).info() != Eigen::Success) {
        throw PhysicalityError("symplectic_spectrum: matrix is not positive definite");
    }
    const int modes = static_cast<int>(v.rows() / 2);
    const Eigen::MatrixXd ov = symplectic_form(modes) * v;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(ov, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symplectic_spectrum: eigenvalue iteration did not converge");
    }
    std::vector<double> magnitudes(static_cast<std::size_t>(ov.rows()));
    for (Eigen::Index i = 0; i < ov.rows(); ++i) {
        magnitudes[static_cast<std::size_t>(i)] = std::abs(solver.eigenvalues()[i].imag());
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    std::vector<double> nu(static_cast<std::size_t>(modes));
    for (std::size_t k = 0; k < nu.size(); ++k) {
        nu[k] = 0.5 * (magnitudes[2 * k] + magnitudes[2 * k + 1]);
    }
    return nu;
}

/// True iff V is positive definite with every symplectic eigenvalue >= 1/2 - 1e-8.
inline bool physicality_check(const Eigen::MatrixXd& v)
{
    if (!v.allFinite()) {
        return false;
    }
    try {
        const std::vector<double> nu = symplectic_spectrum(v);
        return nu.front() >= vacuum_variance - physicality_tolerance;
    } catch (const PhysicalityError&) {
        return false;
    }
}

/// Smallest symplectic eigenvalue of P V P for the 4x4 mechanical covariance.
inline double min_symplectic_eigenvalue_pt(const Matrix4& v)
{
    if (!detail::is_symmetric(v)) {
        throw ShapeError("min_symplectic_eigenvalue_pt: covariance matrix is not symmetric");
    }
    if (!physicality_check(v)) {
        throw PhysicalityError(
            "min_symplectic_eigenvalue_pt: covariance violates the uncertainty principle");
    }
    return symplectic_spectrum(partial_transpose(v)).front();
}

/// max(0, -ln(2 nu)), with values below 1e-12 reported as 0.
inline double log_negativity_from_nu(double nu_minus)
{
    const double value = -std::log(2.0 * nu_minus);
    return value > negativity_floor ? value : 0.0;
}

inline double log_negativity(const Matrix4& v)
{
    return log_negativity_from_nu(min_symplectic_eigenvalue_pt(v));
}

/// Product state: each resonator thermal, cavity in vacuum.
inline Matrix6 initial_covariance(double nbar1, double nbar2)
{
    if (!(nbar1 >= 0.0) || !(nbar2 >= 0.0)) {
        throw DomainError("initial_covariance: occupancies must be non-negative");
    }
    Eigen::Matrix<double, 6, 1> d;
    d << nbar1 + 0.5, nbar1 + 0.5, nbar2 + 0.5, nbar2 + 0.5, 0.5, 0.5;
    return d.asDiagonal();
}

/// Two-mode squeezed vacuum with squeezing r.
inline Matrix4 two_mode_squeezed_vacuum(double r)
{
    const double c = 0.5 * std::cosh(2.0 * r);
    const double s = 0.5 * std::sinh(2.0 * r);
    Matrix4 v = Matrix4::Zero();
    v.diagonal().setConstant(c);
    v(0, 2) = v(2, 0) = s;
    v(1, 3) = v(3, 1) = -s;
    return v;
}

}  // namespace cfent

#endif
