#ifndef CFENT_DYNAMICS_HPP
#define CFENT_DYNAMICS_HPP

// Linear quantum Langevin dynamics u' = A u + n for the quadrature vector
// u = (q1, p1, q2, p2, X, Y) of two mechanical modes and one cavity mode, with
// diffusion matrix D, and the evolution of the covariance matrix
// V_ij = <{u_i, u_j}>/2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "matrix_exponential.hpp"
#include "params.hpp"

namespace cfent {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Quadrature indices in the state vector.
namespace quad {
inline constexpr int q1 = 0;
inline constexpr int p1 = 1;
inline constexpr int q2 = 2;
inline constexpr int p2 = 3;
inline constexpr int X = 4;
inline constexpr int Y = 5;
}  // namespace quad

struct StateSpace {
    Matrix6 A;  // drift, s^-1
    Matrix6 D;  // diagonal diffusion, s^-1
};

inline Matrix6 drift_matrix(const EffectiveModel& m)
{
    using namespace quad;
    Matrix6 a = Matrix6::Zero();
    a(q1, q1) = a(p1, p1) = -0.5 * m.gamma1;
    a(q2, q2) = a(p2, p2) = -0.5 * m.gamma2;
    a(X, X) = a(Y, Y) = -m.kappaTilde;
    a(X, Y) = m.DeltaTilde;
    a(Y, X) = -m.DeltaTilde;

    a(q1, Y) = -m.G1;
    a(p1, X) = -m.G1;
    a(q2, Y) = m.G2;
    a(p2, X) = -m.G2;
    a(X, p1) = -m.G1;
    a(X, p2) = m.G2;
    a(Y, q1) = -m.G1;
    a(Y, q2) = -m.G2;
    return a;
}

inline Matrix6 diffusion_matrix(const EffectiveModel& m)
{
    Eigen::Matrix<double, 6, 1> d;
    d << m.gamma1 * (m.nbar1 + 0.5), m.gamma1 * (m.nbar1 + 0.5), m.gamma2 * (m.nbar2 + 0.5),
        m.gamma2 * (m.nbar2 + 0.5), m.kappaTilde, m.kappaTilde;
    return d.asDiagonal();
}

inline StateSpace state_space(const EffectiveModel& m)
{
    m.validate();
    return {drift_matrix(m), diffusion_matrix(m)};
}

/// Closed-form stability test, exact for equal mechanical dampings:
///   G2^2 > G1^2 - (kappaTilde gamma / 2) [1 + 4 DeltaTilde^2 / (gamma + 2 kappaTilde)^2].
inline double stability_gap(const EffectiveModel& m)
{
    if (std::abs(m.gamma1 - m.gamma2) > 1e-12 * std::max(m.gamma1, m.gamma2)) {
        throw UnsupportedRegimeError(
            "stability_analytic: closed form requires gamma1 == gamma2; use stability_eigen");
    }
    const double gamma = m.gamma1;
    const double k = m.kappaTilde;
    const double den = gamma + 2.0 * k;
    const double detuning_term =
        den > 0.0 ? 4.0 * m.DeltaTilde * m.DeltaTilde / (den * den) : 0.0;
    return m.G2 * m.G2 - m.G1 * m.G1 + 0.5 * k * gamma * (1.0 + detuning_term);
}

inline bool stability_analytic(const EffectiveModel& m)
{
    return stability_gap(m) > 0.0;
}

/// Largest real part of the spectrum.
template <typename Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& a)
{
    Eigen::EigenSolver<typename Derived::PlainObject> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("spectral_abscissa: eigenvalue iteration did not converge");
    }
    return solver.eigenvalues().real().maxCoeff();
}

enum class Stability { stable, marginal, unstable };

inline std::string to_string(Stability s)
{
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::marginal: return "marginal";
        case Stability::unstable: return "unstable";
    }
    return "unstable";
}

inline constexpr double stability_relative_tolerance = 1e-9;

/// Stable when the spectral abscissa is below -1e-9 * ||A||_F, marginal
/// within that band of zero.
template <typename Derived>
Stability classify_stability(const Eigen::MatrixBase<Derived>& a)
{
    const double tol = stability_relative_tolerance * a.norm();
    const double abscissa = spectral_abscissa(a);
    if (abscissa < -tol) {
        return Stability::stable;
    }
    if (abscissa <= tol) {
        return Stability::marginal;
    }
    return Stability::unstable;
}

template <typename Derived>
bool stability_eigen(const Eigen::MatrixBase<Derived>& a)
{
    return classify_stability(a) == Stability::stable;
}

/// ||A V + V A^T + D||_F / ||D||_F, accumulated in long double. Falls back to
/// the absolute residual when D vanishes.
inline double lyapunov_residual(const Matrix6& a, const Matrix6& v, const Matrix6& d)
{
    using LMatrix = Eigen::Matrix<long double, 6, 6>;
    const LMatrix al = a.cast<long double>();
    const LMatrix vl = v.cast<long double>();
    const LMatrix r = al * vl + vl * al.transpose() + d.cast<long double>();
    const long double dn = d.cast<long double>().norm();
    const long double rn = r.norm();
    return static_cast<double>(dn > 0 ? rn / dn : rn);
}

inline constexpr double lyapunov_residual_tolerance = 1e-10;

/// Smallest relative residual a double-precision V can reach: rounding each
/// entry of V to double already perturbs A V + V A^T by about eps |A| |V|.
inline double lyapunov_rounding_floor(const Matrix6& a, const Matrix6& v, const Matrix6& d)
{
    const double dn = d.norm();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * 2.0 * a.norm() * v.norm();
    return dn > 0 ? floor / dn : floor;
}

struct LyapunovSolution {
    Matrix6 V;
    double residual = 0.0;   // |A V + V A^T + D|_F / |D|_F
    double tolerance = 0.0;  // max(1e-10, rounding floor)
    double rcond = 0.0;      // of the 36 x 36 system, in extended precision
};

/// Solves A V + V A^T = -D through the 36-unknown system
/// (I (x) A + A (x) I) vec V = -vec D, factorized in extended precision so that
/// near-degenerate models (G1 close to G2) keep their accuracy.
inline LyapunovSolution solve_lyapunov(const StateSpace& ss)
{
    using LMatrix6 = Eigen::Matrix<long double, 6, 6>;
    using LMatrix36 = Eigen::Matrix<long double, 36, 36>;
    using LVector36 = Eigen::Matrix<long double, 36, 1>;
    const LMatrix6 a = ss.A.cast<long double>();
    const LMatrix6 id = LMatrix6::Identity();
    LMatrix36 k;
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            k.block<6, 6>(6 * i, 6 * j) = id(i, j) * a + a(i, j) * id;
        }
    }
    const LMatrix6 dl = ss.D.cast<long double>();
    const LVector36 rhs = -Eigen::Map<const LVector36>(dl.data());

    const Eigen::PartialPivLU<LMatrix36> lu(k);
    LyapunovSolution out;
    out.rcond = static_cast<double>(lu.rcond());
    if (!(out.rcond > 0.0)) {
        throw NumericalError("solve_lyapunov: singular Lyapunov system", out.rcond);
    }
    LVector36 x = lu.solve(rhs);
    x += lu.solve(LVector36(rhs - k * x));

    const LMatrix6 vl = Eigen::Map<const LMatrix6>(x.data());
    out.V = (0.5L * (vl + vl.transpose())).cast<double>();
    if (!out.V.allFinite()) {
        throw NumericalError("solve_lyapunov: non-finite solution", out.rcond);
    }
    out.residual = lyapunov_residual(ss.A, out.V, ss.D);
    out.tolerance =
        std::max(lyapunov_residual_tolerance, lyapunov_rounding_floor(ss.A, out.V, ss.D));
    return out;
}

/// Steady-state covariance of a stable model. The Lyapunov residual is always
/// checked; it must stay below 1e-10 unless V is so large that double rounding
/// alone exceeds that, in which case the rounding floor is the bound.
inline Matrix6 steady_state_covariance(const StateSpace& ss)
{
    const Stability s = classify_stability(ss.A);
    if (s != Stability::stable) {
        throw StabilityError("steady_state_covariance: drift matrix is " + to_string(s) +
                             " (spectral abscissa " + detail::fmt(spectral_abscissa(ss.A)) +
                             ")");
    }
    const LyapunovSolution sol = solve_lyapunov(ss);
    if (!(sol.residual <= sol.tolerance)) {
        throw NumericalError("steady_state_covariance: relative residual " +
                                 detail::fmt(sol.residual) + " above tolerance " +
                                 detail::fmt(sol.tolerance) + " (rcond " +
                                 detail::fmt(sol.rcond) + ")",
                             sol.rcond);
    }
    return sol.V;
}

/// One exact step of the covariance map V -> M V M^T + Q.
struct Discretization {
    Matrix6 M;
    Matrix6 Q;
};

/// Apply `first`, then `second`.
inline Discretization compose(const Discretization& first, const Discretization& second)
{
    Discretization out;
    out.M = second.M * first.M;
    out.Q = second.M * first.Q * second.M.transpose() + second.Q;
    out.Q = (0.5 * (out.Q + out.Q.transpose())).eval();
    return out;
}

/// M = exp(A dt) and Q = int_0^dt exp(A s) D exp(A^T s) ds from the single
/// exponential of [[-A, D], [0, A^T]] h. That block holds exp(+A h), so long
/// steps are split into 2^k pieces of norm <= 1 and recombined by squaring.
inline Discretization transition_and_noise(const Matrix6& a, const Matrix6& d, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("transition_and_noise: dt must be positive and finite");
    }
    const double norm = detail::one_norm(a) * dt;
    const int halvings = norm > 1.0 ? static_cast<int>(std::ceil(std::log2(norm))) : 0;
    const double h = std::ldexp(dt, -halvings);

    Matrix12 c = Matrix12::Zero();
    c.topLeftCorner<6, 6>() = -a * h;
    c.topRightCorner<6, 6>() = d * h;
    c.bottomRightCorner<6, 6>() = a.transpose() * h;
    const Matrix12 f = expm(c);
    Discretization out;
    out.M = f.bottomRightCorner<6, 6>().transpose();
    out.Q = out.M * f.topRightCorner<6, 6>();
    out.Q = (0.5 * (out.Q + out.Q.transpose())).eval();
    for (int i = 0; i < halvings; ++i) {
        out = compose(out, out);
    }
    return out;
}

/// n-fold composition of one step by binary powering.
inline Discretization repeat(const Discretization& step, std::size_t n)
{
    Discretization result{Matrix6::Identity(), Matrix6::Zero()};
    Discretization base = step;
    while (n > 0) {
        if (n & 1U) {
            result = compose(result, base);
        }
        n >>= 1U;
        if (n > 0) {
            base = compose(base, base);
        }
    }
    return result;
}

struct PropagateOptions {
    // Sub-step bound ||A||_1 * dt <= max_norm_step.
    double max_norm_step = 0.1;
};

/// Covariance V(t) at every time in `t_grid` (strictly increasing, t >= 0),
/// starting from V(0) = v0. Each grid interval is split into equal sub-steps
/// obeying the norm bound and covered exactly.
inline std::vector<Matrix6> propagate(const StateSpace& ss, const Matrix6& v0,
                                      std::span<const double> t_grid,
                                      const PropagateOptions& options = {})
{
    const double scale = std::max(1.0, v0.cwiseAbs().maxCoeff());
    if (!v0.allFinite() || (v0 - v0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ShapeError("propagate: initial covariance must be finite and symmetric");
    }
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0 ||
            (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
            throw DomainError("propagate: time grid must be finite, non-negative and strictly increasing");
        }
    }

    const double a_norm = detail::one_norm(ss.A);
    std::map<double, Discretization> interval_cache;

    std::vector<Matrix6> out;
    out.reserve(t_grid.size());
    Matrix6 v = v0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double interval = t_grid[i] - t_prev;
        if (interval > 0.0) {
            auto it = interval_cache.find(interval);
            if (it == interval_cache.end()) {
                const double steps_real = std::ceil(a_norm * interval / options.max_norm_step);
                if (!(steps_real < 1e18)) {
                    throw DomainError("propagate: interval of " + detail::fmt(interval) +
                                      " s needs too many sub-steps");
                }
                const auto steps = static_cast<std::size_t>(std::max(1.0, steps_real));
                const Discretization step =
                    transition_and_noise(ss.A, ss.D, interval / static_cast<double>(steps));
                it = interval_cache.emplace(interval, repeat(step, steps)).first;
            }
            const Discretization& map = it->second;
            v = map.M * v * map.M.transpose() + map.Q;
            v = (0.5 * (v + v.transpose())).eval();
            if (!v.allFinite()) {
                throw DivergenceError("propagate: non-finite covariance at step " +
                                          std::to_string(i),
                                      i);
            }
        }
        out.push_back(v);
        t_prev = t_grid[i];
    }
    return out;
}

/// Uniform grid of `count` points from `t0` to `t1` inclusive.
inline std::vector<double> linspace(double t0, double t1, std::size_t count)
{
    std::vector<double> out(count);
    if (count == 0) {
        return out;
    }
    if (count == 1) {
        out[0] = t0;
        return out;
    }
    const double step = (t1 - t0) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = t0 + step * static_cast<double>(i);
    }
    out.back() = t1;
    return out;
}

}  // namespace cfent

#endif
