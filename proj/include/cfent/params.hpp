#ifndef CFENT_PARAMS_HPP
#define CFENT_PARAMS_HPP

// Raw physical parameters of the two-resonator optomechanical system with a
// coherent feedback loop, and the effective quantities entering the
// linearised dynamics.
//
// Units: every rate and frequency (gamma, kappa, G, Delta, omega) is a rate in
// s^-1. No factor 2*pi is inserted anywhere; only ratios of these rates enter
// the covariance dynamics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "errors.hpp"

namespace cfent {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K
}  // namespace constants

/// Mean thermal occupancy [exp(hbar*omega / kB*T) - 1]^-1. Exactly 0 at T = 0.
inline double thermal_occupancy(double omega, double temperature)
{
    if (!(omega > 0.0)) {
        throw DomainError("thermal_occupancy: omega must be positive");
    }
    if (!(temperature >= 0.0)) {
        throw DomainError("thermal_occupancy: temperature must be non-negative");
    }
    if (temperature == 0.0) {
        return 0.0;
    }
    const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

/// Cavity drive amplitude sqrt(2 P kappa1 / (hbar omegaL)) for pump power P.
inline double drive_amplitude(double power, double kappa1, double omega_laser)
{
    if (!(power >= 0.0)) {
        throw DomainError("drive_amplitude: power must be non-negative");
    }
    if (!(kappa1 > 0.0)) {
        throw DomainError("drive_amplitude: kappa1 must be positive");
    }
    if (!(omega_laser > 0.0)) {
        throw DomainError("drive_amplitude: laser frequency must be positive");
    }
    return std::sqrt(2.0 * power * kappa1 / (constants::hbar * omega_laser));
}

using Complex = std::complex<double>;

struct ComplexCouplings {
    Complex G1;
    Complex G2;
};

/// Drive-enhanced couplings
///   G1 = g1 E1 / (omega1 - Delta + i(kappa1 + kappa2))
///   G2 = g2 E2 / (-omega2 - Delta + i(kappa1 + kappa2)).
inline ComplexCouplings effective_couplings(double g1, double g2, double E1, double E2,
                                            double omega1, double omega2, double Delta,
                                            double kappa1, double kappa2)
{
    const double kappa_sum = kappa1 + kappa2;
    const Complex den1(omega1 - Delta, kappa_sum);
    const Complex den2(-omega2 - Delta, kappa_sum);
    if (den1 == Complex(0.0, 0.0) || den2 == Complex(0.0, 0.0)) {
        throw SingularityError("effective_couplings: vanishing denominator (Delta on a "
                               "mechanical sideband with zero cavity decay)");
    }
    return {g1 * E1 / den1, g2 * E2 / den2};
}

/// Beam-splitter reflectivity (net of loop losses) and loop phase.
struct FeedbackParams {
    double rB = 0.0;
    double theta = 0.0;

    /// rB == 1 is accepted only as the lossless limit of the loop.
    bool ideal() const { return rB == 1.0; }

    void validate() const
    {
        if (!(rB >= 0.0 && rB <= 1.0)) {
            throw DomainError("FeedbackParams: rB must lie in [0, 1]");
        }
        if (!std::isfinite(theta)) {
            throw DomainError("FeedbackParams: theta must be finite");
        }
    }
};

struct CavityParams {
    double kappaTilde;
    double DeltaTilde;
};

/// Decay and detuning renormalised by the feedback loop:
///   kappaTilde = kappa1 + kappa2 - 2 sqrt(kappa1 kappa2) rB cos(theta)
///   DeltaTilde = Delta - 2 sqrt(kappa1 kappa2) rB sin(theta).
inline CavityParams effective_cavity_params(double kappa1, double kappa2,
                                            const FeedbackParams& fb, double Delta)
{
    if (!(kappa1 >= 0.0) || !(kappa2 >= 0.0)) {
        throw DomainError("effective_cavity_params: cavity decay rates must be non-negative");
    }
    fb.validate();
    const double loop = 2.0 * std::sqrt(kappa1 * kappa2) * fb.rB;
    double kappa_tilde = kappa1 + kappa2 - loop * std::cos(fb.theta);
    // kappaTilde >= 0 holds exactly for rB <= 1; only rounding can push it below.
    if (kappa_tilde < 0.0 && kappa_tilde > -1e-12 * (kappa1 + kappa2)) {
        kappa_tilde = 0.0;
    }
    return {kappa_tilde, Delta - loop * std::sin(fb.theta)};
}

/// Detuning that makes DeltaTilde vanish for the given loop settings.
inline double locked_detuning(double kappa1, double kappa2, const FeedbackParams& fb)
{
    return 2.0 * std::sqrt(kappa1 * kappa2) * fb.rB * std::sin(fb.theta);
}

/// Experimental parameters for the physical entry path.
struct PhysicalParams {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double Delta = 0.0;
    double temperature = 0.0;
    std::optional<double> g1, g2;
    std::optional<double> P1, P2;
    std::optional<double> omegaL1, omegaL2;

    void validate() const
    {
        if (!(gamma1 >= 0.0 && gamma2 >= 0.0)) {
            throw DomainError("PhysicalParams: mechanical damping rates must be non-negative");
        }
        if (!(kappa1 >= 0.0 && kappa2 >= 0.0)) {
            throw DomainError("PhysicalParams: cavity decay rates must be non-negative");
        }
        if (!(omega1 > 0.0 && omega2 > 0.0)) {
            throw DomainError("PhysicalParams: mechanical frequencies must be positive");
        }
        if (omega1 == omega2) {
            throw DomainError("PhysicalParams: mechanical frequencies must differ");
        }
        if (!(temperature >= 0.0)) {
            throw DomainError("PhysicalParams: temperature must be non-negative");
        }
        if (!std::isfinite(Delta)) {
            throw DomainError("PhysicalParams: Delta must be finite");
        }
    }

    bool has_drive() const { return g1 && g2 && P1 && P2 && omegaL1 && omegaL2; }
};

enum class RwaVerdict { valid, marginal, invalid, unchecked };

inline std::string to_string(RwaVerdict v)
{
    switch (v) {
        case RwaVerdict::valid: return "valid";
        case RwaVerdict::marginal: return "marginal";
        case RwaVerdict::invalid: return "invalid";
        case RwaVerdict::unchecked: return "unchecked";
    }
    return "unchecked";
}

inline constexpr double default_rwa_threshold = 0.1;

/// Outcome of the resolved-sideband check. Attached to outputs, never blocks
/// a simulation.
struct ValidityReport {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double threshold = default_rwa_threshold;
    RwaVerdict verdict = RwaVerdict::unchecked;
    // Phases of the complex couplings dropped when the model stores |G|.
    std::optional<double> phaseG1;
    std::optional<double> phaseG2;
};

/// ratio = max(|G1|, |G2|, kappa1, kappa2) / min(omega1, omega2, |omega1 - omega2|);
/// valid below `threshold`, marginal below 1, invalid otherwise.
inline ValidityReport rwa_validity(double omega1, double omega2, double kappa1, double kappa2,
                                   double absG1, double absG2,
                                   double threshold = default_rwa_threshold)
{
    ValidityReport report;
    report.threshold = threshold;
    const double num = std::max({std::abs(absG1), std::abs(absG2), kappa1, kappa2});
    const double den = std::min({omega1, omega2, std::abs(omega1 - omega2)});
    report.ratio = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    if (report.ratio < threshold) {
        report.verdict = RwaVerdict::valid;
    } else if (report.ratio < 1.0) {
        report.verdict = RwaVerdict::marginal;
    } else {
        report.verdict = RwaVerdict::invalid;
    }
    return report;
}

inline ValidityReport rwa_validity(const PhysicalParams& p, Complex G1, Complex G2,
                                   double threshold = default_rwa_threshold)
{
    ValidityReport report = rwa_validity(p.omega1, p.omega2, p.kappa1, p.kappa2, std::abs(G1),
                                         std::abs(G2), threshold);
    report.phaseG1 = std::arg(G1);
    report.phaseG2 = std::arg(G2);
    return report;
}

/// s with tanh(s) = G1/G2; requires 0 <= G1 < G2.
inline double squeezing_parameter(double G1, double G2)
{
    if (!(G1 >= 0.0) || !(G1 < G2)) {
        throw DomainError("squeezing_parameter: requires 0 <= G1 < G2");
    }
    return std::atanh(G1 / G2);
}

/// Coupling of the cavity to the Bogoliubov mode, sqrt(G2^2 - G1^2).
inline double collective_coupling(double G1, double G2)
{
    if (!(G1 >= 0.0) || !(G1 < G2)) {
        throw DomainError("collective_coupling: requires 0 <= G1 < G2");
    }
    return std::sqrt((G2 - G1) * (G2 + G1));
}

/// Closed set of parameters entering the linearised equations of motion.
/// Couplings are stored as magnitudes.
struct EffectiveModel {
    double G1 = 0.0;
    double G2 = 0.0;
    double kappaTilde = 0.0;
    double DeltaTilde = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double nbar1 = 0.0;
    double nbar2 = 0.0;

    void validate() const
    {
        if (!(G1 >= 0.0 && G2 >= 0.0) || !std::isfinite(G1) || !std::isfinite(G2)) {
            throw DomainError("EffectiveModel: couplings must be finite and non-negative");
        }
        if (!(kappaTilde >= 0.0) || !std::isfinite(kappaTilde)) {
            throw DomainError("EffectiveModel: effective cavity decay must be non-negative");
        }
        if (!std::isfinite(DeltaTilde)) {
            throw DomainError("EffectiveModel: effective detuning must be finite");
        }
        if (!(gamma1 >= 0.0 && gamma2 >= 0.0) || !std::isfinite(gamma1) ||
            !std::isfinite(gamma2)) {
            throw DomainError("EffectiveModel: mechanical damping rates must be non-negative");
        }
        if (!(nbar1 >= 0.0 && nbar2 >= 0.0) || !std::isfinite(nbar1) ||
            !std::isfinite(nbar2)) {
            throw DomainError("EffectiveModel: thermal occupancies must be non-negative");
        }
    }
};

/// Inputs of the direct entry path, where the effective couplings are given.
struct DirectInputs {
    double G1 = 0.0;
    double G2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double Delta = 0.0;
    double nbar1 = 0.0;
    double nbar2 = 0.0;
    FeedbackParams feedback;
};

inline EffectiveModel make_effective_model(const DirectInputs& in)
{
    const CavityParams cav = effective_cavity_params(in.kappa1, in.kappa2, in.feedback, in.Delta);
    EffectiveModel m{std::abs(in.G1), std::abs(in.G2), cav.kappaTilde, cav.DeltaTilde,
                     in.gamma1,       in.gamma2,       in.nbar1,       in.nbar2};
    m.validate();
    return m;
}

/// Physical entry path: pump powers and single-photon couplings determine
/// the drive amplitudes and complex couplings; the bath temperature sets the
/// occupancies. Returns the model and the validity report carrying the
/// discarded coupling phases.
inline std::pair<EffectiveModel, ValidityReport> make_effective_model(
    const PhysicalParams& p, const FeedbackParams& fb,
    double rwa_threshold = default_rwa_threshold)
{
    p.validate();
    if (!p.has_drive()) {
        throw DomainError("make_effective_model: physical path needs g1, g2, P1, P2, omegaL1, omegaL2");
    }
    const double E1 = drive_amplitude(*p.P1, p.kappa1, *p.omegaL1);
    const double E2 = drive_amplitude(*p.P2, p.kappa1, *p.omegaL2);
    const ComplexCouplings G =
        effective_couplings(*p.g1, *p.g2, E1, E2, p.omega1, p.omega2, p.Delta, p.kappa1, p.kappa2);
    const CavityParams cav = effective_cavity_params(p.kappa1, p.kappa2, fb, p.Delta);
    EffectiveModel m{std::abs(G.G1),
                     std::abs(G.G2),
                     cav.kappaTilde,
                     cav.DeltaTilde,
                     p.gamma1,
                     p.gamma2,
                     thermal_occupancy(p.omega1, p.temperature),
                     thermal_occupancy(p.omega2, p.temperature)};
    m.validate();
    return {m, rwa_validity(p, G.G1, G.G2, rwa_threshold)};
}

}  // namespace cfent

#endif
