#ifndef CFENT_EXPERIMENTS_HPP
#define CFENT_EXPERIMENTS_HPP

// Grid sweeps over feedback and coupling parameters, the zooming grid
// optimiser, and the reference parameter sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dynamics.hpp"
#include "entanglement.hpp"
#include "errors.hpp"
#include "params.hpp"

namespace cfent {

/// Coupling magnitudes given directly or derived from the drive.
struct DriveBlock {
    double g1 = 0.0;
    double g2 = 0.0;
    double P1 = 0.0;
    double P2 = 0.0;
    double omegaL1 = 0.0;
    double omegaL2 = 0.0;
};

/// Raw inputs of one simulation point. The couplings come either from
/// G1/G2 directly or, when `drive` is set, from the drive block; the
/// occupancies come from nbar1/nbar2 unless `temperature` is set.
struct Scenario {
    double G1 = 0.99e5;
    double G2 = 1e5;
    double gamma1 = 10.0;
    double gamma2 = 10.0;
    double kappa1 = 5e4;
    double kappa2 = 5e4;
    double Delta = 0.0;
    double nbar1 = 0.0;
    double nbar2 = 0.0;
    FeedbackParams feedback;
    std::optional<double> omega1;
    std::optional<double> omega2;
    std::optional<double> temperature;
    std::optional<DriveBlock> drive;
    double rwaThreshold = default_rwa_threshold;
};

struct ResolvedPoint {
    EffectiveModel model;
    ValidityReport rwa;
};

inline ResolvedPoint resolve(const Scenario& s)
{
    if (s.drive || s.temperature) {
        if (!s.omega1 || !s.omega2) {
            throw DomainError("resolve: drive or temperature input requires omega1 and omega2");
        }
    }
    if (s.drive) {
        PhysicalParams p;
        p.omega1 = *s.omega1;
        p.omega2 = *s.omega2;
        p.gamma1 = s.gamma1;
        p.gamma2 = s.gamma2;
        p.kappa1 = s.kappa1;
        p.kappa2 = s.kappa2;
        p.Delta = s.Delta;
        p.temperature = s.temperature.value_or(0.0);
        p.g1 = s.drive->g1;
        p.g2 = s.drive->g2;
        p.P1 = s.drive->P1;
        p.P2 = s.drive->P2;
        p.omegaL1 = s.drive->omegaL1;
        p.omegaL2 = s.drive->omegaL2;
        auto [model, report] = make_effective_model(p, s.feedback, s.rwaThreshold);
        if (!s.temperature) {
            model.nbar1 = s.nbar1;
            model.nbar2 = s.nbar2;
            model.validate();
        }
        return {model, report};
    }

    DirectInputs in;
    in.G1 = s.G1;
    in.G2 = s.G2;
    in.gamma1 = s.gamma1;
    in.gamma2 = s.gamma2;
    in.kappa1 = s.kappa1;
    in.kappa2 = s.kappa2;
    in.Delta = s.Delta;
    in.nbar1 = s.temperature ? thermal_occupancy(*s.omega1, *s.temperature) : s.nbar1;
    in.nbar2 = s.temperature ? thermal_occupancy(*s.omega2, *s.temperature) : s.nbar2;
    in.feedback = s.feedback;
    const EffectiveModel model = make_effective_model(in);

    ValidityReport report;
    report.threshold = s.rwaThreshold;
    if (s.omega1 && s.omega2) {
        report = rwa_validity(*s.omega1, *s.omega2, s.kappa1, s.kappa2, model.G1, model.G2,
                              s.rwaThreshold);
    }
    return {model, report};
}

enum class SweepMode { steady, evolve };

/// Sweep axis: `count` uniform points over [min, max], or an explicit list.
struct Axis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 2;
    std::vector<double> explicitValues;

    std::size_t size() const { return explicitValues.empty() ? count : explicitValues.size(); }

    std::vector<double> values() const
    {
        return explicitValues.empty() ? linspace(min, max, count) : explicitValues;
    }
};

/// Names accepted as sweep axes. `ratio` is G1/G2 at fixed G2, `kappa`,
/// `gamma` and `nbar` set both members of the pair, `thetaPi` is theta in
/// units of pi.
inline const std::vector<std::string>& axis_names()
{
    static const std::vector<std::string> names{
        "G1",     "G2",    "ratio",  "rB",     "theta",  "thetaPi",
        "Delta",  "kappa1", "kappa2", "kappa", "gamma1", "gamma2",
        "gamma",  "nbar1", "nbar2",  "nbar",   "temperatureK"};
    return names;
}

inline void apply_axis(Scenario& s, const std::string& name, double value)
{
    if (name == "G1") s.G1 = value;
    else if (name == "G2") s.G2 = value;
    else if (name == "ratio") s.G1 = value * s.G2;
    else if (name == "rB") s.feedback.rB = value;
    else if (name == "theta") s.feedback.theta = value;
    else if (name == "thetaPi") s.feedback.theta = value * std::numbers::pi;
    else if (name == "Delta") s.Delta = value;
    else if (name == "kappa1") s.kappa1 = value;
    else if (name == "kappa2") s.kappa2 = value;
    else if (name == "kappa") s.kappa1 = s.kappa2 = value;
    else if (name == "gamma1") s.gamma1 = value;
    else if (name == "gamma2") s.gamma2 = value;
    else if (name == "gamma") s.gamma1 = s.gamma2 = value;
    else if (name == "nbar1") s.nbar1 = value;
    else if (name == "nbar2") s.nbar2 = value;
    else if (name == "nbar") s.nbar1 = s.nbar2 = value;
    else if (name == "temperatureK") s.temperature = value;
    else throw DomainError("unknown sweep axis '" + name + "'");
}

struct SweepSpec {
    Scenario base;
    std::vector<Axis> axes;
    SweepMode mode = SweepMode::steady;
    std::vector<double> tGrid;
    // Sets Delta = 2 sqrt(kappa1 kappa2) rB sin(theta) so that DeltaTilde = 0.
    bool detuningLock = false;
    bool keepCurves = false;
    unsigned threads = 1;
};

/// Scenario at one grid point: axes applied in order (ratio last, after any
/// G2 axis), then the detuning lock.
inline Scenario scenario_at(const SweepSpec& spec, const std::vector<double>& values)
{
    Scenario s = spec.base;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        if (spec.axes[k].name != "ratio") {
            apply_axis(s, spec.axes[k].name, values[k]);
        }
    }
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        if (spec.axes[k].name == "ratio") {
            apply_axis(s, "ratio", values[k]);
        }
    }
    if (spec.detuningLock) {
        s.Delta = locked_detuning(s.kappa1, s.kappa2, s.feedback);
    }
    return s;
}

inline void validate(const SweepSpec& spec, bool allow_single_point = false)
{
    if (spec.axes.empty() || spec.axes.size() > 2) {
        throw DomainError("sweep needs one or two axes");
    }
    const auto& names = axis_names();
    for (const Axis& axis : spec.axes) {
        if (std::find(names.begin(), names.end(), axis.name) == names.end()) {
            throw DomainError("unknown sweep axis '" + axis.name + "'");
        }
        const std::vector<double> values = axis.values();
        if (std::any_of(values.begin(), values.end(), [](double v) { return !std::isfinite(v); })) {
            throw DomainError("axis '" + axis.name + "' has non-finite values");
        }
        if (axis.size() < (allow_single_point ? 1U : 2U)) {
            throw DomainError("axis '" + axis.name + "' needs at least 2 points");
        }
        if (axis.name == "ratio" && spec.base.drive) {
            throw DomainError("axis 'ratio' requires directly specified couplings");
        }
    }
    if (spec.axes.size() == 2 && spec.axes[0].name == spec.axes[1].name) {
        throw DomainError("sweep axes must differ");
    }
    if (spec.mode == SweepMode::evolve) {
        if (spec.tGrid.empty()) {
            throw DomainError("evolve sweep needs a time grid");
        }
        for (std::size_t i = 0; i < spec.tGrid.size(); ++i) {
            if (spec.tGrid[i] < 0.0 || (i > 0 && !(spec.tGrid[i] > spec.tGrid[i - 1]))) {
                throw DomainError("time grid must be non-negative and strictly increasing");
            }
        }
    }
}

struct SweepRow {
    std::vector<double> axisValues;
    std::optional<double> logNeg;
    Stability stability = Stability::unstable;
    double kappaTilde = std::nan("");
    double DeltaTilde = std::nan("");
    std::optional<double> nuMinus;
    ValidityReport rwa;
    std::optional<double> tPeak;  // evolve mode
    std::string error;
    std::vector<double> curveLogNeg;  // evolve mode with keepCurves
    std::vector<double> curveNuMinus;

    bool stable() const { return stability == Stability::stable; }
};

struct SweepResult {
    std::vector<std::string> axisNames;
    SweepMode mode = SweepMode::steady;
    std::vector<double> tGrid;
    std::vector<SweepRow> rows;
};

/// Logarithmic negativity and the partially transposed minimum symplectic
/// eigenvalue of the mechanical block of a full covariance matrix.
struct Entanglement {
    double logNeg;
    double nuMinus;
};

inline Entanglement mechanical_entanglement(const Matrix6& v)
{
    const double nu = min_symplectic_eigenvalue_pt(mechanical_submatrix(v));
    return {log_negativity_from_nu(nu), nu};
}

/// Evaluates one scenario. Failures are recorded in `error`, never thrown.
inline SweepRow evaluate_point(const Scenario& s, SweepMode mode,
                               const std::vector<double>& t_grid, bool keep_curves)
{
    SweepRow row;
    try {
        const ResolvedPoint point = resolve(s);
        row.kappaTilde = point.model.kappaTilde;
        row.DeltaTilde = point.model.DeltaTilde;
        row.rwa = point.rwa;
        const StateSpace ss = state_space(point.model);
        row.stability = classify_stability(ss.A);

        if (mode == SweepMode::steady) {
            if (!row.stable()) {
                row.error = "steady state does not exist (" + to_string(row.stability) + ")";
                return row;
            }
            const Entanglement e = mechanical_entanglement(steady_state_covariance(ss));
            row.logNeg = e.logNeg;
            row.nuMinus = e.nuMinus;
            return row;
        }

        const Matrix6 v0 = initial_covariance(point.model.nbar1, point.model.nbar2);
        const std::vector<Matrix6> vs = propagate(ss, v0, t_grid);
        double best = -1.0;
        double nu_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const Entanglement e = mechanical_entanglement(vs[i]);
            if (e.logNeg > best) {
                best = e.logNeg;
                row.tPeak = t_grid[i];
            }
            nu_min = std::min(nu_min, e.nuMinus);
            if (keep_curves) {
                row.curveLogNeg.push_back(e.logNeg);
                row.curveNuMinus.push_back(e.nuMinus);
            }
        }
        row.logNeg = best;
        row.nuMinus = nu_min;
    } catch (const std::exception& ex) {
        row.logNeg.reset();
        row.nuMinus.reset();
        row.error = ex.what();
    }
    return row;
}

/// Cartesian grid, first axis outermost.
inline std::vector<std::vector<double>> grid_points(const std::vector<Axis>& axes)
{
    std::vector<std::vector<double>> points{{}};
    for (const Axis& axis : axes) {
        std::vector<std::vector<double>> next;
        const std::vector<double> values = axis.values();
        next.reserve(points.size() * values.size());
        for (const auto& prefix : points) {
            for (double v : values) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        }
        points = std::move(next);
    }
    return points;
}

namespace detail {

inline SweepResult run_grid(const SweepSpec& spec)
{
    SweepResult result;
    result.mode = spec.mode;
    result.tGrid = spec.tGrid;
    for (const Axis& axis : spec.axes) {
        result.axisNames.push_back(axis.name);
    }
    const std::vector<std::vector<double>> points = grid_points(spec.axes);
    result.rows.resize(points.size());

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < points.size(); i += stride) {
            SweepRow row = evaluate_point(scenario_at(spec, points[i]), spec.mode, spec.tGrid,
                                          spec.keepCurves);
            row.axisValues = points[i];
            result.rows[i] = std::move(row);
        }
    };

    const std::size_t threads =
        std::clamp<std::size_t>(spec.threads, 1, std::max<std::size_t>(1, points.size()));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
    }
    return result;
}

}  // namespace detail

/// Evaluates every grid point independently. Rows are stored by grid index,
/// so the result does not depend on the thread count.
inline SweepResult run_sweep(const SweepSpec& spec)
{
    validate(spec);
    return detail::run_grid(spec);
}

struct Optimum {
    std::vector<double> axisValues;
    double logNeg = 0.0;
    SweepRow row;
    std::size_t evaluations = 0;
};

/// Coarse grid followed by `refine_levels` zoom passes. Each pass halves the
/// window of every axis around the best point so far (clipped to the original
/// bounds) and keeps the point count.
inline Optimum find_optimum(const SweepSpec& spec, std::size_t refine_levels)
{
    if (spec.mode != SweepMode::steady) {
        throw DomainError("find_optimum: requires steady mode");
    }
    validate(spec, true);

    SweepSpec level = spec;
    std::optional<Optimum> best;
    std::size_t evaluations = 0;
    for (std::size_t pass = 0; pass <= refine_levels; ++pass) {
        const SweepResult result = detail::run_grid(level);
        evaluations += result.rows.size();
        for (const SweepRow& row : result.rows) {
            if (row.logNeg && (!best || *row.logNeg > best->logNeg)) {
                best = Optimum{row.axisValues, *row.logNeg, row, 0};
            }
        }
        if (!best) {
            throw NoFeasiblePointError("find_optimum: no stable grid point");
        }

        for (std::size_t k = 0; k < level.axes.size(); ++k) {
            const std::vector<double> original = spec.axes[k].values();
            Axis& axis = level.axes[k];
            if (!axis.explicitValues.empty()) {
                const auto [lo_it, hi_it] = std::minmax_element(original.begin(), original.end());
                axis.min = *lo_it;
                axis.max = *hi_it;
                axis.count = original.size();
                axis.explicitValues.clear();
            }
            const double lo0 = *std::min_element(original.begin(), original.end());
            const double hi0 = *std::max_element(original.begin(), original.end());
            const double half = 0.25 * std::abs(axis.max - axis.min);
            double lo = best->axisValues[k] - half;
            double hi = best->axisValues[k] + half;
            if (lo < lo0) {
                hi += lo0 - lo;
                lo = lo0;
            }
            if (hi > hi0) {
                lo -= hi - hi0;
                hi = hi0;
            }
            axis.min = std::max(lo, lo0);
            axis.max = std::min(hi, hi0);
        }
    }
    best->evaluations = evaluations;
    return *best;
}

/// Fixed parameters of the steady-state studies: gamma = 10, G2 = 2 kappa = 1e5,
/// theta = 0, Delta = 0, G1 = 0.99 G2.
inline Scenario steady_baseline(double rB = 0.0, double nbar1 = 0.0, double nbar2 = 0.0)
{
    Scenario s;
    s.G2 = 1e5;
    s.G1 = 0.99 * s.G2;
    s.gamma1 = s.gamma2 = 10.0;
    s.kappa1 = s.kappa2 = 5e4;
    s.Delta = 0.0;
    s.feedback = {rB, 0.0};
    s.nbar1 = nbar1;
    s.nbar2 = nbar2;
    return s;
}

/// Fixed parameters of the transient study with equal couplings:
/// G1 = G2 = 1e4, kappa1 = kappa2 = 5e4, Delta = 1e3, theta = 0, gamma = 10.
inline Scenario transient_baseline(double rB = 0.0, double nbar1 = 0.0, double nbar2 = 0.0)
{
    Scenario s;
    s.G1 = s.G2 = 1e4;
    s.gamma1 = s.gamma2 = 10.0;
    s.kappa1 = s.kappa2 = 5e4;
    s.Delta = 1e3;
    s.feedback = {rB, 0.0};
    s.nbar1 = nbar1;
    s.nbar2 = nbar2;
    return s;
}

inline constexpr std::size_t default_grid_points = 61;
inline constexpr double default_transient_t_max = 1e-2;
inline constexpr std::size_t default_transient_points = 1001;

inline const std::vector<double>& transient_reflectivities()
{
    static const std::vector<double> values{0.0, 0.9, 0.99, 0.999, 1.0};
    return values;
}

/// Steady-state map over the loop phase and reflectivity with DeltaTilde
/// locked to zero.
inline SweepSpec preset_feedback_map(std::size_t points = default_grid_points)
{
    SweepSpec spec;
    spec.base = steady_baseline();
    spec.axes = {{"theta", -std::numbers::pi, std::numbers::pi, points},
                 {"rB", 0.0, 0.99, points}};
    spec.detuningLock = true;
    return spec;
}

/// Steady state versus G1/G2 with and without feedback.
inline SweepSpec preset_ratio_cuts(double rB, double nbar1, double nbar2,
                                   std::size_t points = default_grid_points)
{
    SweepSpec spec;
    spec.base = steady_baseline(0.0, nbar1, nbar2);
    spec.axes = {{"ratio", 0.8, 0.999, points}, {"rB", 0.0, rB, 2}};
    return spec;
}

/// Steady state over G1/G2 and rB.
inline SweepSpec preset_ratio_contour(double nbar1, double nbar2,
                                      std::size_t points = default_grid_points)
{
    SweepSpec spec;
    spec.base = steady_baseline(0.0, nbar1, nbar2);
    spec.axes = {{"ratio", 0.8, 1.0, points}, {"rB", 0.0, 0.99, points}};
    return spec;
}

struct TransientCurve {
    double rB = 0.0;
    std::vector<double> times;
    std::vector<double> logNeg;
    std::vector<double> nuMinus;
    std::vector<Matrix6> covariances;
    Stability stability = Stability::unstable;
    double kappaTilde = 0.0;
    double DeltaTilde = 0.0;
};

/// E_N(t) from the thermal-resonator, vacuum-cavity product state for each
/// reflectivity, on a uniform grid over [0, t_max].
inline std::vector<TransientCurve> fig3_curves(const std::vector<double>& reflectivities,
                                               double nbar1, double nbar2,
                                               double t_max = default_transient_t_max,
                                               std::size_t points = default_transient_points,
                                               bool keep_covariances = false)
{
    if (!(t_max > 0.0) || points < 2) {
        throw DomainError("fig3_curves: need t_max > 0 and at least 2 time points");
    }
    const std::vector<double> times = linspace(0.0, t_max, points);
    std::vector<TransientCurve> curves;
    for (double rB : reflectivities) {
        if (!(rB >= 0.0 && rB <= 1.0)) {
            throw DomainError("fig3_curves: reflectivity must lie in [0, 1]");
        }
        const ResolvedPoint point = resolve(transient_baseline(rB, nbar1, nbar2));
        const StateSpace ss = state_space(point.model);
        TransientCurve curve;
        curve.rB = rB;
        curve.times = times;
        curve.stability = classify_stability(ss.A);
        curve.kappaTilde = point.model.kappaTilde;
        curve.DeltaTilde = point.model.DeltaTilde;
        const std::vector<Matrix6> vs =
            propagate(ss, initial_covariance(point.model.nbar1, point.model.nbar2), times);
        for (const Matrix6& v : vs) {
            const Entanglement e = mechanical_entanglement(v);
            curve.logNeg.push_back(e.logNeg);
            curve.nuMinus.push_back(e.nuMinus);
        }
        if (keep_covariances) {
            curve.covariances = vs;
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

}  // namespace cfent

#endif
