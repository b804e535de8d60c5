#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cfent/dynamics.hpp"
#include "cfent/entanglement.hpp"

using namespace cfent;

namespace {

EffectiveModel fig2_point(double rB = 0.95)
{
    DirectInputs in;
    in.G1 = 0.99e5;
    in.G2 = 1e5;
    in.gamma1 = in.gamma2 = 10.0;
    in.kappa1 = in.kappa2 = 5e4;
    in.feedback = {rB, 0.0};
    return make_effective_model(in);
}

struct RandomModels {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> u{0.0, 1.0};

    explicit RandomModels(unsigned long seed) : rng(seed) {}

    EffectiveModel next()
    {
        EffectiveModel m;
        m.G1 = 2e5 * u(rng);
        m.G2 = 2e5 * u(rng);
        m.kappaTilde = 2e5 * u(rng);
        m.DeltaTilde = -1e5 + 2e5 * u(rng);
        m.gamma1 = m.gamma2 = 1.0 + 999.0 * u(rng);
        m.nbar1 = 10.0 * u(rng);
        m.nbar2 = 10.0 * u(rng);
        return m;
    }

    EffectiveModel next_stable()
    {
        for (;;) {
            EffectiveModel m = next();
            if (stability_eigen(drift_matrix(m))) return m;
        }
    }
};

double min_eigenvalue_floor(const Matrix6& v)
{
    // V + (i/2) Omega >= 0, tested through its real 12 x 12 embedding.
    const Eigen::MatrixXd omega = symplectic_form(3);
    Eigen::MatrixXd h(12, 12);
    h << v, -0.5 * omega, 0.5 * omega, v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(DriftMatrix, DecoupledBlocks)
{
    EffectiveModel m;
    m.gamma1 = 3.0;
    m.gamma2 = 5.0;
    m.kappaTilde = 7.0;
    m.DeltaTilde = 11.0;
    const Matrix6 a = drift_matrix(m);
    Matrix6 expected = Matrix6::Zero();
    expected(0, 0) = expected(1, 1) = -1.5;
    expected(2, 2) = expected(3, 3) = -2.5;
    expected(4, 4) = expected(5, 5) = -7.0;
    expected(4, 5) = 11.0;
    expected(5, 4) = -11.0;
    EXPECT_EQ(a, expected);
}

TEST(DriftMatrix, Fig2CavityEntries)
{
    const Matrix6 a = drift_matrix(fig2_point());
    EXPECT_NEAR(a(quad::X, quad::X), -5000.0, 1e-9);
    EXPECT_NEAR(a(quad::Y, quad::Y), -5000.0, 1e-9);
}

TEST(DriftMatrix, CouplingSigns)
{
    EffectiveModel m;
    m.G1 = 2.0;
    m.G2 = 3.0;
    const Matrix6 a = drift_matrix(m);
    EXPECT_EQ(a(quad::q1, quad::Y), -2.0);
    EXPECT_EQ(a(quad::p1, quad::X), -2.0);
    EXPECT_EQ(a(quad::q2, quad::Y), 3.0);
    EXPECT_EQ(a(quad::p2, quad::X), -3.0);
    EXPECT_EQ(a(quad::X, quad::p1), -2.0);
    EXPECT_EQ(a(quad::X, quad::p2), 3.0);
    EXPECT_EQ(a(quad::Y, quad::q1), -2.0);
    EXPECT_EQ(a(quad::Y, quad::q2), -3.0);
}

TEST(DiffusionMatrix, Entries)
{
    EffectiveModel m;
    m.gamma1 = m.gamma2 = 10.0;
    EXPECT_EQ(diffusion_matrix(m).diagonal().head<4>(), Eigen::Vector4d::Constant(5.0));

    DirectInputs in;
    in.G1 = in.G2 = 1e4;
    in.gamma1 = in.gamma2 = 10.0;
    in.kappa1 = in.kappa2 = 5e4;
    in.feedback = {0.99, 0.0};
    const Matrix6 d = diffusion_matrix(make_effective_model(in));
    EXPECT_NEAR(d(quad::X, quad::X), 1000.0, 1e-9);
    EXPECT_NEAR(d(quad::Y, quad::Y), 1000.0, 1e-9);

    m.nbar1 = 200.0;
    EXPECT_EQ(diffusion_matrix(m)(0, 0), 2005.0);
    EXPECT_EQ(diffusion_matrix(m)(1, 1), 2005.0);
}

TEST(StabilityAnalytic, Examples)
{
    EffectiveModel m;
    m.gamma1 = m.gamma2 = 10.0;
    m.kappaTilde = 1e3;
    m.G1 = 5e4;
    m.G2 = 1e5;
    EXPECT_TRUE(stability_analytic(m));
    m.G1 = m.G2 = 1e4;
    EXPECT_TRUE(stability_analytic(m));
    EXPECT_NEAR(stability_gap(m), 5e3, 1e-6);
    m.G1 = 2e5;
    m.G2 = 1e5;
    EXPECT_FALSE(stability_analytic(m));
    EXPECT_FALSE(stability_eigen(drift_matrix(m)));
}

TEST(StabilityAnalytic, UnequalDampingUnsupported)
{
    EffectiveModel m;
    m.gamma1 = 1.0;
    m.gamma2 = 2.0;
    EXPECT_THROW(stability_analytic(m), UnsupportedRegimeError);
}

TEST(StabilityEigen, Examples)
{
    EXPECT_TRUE(stability_eigen(Matrix6(-Matrix6::Identity())));
    EffectiveModel m;
    m.G1 = m.G2 = 1e4;
    m.gamma1 = m.gamma2 = 10.0;
    m.kappaTilde = 0.0;
    EXPECT_EQ(classify_stability(drift_matrix(m)), Stability::marginal);
    EXPECT_FALSE(stability_eigen(drift_matrix(m)));
}

TEST(StabilityProperty, AnalyticMatchesEigenOutsideMargin)
{
    RandomModels gen(101);
    int compared = 0;
    for (int i = 0; i < 3000; ++i) {
        const EffectiveModel m = gen.next();
        const double gap = stability_gap(m);
        const double scale = m.G1 * m.G1 + m.G2 * m.G2 + std::abs(gap - m.G2 * m.G2 + m.G1 * m.G1);
        if (std::abs(gap) < 1e-6 * scale) continue;
        ++compared;
        EXPECT_EQ(stability_analytic(m), stability_eigen(drift_matrix(m)))
            << "G1=" << m.G1 << " G2=" << m.G2 << " k=" << m.kappaTilde << " D=" << m.DeltaTilde
            << " g=" << m.gamma1;
    }
    EXPECT_GT(compared, 2900);
}

TEST(SteadyState, DecoupledThermal)
{
    EffectiveModel m;
    m.gamma1 = 4.0;
    m.gamma2 = 6.0;
    m.kappaTilde = 1e3;
    m.DeltaTilde = 50.0;
    m.nbar1 = 3.0;
    m.nbar2 = 0.25;
    const Matrix6 v = steady_state_covariance(state_space(m));
    Eigen::Matrix<double, 6, 1> diag;
    diag << 3.5, 3.5, 0.75, 0.75, 0.5, 0.5;
    EXPECT_LT((v - Matrix6(diag.asDiagonal())).norm(), 1e-12);
}

TEST(SteadyState, RefusesUnstableAndMarginal)
{
    EffectiveModel m;
    m.G1 = 2e5;
    m.G2 = 1e5;
    m.gamma1 = m.gamma2 = 10.0;
    m.kappaTilde = 1e3;
    EXPECT_THROW(steady_state_covariance(state_space(m)), StabilityError);
    m.G1 = m.G2 = 1e4;
    m.kappaTilde = 0.0;
    EXPECT_THROW(steady_state_covariance(state_space(m)), StabilityError);
}

TEST(SteadyState, ResidualOnReferencePoint)
{
    const StateSpace ss = state_space(fig2_point());
    const LyapunovSolution sol = solve_lyapunov(ss);
    EXPECT_LT(sol.residual, lyapunov_residual_tolerance);
    EXPECT_EQ(sol.V, sol.V.transpose());
}

TEST(SteadyState, EqualCouplingsSolveAccurately)
{
    // G1 = G2 is stable but close to singular for the linear solve; a cold
    // bath leaves nu = 1/4, warm baths (nbar >= 1/2) remove the entanglement.
    EffectiveModel m = fig2_point(0.0);
    m.G1 = m.G2;
    const Matrix6 v_cold = steady_state_covariance(state_space(m));
    EXPECT_NEAR(min_symplectic_eigenvalue_pt(mechanical_submatrix(v_cold)), 0.25, 1e-3);
    m.nbar1 = m.nbar2 = 0.5;
    EXPECT_EQ(log_negativity(mechanical_submatrix(steady_state_covariance(state_space(m)))), 0.0);
    m.nbar1 = m.nbar2 = 2.0;
    EXPECT_EQ(log_negativity(mechanical_submatrix(steady_state_covariance(state_space(m)))), 0.0);
}

TEST(SteadyStateProperty, ResidualOnRandomStableModels)
{
    RandomModels gen(202);
    for (int i = 0; i < 300; ++i) {
        const EffectiveModel m = gen.next_stable();
        const StateSpace ss = state_space(m);
        const LyapunovSolution sol = solve_lyapunov(ss);
        EXPECT_LE(sol.residual, sol.tolerance);
        if (m.G1 < 0.98 * m.G2) {
            EXPECT_LT(sol.residual, lyapunov_residual_tolerance);
        }
    }
}

TEST(SteadyStateProperty, CoolingBelowInitialThermalValue)
{
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        EffectiveModel m;
        m.G1 = 0.0;
        m.G2 = 1e3 + 1e5 * u(rng);
        m.kappaTilde = 1e3 + 1e5 * u(rng);
        m.gamma1 = m.gamma2 = 1.0 + 100.0 * u(rng);
        const Matrix6 v = steady_state_covariance(state_space(m));
        const double n0 = 20.0 * u(rng);
        const Matrix6 v0 = initial_covariance(0.0, n0);
        EXPECT_LT(v(quad::q2, quad::q2), v0(quad::q2, quad::q2) + 1e-12);
        EXPECT_LT(v(quad::p2, quad::p2), v0(quad::p2, quad::p2) + 1e-12);
    }
}

TEST(TransitionAndNoise, ZeroDrift)
{
    Matrix6 d = Matrix6::Zero();
    d.diagonal() << 1, 2, 3, 4, 5, 6;
    const Discretization s = transition_and_noise(Matrix6::Zero(), d, 0.25);
    EXPECT_LT((s.M - Matrix6::Identity()).norm(), 1e-15);
    EXPECT_LT((s.Q - 0.25 * d).norm(), 1e-14);
}

TEST(TransitionAndNoise, ScalarDecayClosedForm)
{
    Matrix6 d = Matrix6::Zero();
    d.diagonal() << 1, 2, 3, 4, 5, 6;
    for (double a : {1e-3, 1.0, 50.0, 1e4}) {
        for (double dt : {1e-6, 1e-3, 0.1}) {
            const Discretization s = transition_and_noise(Matrix6(-a * Matrix6::Identity()), d, dt);
            if (a * dt > 700.0) {
                // exp(-a dt) underflows; only the noise term survives.
                EXPECT_LT(s.M.norm(), 1e-300);
                EXPECT_LT((s.Q - d / (2.0 * a)).norm() / d.norm(), 1e-12);
                continue;
            }
            const Matrix6 m_ref = std::exp(-a * dt) * Matrix6::Identity();
            const Matrix6 q_ref = d * (-std::expm1(-2.0 * a * dt) / (2.0 * a));
            EXPECT_LT((s.M - m_ref).norm() / m_ref.norm(), 1e-12) << a << " " << dt;
            EXPECT_LT((s.Q - q_ref).norm() / q_ref.norm(), 1e-12) << a << " " << dt;
        }
    }
}

TEST(TransitionAndNoise, SemigroupComposition)
{
    const StateSpace ss = state_space(fig2_point());
    const double dt = 2e-7;
    const Discretization one = transition_and_noise(ss.A, ss.D, dt);
    const Discretization two = transition_and_noise(ss.A, ss.D, 2.0 * dt);
    const Discretization composed = compose(one, one);
    EXPECT_LT((composed.M - two.M).norm() / two.M.norm(), 1e-12);
    EXPECT_LT((composed.Q - two.Q).norm() / two.Q.norm(), 1e-12);
    const Discretization eight = repeat(one, 8);
    const Discretization direct = transition_and_noise(ss.A, ss.D, 8.0 * dt);
    EXPECT_LT((eight.M - direct.M).norm() / direct.M.norm(), 1e-11);
    EXPECT_LT((eight.Q - direct.Q).norm() / direct.Q.norm(), 1e-11);
}

TEST(TransitionAndNoise, RejectsBadStep)
{
    EXPECT_THROW(transition_and_noise(Matrix6::Zero(), Matrix6::Zero(), 0.0), DomainError);
    EXPECT_THROW(transition_and_noise(Matrix6::Zero(), Matrix6::Zero(), -1.0), DomainError);
}

TEST(Propagate, FrozenDynamics)
{
    const StateSpace ss{Matrix6::Zero(), Matrix6::Zero()};
    const Matrix6 v0 = initial_covariance(3.0, 1.0);
    const std::vector<double> grid{0.0, 1.0, 5.0};
    for (const Matrix6& v : propagate(ss, v0, grid)) {
        EXPECT_EQ(v, v0);
    }
}

TEST(Propagate, ReachesSteadyState)
{
    const StateSpace ss = state_space(fig2_point(0.0));
    const std::vector<double> grid{50.0 / 5.0};
    const Matrix6 v = propagate(ss, initial_covariance(0.0, 0.0), grid).back();
    const Matrix6 vs = steady_state_covariance(ss);
    EXPECT_NEAR(log_negativity(mechanical_submatrix(v)), log_negativity(mechanical_submatrix(vs)),
                1e-6);
}

TEST(Propagate, GridIndependence)
{
    const StateSpace ss = state_space(fig2_point(0.9));
    const Matrix6 v0 = initial_covariance(2.0, 1.0);
    const std::vector<double> coarse{1e-3};
    const std::vector<double> fine = linspace(0.0, 1e-3, 37);
    const Matrix6 a = propagate(ss, v0, coarse).back();
    const Matrix6 b = propagate(ss, v0, fine).back();
    EXPECT_LT((a - b).norm() / a.norm(), 1e-10);
}

TEST(Propagate, RejectsBadInput)
{
    const StateSpace ss = state_space(fig2_point());
    Matrix6 asym = initial_covariance(0.0, 0.0);
    asym(0, 1) = 1.0;
    const std::vector<double> grid{0.0, 1e-3};
    EXPECT_THROW(propagate(ss, asym, grid), ShapeError);
    const std::vector<double> decreasing{1e-3, 0.0};
    EXPECT_THROW(propagate(ss, initial_covariance(0.0, 0.0), decreasing), DomainError);
    const std::vector<double> negative{-1.0};
    EXPECT_THROW(propagate(ss, initial_covariance(0.0, 0.0), negative), DomainError);
}

TEST(Propagate, DivergenceReportsStep)
{
    EffectiveModel m;
    m.G1 = 2e5;
    m.G2 = 0.0;
    m.gamma1 = m.gamma2 = 0.0;
    m.kappaTilde = 1.0;
    const std::vector<double> grid = linspace(0.0, 1.0, 11);
    try {
        propagate(state_space(m), initial_covariance(0.0, 0.0), grid);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.step(), 0U);
    }
}

TEST(PropagateProperty, PhysicalityPreserved)
{
    RandomModels gen(303);
    for (int i = 0; i < 40; ++i) {
        const EffectiveModel m = gen.next();
        const StateSpace ss = state_space(m);
        const std::vector<double> grid = linspace(0.0, 2e-4, 21);
        const std::vector<Matrix6> vs = propagate(ss, initial_covariance(m.nbar1, m.nbar2), grid);
        for (const Matrix6& v : vs) {
            const double scale = std::max(1.0, v.norm());
            EXPECT_GT(min_eigenvalue_floor(v), -1e-8 * scale);
        }
    }
}

TEST(Linspace, EndpointsAndCounts)
{
    EXPECT_TRUE(linspace(0.0, 1.0, 0).empty());
    EXPECT_EQ(linspace(2.0, 3.0, 1), std::vector<double>{2.0});
    const auto g = linspace(0.0, 1e-3, 1001);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1e-3);
    EXPECT_EQ(g.size(), 1001U);
}
