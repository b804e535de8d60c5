#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "cfent/matrix_exponential.hpp"

using cfent::expm;
using Eigen::MatrixXd;

namespace {

double rel_frobenius(const MatrixXd& a, const MatrixXd& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

TEST(Expm, ZeroIsIdentity)
{
    EXPECT_EQ(expm(MatrixXd::Zero(5, 5)), MatrixXd::Identity(5, 5));
}

TEST(Expm, ScaledIdentityClosedForm)
{
    for (double a : {-1e5, -300.0, -1.0, -1e-6, 0.5, 20.0}) {
        const MatrixXd e = expm(MatrixXd(a * MatrixXd::Identity(12, 12)));
        EXPECT_LT(rel_frobenius(e, std::exp(a) * MatrixXd::Identity(12, 12)), 1e-12) << a;
    }
}

TEST(Expm, RotationGenerator)
{
    for (double w : {0.1, 1.0, 7.5, 1e3}) {
        Eigen::Matrix2d g;
        g << 0.0, w, -w, 0.0;
        Eigen::Matrix2d r;
        r << std::cos(w), std::sin(w), -std::sin(w), std::cos(w);
        EXPECT_LT((expm(g) - r).norm(), 1e-12 * std::max(1.0, w));
    }
}

TEST(Expm, NilpotentJordanBlock)
{
    Eigen::Matrix3d n = Eigen::Matrix3d::Zero();
    n(0, 1) = 2.0;
    n(1, 2) = 3.0;
    Eigen::Matrix3d expected = Eigen::Matrix3d::Identity() + n + 0.5 * n * n;
    EXPECT_LT((expm(n) - expected).norm(), 1e-14);
}

TEST(Expm, AgreesWithEigenUnsupported)
{
    std::mt19937 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 11;
        const double scale = std::pow(10.0, -3.0 + 6.0 * (trial % 7) / 6.0);
        MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = g(rng);
        // Shift to a stable spectrum so large norms do not overflow.
        a = scale * a / a.norm();
        a -= scale * MatrixXd::Identity(n, n);
        const MatrixXd ref = a.exp();
        EXPECT_LT(rel_frobenius(expm(a), ref), 1e-12) << "n=" << n << " scale=" << scale;
    }
}

TEST(Expm, SemigroupProperty)
{
    std::mt19937 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    MatrixXd a(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a(i, j) = g(rng);
    const MatrixXd one = expm(a);
    const MatrixXd two = expm(MatrixXd(2.0 * a));
    EXPECT_LT(rel_frobenius(one * one, two), 1e-12);
}

TEST(Expm, RejectsBadInput)
{
    EXPECT_THROW(expm(MatrixXd::Zero(2, 3)), std::invalid_argument);
    MatrixXd bad = MatrixXd::Identity(2, 2);
    bad(0, 1) = std::nan("");
    EXPECT_THROW(expm(bad), std::domain_error);
}
