#include "tarn/numerics/cubic_spline.hpp"
#include "tarn/numerics/tridiagonal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tarn::numerics;
using Eigen::VectorXd;

namespace {

// Dense Gaussian elimination with partial pivoting, kept deliberately naive.
VectorXd dense_solve(const VectorXd& lower, const VectorXd& diag, const VectorXd& upper, const VectorXd& rhs)
{
    const Eigen::Index n = diag.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        a[i][i] = diag(i);
        if (i > 0)
            a[i][i - 1] = lower(i);
        if (i + 1 < n)
            a[i][i + 1] = upper(i);
        a[i][n] = rhs(i);
    }
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index p = c;
        for (Eigen::Index r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c]))
                p = r;
        std::swap(a[c], a[p]);
        for (Eigen::Index r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (Eigen::Index k = c; k <= n; ++k)
                a[r][k] -= f * a[c][k];
        }
    }
    VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = a[i][n];
        for (Eigen::Index k = i + 1; k < n; ++k)
            s -= a[i][k] * x(k);
        x(i) = s / a[i][i];
    }
    return x;
}

double interior_error(int nodes, double length, double lo, double hi)
{
    const VectorXd x = VectorXd::LinSpaced(nodes, 0.0, length);
    const VectorXd y = (3.0 * x.array()).sin().matrix();
    const NaturalCubicSpline<double> spline(x, y);
    double worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double q = lo + (hi - lo) * i / 20000.0;
        worst = std::max(worst, std::abs(spline(q) - std::sin(3.0 * q)));
    }
    return worst;
}

} // namespace

TEST(Tridiagonal, IdentityReturnsRhs)
{
    const VectorXd rhs = VectorXd::LinSpaced(7, -1.0, 2.0);
    const VectorXd zero = VectorXd::Zero(7);
    EXPECT_EQ(solve_tridiagonal(zero, VectorXd::Ones(7), zero, rhs), rhs);
}

TEST(Tridiagonal, SmallSystemMatchesDenseElimination)
{
    VectorXd l(3), d(3), u(3), b(3);
    l << 0.0, 1.0, -2.0;
    d << 4.0, 5.0, 6.0;
    u << 1.0, 2.0, 0.0;
    b << 1.0, -3.0, 7.0;
    const VectorXd x = solve_tridiagonal(l, d, u, b);
    EXPECT_LT((x - dense_solve(l, d, u, b)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Tridiagonal, RandomDiagonallyDominantMatchesDenseElimination)
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 100;
        VectorXd l(n), d(n), u(n), b(n);
        for (int i = 0; i < n; ++i) {
            l(i) = unit(rng);
            u(i) = unit(rng);
            d(i) = (std::abs(l(i)) + std::abs(u(i)) + 0.5) * (unit(rng) > 0 ? 1.0 : -1.0);
            b(i) = unit(rng);
        }
        const VectorXd x = solve_tridiagonal(l, d, u, b);
        EXPECT_LT((x - dense_solve(l, d, u, b)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Tridiagonal, FactorisationReusableAcrossRightHandSides)
{
    VectorXd l = VectorXd::Constant(5, -1.0), d = VectorXd::Constant(5, 3.0), u = VectorXd::Constant(5, -1.0);
    const TridiagonalFactorization<double> f(l, d, u);
    for (int i = 0; i < 3; ++i) {
        const VectorXd b = VectorXd::LinSpaced(5, i, 2.0 * i + 1.0);
        EXPECT_LT((f.solve(b) - dense_solve(l, d, u, b)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Tridiagonal, ZeroPivotNamesTheRow)
{
    VectorXd l(3), d(3), u(3);
    l << 0.0, 1.0, 1.0;
    d << 1.0, 1.0, 1.0;
    u << 1.0, 1.0, 0.0;
    // Second pivot: 1 - 1 * 1 / 1 = 0.
    try {
        solve_tridiagonal(l, d, u, VectorXd::Ones(3));
        FAIL() << "expected SingularPivot";
    } catch (const SingularPivot& e) {
        EXPECT_EQ(e.row(), 1);
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    }
}

TEST(Tridiagonal, FloatScalar)
{
    Eigen::VectorXf l = Eigen::VectorXf::Constant(4, 1.0f), d = Eigen::VectorXf::Constant(4, 4.0f);
    const Eigen::VectorXf x = solve_tridiagonal(l, d, l, Eigen::VectorXf::Ones(4));
    const Eigen::VectorXf back = (4.0f * x.array()).matrix() + Eigen::VectorXf({{x(1), x(0) + x(2), x(1) + x(3), x(2)}});
    EXPECT_LT((back - Eigen::VectorXf::Ones(4)).cwiseAbs().maxCoeff(), 1e-6f);
}

TEST(CubicSpline, ReproducesNodes)
{
    const VectorXd x = VectorXd::LinSpaced(11, 0.0, 0.3);
    const VectorXd y = (x.array() * 17.0).cos().matrix();
    const NaturalCubicSpline<double> s(x, y);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        EXPECT_EQ(s(x(i)), y(i));
}

TEST(CubicSpline, ExactOnLinearData)
{
    const VectorXd x = VectorXd::LinSpaced(9, 0.0, 2.0);
    const VectorXd y = (2.0 * x.array() + 1.0).matrix();
    const VectorXd q = VectorXd::LinSpaced(101, 0.0, 2.0);
    const VectorXd v = natural_cubic_spline(x, y, q);
    EXPECT_LT((v - (2.0 * q.array() + 1.0).matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CubicSpline, NaturalEnds)
{
    const VectorXd x = VectorXd::LinSpaced(6, 0.0, 1.0);
    const VectorXd y = x.array().square().matrix();
    const NaturalCubicSpline<double> s(x, y);
    EXPECT_EQ(s.second_derivatives()(0), 0.0);
    EXPECT_EQ(s.second_derivatives()(5), 0.0);
}

TEST(CubicSpline, TwoNodesIsLinear)
{
    const NaturalCubicSpline<double> s(Eigen::Vector2d(0.0, 2.0), Eigen::Vector2d(1.0, 5.0));
    EXPECT_DOUBLE_EQ(s(0.5), 2.0);
}

TEST(CubicSpline, RejectsQueriesOutsideRange)
{
    const NaturalCubicSpline<double> s(VectorXd::LinSpaced(5, 0.0, 1.0), VectorXd::Zero(5));
    EXPECT_THROW(s(-1e-12), std::out_of_range);
    EXPECT_THROW(s(1.0 + 1e-12), std::out_of_range);
    EXPECT_NO_THROW(s(1.0));
}

TEST(CubicSpline, RejectsBadNodes)
{
    EXPECT_THROW(NaturalCubicSpline<double>(Eigen::Vector3d(0, 1, 1), Eigen::Vector3d(0, 0, 0)),
                 std::invalid_argument);
    EXPECT_THROW(NaturalCubicSpline<double>(VectorXd::Zero(1), VectorXd::Zero(1)), std::invalid_argument);
}

TEST(CubicSpline, FourthOrderInterior)
{
    const double r1 = interior_error(21, 1.0, 0.25, 0.75) / interior_error(41, 1.0, 0.25, 0.75);
    EXPECT_GE(r1, 14.0);
    EXPECT_LE(r1, 18.0);
    // On [0, pi] the natural end condition is exact for sin(3A), so the whole range converges at fourth order.
    const double r2 = interior_error(21, std::numbers::pi, 0.0, std::numbers::pi) /
                      interior_error(41, std::numbers::pi, 0.0, std::numbers::pi);
    EXPECT_GE(r2, 14.0);
    EXPECT_LE(r2, 18.0);
}
