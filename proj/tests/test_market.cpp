#include "tarn/market.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace tarn;

namespace {

// Discounted payoff integrated against the lognormal density in the standard
// normal variable z, over the in-the-money half line only.
double quadrature_vanilla(double spot, double strike, Direction beta, double t, double rd, double rf, double sigma)
{
    const double sd = sigma * std::sqrt(t);
    const double mu = std::log(spot) + (rd - rf - 0.5 * sigma * sigma) * t;
    const double b = sign(beta);
    const double z_strike = (std::log(strike) - mu) / sd;
    // Payoff times density with the exponents combined so the far tail underflows cleanly.
    auto integrand = [&](double z) {
        const double gauss = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        return b * (std::exp(mu + sd * z - 0.5 * z * z) - strike * std::exp(-0.5 * z * z)) * gauss;
    };
    using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
    // Beyond 40 standard deviations past the mode the integrand is below double precision.
    const double far = std::abs(z_strike) + sd + 40.0;
    const double value = b > 0 ? Q::integrate(integrand, z_strike, far, 20, 1e-15)
                               : Q::integrate(integrand, -far, z_strike, 20, 1e-15);
    return std::exp(-rd * t) * value;
}

MarketModel flat(double rd, double rf, double sigma) { return {RateCurve(rd), RateCurve(rf), ConstantVol{sigma}}; }

LocalVolSurface mesh_2x2(double a, double b, double c, double d)
{
    LocalVolSurface s{Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(0.0, 1.0), Eigen::Matrix2d()};
    s.sigma << a, b, c, d;
    return s;
}

} // namespace

TEST(DiscountFactor, Examples)
{
    EXPECT_EQ(discount_factor(RateCurve(0.0), 0.3, 2.0), 1.0);
    EXPECT_NEAR(discount_factor(RateCurve(0.05), 0.0, 1.0), std::exp(-0.05), 1e-15);
    const RateCurve stepped({0.5, 1.0}, {0.02, 0.04});
    EXPECT_NEAR(discount_factor(stepped, 0.0, 1.0), std::exp(-0.03), 1e-15);
}

TEST(DiscountFactor, Multiplicative)
{
    const RateCurve c({0.25, 0.7, 1.3}, {0.01, 0.035, -0.005, 0.02});
    const double ts[] = {0.0, 0.1, 0.25, 0.5, 0.7, 1.0, 1.3, 2.5};
    for (double a : ts)
        for (double b : ts)
            for (double e : ts) {
                if (!(a <= b && b <= e))
                    continue;
                EXPECT_NEAR(discount_factor(c, a, b) * discount_factor(c, b, e), discount_factor(c, a, e), 4e-16);
            }
}

TEST(PiecewiseConstant, RejectsBadKnots)
{
    EXPECT_THROW(RateCurve({0.5, 0.5}, {0.1, 0.2, 0.3}), std::invalid_argument);
    EXPECT_THROW(RateCurve({0.5}, {0.1, 0.2, 0.3}), std::invalid_argument);
    EXPECT_THROW(RateCurve(std::nan("")), std::invalid_argument);
}

TEST(IntegratedVariance, Examples)
{
    EXPECT_NEAR(integrated_variance(ConstantVol{0.2}, 0.0, 30.0 / 365.0), 0.04 * 30.0 / 365.0, 1e-16);
    const TermStructureVol ts{PiecewiseConstant({0.5}, {0.1, 0.3})};
    EXPECT_NEAR(integrated_variance(ts, 0.0, 1.0), 0.05, 1e-15);
    EXPECT_THROW(integrated_variance(mesh_2x2(0.2, 0.2, 0.2, 0.2), 0.0, 1.0), ExactTransitionUnavailable);
}

TEST(IntegratedVariance, AdditiveAndNonNegative)
{
    const TermStructureVol ts{PiecewiseConstant({0.2, 0.45, 0.9}, {0.15, 0.3, 0.1, 0.25})};
    const double ts_pts[] = {0.0, 0.1, 0.2, 0.33, 0.45, 0.6, 0.9, 1.7};
    for (std::size_t i = 0; i + 2 < std::size(ts_pts); ++i) {
        const double a = ts_pts[i], b = ts_pts[i + 1], c = ts_pts[i + 2];
        EXPECT_GE(integrated_variance(ts, a, b), 0.0);
        EXPECT_NEAR(integrated_variance(ts, a, b) + integrated_variance(ts, b, c), integrated_variance(ts, a, c),
                    1e-16);
    }
}

TEST(LocalVolAt, Examples)
{
    EXPECT_EQ(local_vol_at(ConstantVol{0.2}, 0.7, 3.0), 0.2);
    const auto s = mesh_2x2(0.1, 0.2, 0.3, 0.4);
    EXPECT_EQ(local_vol_at(s, 1.0, 0.0), 0.1);
    EXPECT_EQ(local_vol_at(s, 2.0, 0.0), 0.2);
    EXPECT_EQ(local_vol_at(s, 1.0, 1.0), 0.3);
    EXPECT_EQ(local_vol_at(s, 2.0, 1.0), 0.4);
    EXPECT_NEAR(local_vol_at(s, 1.5, 0.5), 0.25, 1e-15);
}

TEST(LocalVolAt, ClampsOutsideTheMesh)
{
    const auto s = mesh_2x2(0.1, 0.2, 0.3, 0.4);
    EXPECT_EQ(local_vol_at(s, 0.1, -1.0), 0.1);
    EXPECT_EQ(local_vol_at(s, 9.0, 5.0), 0.4);
    EXPECT_NEAR(local_vol_at(s, 9.0, 0.5), 0.3, 1e-15);
}

TEST(LocalVolSurface, ValidationRejectsNonPositiveSigma)
{
    EXPECT_THROW(validate(VolatilitySpec{mesh_2x2(0.1, 0.0, 0.3, 0.4)}), std::invalid_argument);
    EXPECT_THROW(validate(VolatilitySpec{ConstantVol{-0.1}}), std::invalid_argument);
}

TEST(LocalVolMatrix, ReadsKnotsAndValues)
{
    std::istringstream in("# local vol\n0, 0.8, 1.0, 1.2\n0.0, 0.25, 0.2, 0.22\n1.0; 0.27; 0.21; 0.23\n");
    const auto s = read_local_vol_matrix(in);
    ASSERT_EQ(s.spots.size(), 3);
    ASSERT_EQ(s.times.size(), 2);
    EXPECT_EQ(s.spots(2), 1.2);
    EXPECT_EQ(s.times(1), 1.0);
    EXPECT_EQ(s.sigma(1, 0), 0.27);
    EXPECT_EQ(s.sigma(0, 1), 0.2);

    std::istringstream ragged("0 1 2\n0 0.2\n");
    EXPECT_THROW(read_local_vol_matrix(ragged), std::invalid_argument);
    std::istringstream junk("0 1 2\n0 0.2 abc\n");
    EXPECT_THROW(read_local_vol_matrix(junk), std::invalid_argument);
}

TEST(VanillaPrice, DeterministicLimit)
{
    EXPECT_NEAR(vanilla_price(1.05, 1.0, Direction::Buy, 1.0, flat(0, 0, 1e-12)), 0.05, 1e-12);
    EXPECT_NEAR(vanilla_price(1.05, 1.0, Direction::Buy, 1.0, flat(0, 0, 0.0)), 0.05, 1e-15);
}

TEST(VanillaPrice, TableOneFirstFixingMatchesQuadrature)
{
    const double t = 30.0 / 365.0;
    const double ref = quadrature_vanilla(1.05, 1.0, Direction::Buy, t, 0.0, 0.0, 0.2);
    EXPECT_NEAR(vanilla_price(1.05, 1.0, Direction::Buy, t, flat(0, 0, 0.2)), ref, 1e-8 * ref);
}

TEST(VanillaPrice, SweepMatchesQuadrature)
{
    for (double m : {0.8, 0.9, 1.0, 1.1, 1.2})
        for (double sigma : {0.05, 0.2, 0.5})
            for (double t : {0.05, 0.5, 2.0})
                for (auto beta : {Direction::Buy, Direction::Sell}) {
                    const double rd = 0.03, rf = 0.01;
                    const double ref = quadrature_vanilla(1.0, m, beta, t, rd, rf, sigma);
                    if (ref < 1e-12)
                        continue; // deep out of the money: relative error meaningless
                    const double v = vanilla_price(1.0, m, beta, t, flat(rd, rf, sigma));
                    EXPECT_NEAR(v, ref, 1e-8 * ref) << "K=" << m << " sigma=" << sigma << " t=" << t;
                }
}

TEST(VanillaPrice, TermStructureUsesTotalVariance)
{
    const MarketModel ts{RateCurve(0.01), RateCurve(0.0), TermStructureVol{PiecewiseConstant({0.5}, {0.1, 0.3})}};
    const double v = vanilla_price(1.0, 1.0, Direction::Buy, 1.0, ts);
    EXPECT_NEAR(v, vanilla_price(1.0, 1.0, Direction::Buy, 1.0, flat(0.01, 0.0, std::sqrt(0.05))), 1e-14);
}

TEST(VanillaPrice, PutCallParity)
{
    for (double s : {0.8, 1.05, 1.3})
        for (double rd : {0.0, 0.04})
            for (double rf : {0.0, 0.02})
                for (double t : {0.1, 1.5}) {
                    const auto model = flat(rd, rf, 0.25);
                    const double call = vanilla_price(s, 1.0, Direction::Buy, t, model);
                    const double put = vanilla_price(s, 1.0, Direction::Sell, t, model);
                    EXPECT_NEAR(call - put, s * std::exp(-rf * t) - std::exp(-rd * t), 1e-14);
                }
}

TEST(VanillaPrice, LocalVolRejected)
{
    const MarketModel lv{RateCurve(0.0), RateCurve(0.0), mesh_2x2(0.2, 0.2, 0.2, 0.2)};
    EXPECT_THROW(vanilla_price(1.0, 1.0, Direction::Buy, 1.0, lv), ExactTransitionUnavailable);
    EXPECT_FALSE(has_exact_transition(lv.vol));
}

TEST(RepresentativeVol, MaxOverHorizon)
{
    EXPECT_EQ(representative_vol(ConstantVol{0.2}, 1.0), 0.2);
    const TermStructureVol ts{PiecewiseConstant({0.5, 2.0}, {0.1, 0.3, 0.9})};
    EXPECT_EQ(representative_vol(ts, 1.0), 0.3);
    EXPECT_EQ(representative_vol(mesh_2x2(0.1, 0.5, 0.3, 0.4), 1.0), 0.5);
}
