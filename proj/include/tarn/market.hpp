#pragma once

#include "tarn/contract.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <variant>
#include <vector>

namespace tarn {

/**
 * Piecewise-constant function of time.
 *
 * Piece i holds `values[i]` on [ends[i-1], ends[i]) with ends[-1] = 0; the
 * last value extends flat past the final end point, so every curve covers
 * any fixing schedule.
 */
class PiecewiseConstant
{
public:
    PiecewiseConstant() : PiecewiseConstant(0.0) {}
    explicit PiecewiseConstant(double value);
    PiecewiseConstant(std::vector<double> ends, std::vector<double> values);

    double operator()(double t) const;
    /// Exact integral over [t0, t1].
    double integral(double t0, double t1) const;
    double integral_of_square(double t0, double t1) const;
    double max_over(double t0, double t1) const;

    const std::vector<double>& ends() const { return m_ends; }
    const std::vector<double>& values() const { return m_values; }

private:
    double integrate(double t0, double t1, bool squared) const;

    std::vector<double> m_ends;
    std::vector<double> m_values;
};

using RateCurve = PiecewiseConstant;

struct ConstantVol
{
    double sigma;
};

struct TermStructureVol
{
    PiecewiseConstant sigma;
};

/// sigma(S, t) sampled on a rectangular mesh; rows are times, columns spots.
struct LocalVolSurface
{
    Eigen::VectorXd spots;
    Eigen::VectorXd times;
    Eigen::MatrixXd sigma;
};

using VolatilitySpec = std::variant<ConstantVol, TermStructureVol, LocalVolSurface>;

void validate(const VolatilitySpec& vol);
bool has_exact_transition(const VolatilitySpec& vol);

/// Largest volatility `vol` can produce on [0, horizon].
double representative_vol(const VolatilitySpec& vol, double horizon);

struct MarketModel
{
    RateCurve domestic;
    RateCurve foreign;
    VolatilitySpec vol = ConstantVol{0.2};
};

/// Thrown when a closed-form lognormal transition is requested for a local vol model.
class ExactTransitionUnavailable : public std::domain_error
{
public:
    ExactTransitionUnavailable() : std::domain_error("exact transition unavailable for local volatility") {}
};

double discount_factor(const RateCurve& curve, double t0, double t1);

/// Integral of sigma^2 over [t0, t1]. Throws ExactTransitionUnavailable for local vol.
double integrated_variance(const VolatilitySpec& vol, double t0, double t1);

/// Bilinear in (S, t), clamped to the mesh edges.
double local_vol_at(const VolatilitySpec& vol, double spot, double t);

/// Discounted price of a payoff beta * (S(t) - X)^+ under lognormal dynamics.
double vanilla_price(double spot, double strike, Direction beta, double expiry, const MarketModel& model);

/**
 * Reads a local vol mesh from a whitespace separated text matrix. The first
 * row holds the spot knots (after an ignored corner cell), the first column
 * holds the time knots.
 */
LocalVolSurface read_local_vol_matrix(std::istream& in);
LocalVolSurface load_local_vol_matrix(const std::filesystem::path& path);

} // namespace tarn
