#pragma once

#include "tarn/fd/grid.hpp"
#include "tarn/numerics/tridiagonal.hpp"

#include <Eigen/Core>

namespace tarn::fd {

/**
 * Discrete log-spot operator
 *   F(V)_i = 1/2 sigma_i^2 V_xx + nu_i V_x - r_d V,  nu_i = r_d - r_f - sigma_i^2 / 2
 * with central differences, stored as the three bands of row i. Entries at
 * the two boundary nodes are unused.
 */
struct SpatialOperator
{
    Eigen::ArrayXd lower;
    Eigen::ArrayXd diag;
    Eigen::ArrayXd upper;
};

/// Operator for per-node variances sigma_i^2 and the given rates.
SpatialOperator spatial_operator(const Eigen::ArrayXd& variance, double domestic_rate, double foreign_rate, double dx);

/**
 * Coefficients of one backward step over [t_lo, t_hi]. Rates and
 * deterministic volatilities enter as exact averages over the step; local
 * volatility is sampled per node at each time level.
 */
struct StepCoefficients
{
    SpatialOperator implicit_level; // at t_lo, the unknown level
    SpatialOperator explicit_level; // at t_hi, the known level
};

StepCoefficients step_coefficients(const FdGrid& grid, const MarketModel& model, double t_lo, double t_hi);

/// Linear relation V_b = alpha V_n1 + gamma V_n2 + kappa tying a boundary node to its two neighbours.
struct BoundaryRelation
{
    double alpha = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
};

struct BoundaryRelations
{
    BoundaryRelation low;
    BoundaryRelation high;
};

BoundaryRelations boundary_relations(const FdGrid& grid, BoundaryCondition boundary, Direction beta);

/**
 * One theta-scheme step backward in time,
 *   (V_hi - V_lo) / dt + theta F_lo(V_lo) + (1 - theta) F_hi(V_hi) = 0,
 * solved for V_lo. The implicit system is factorised once and applied to
 * any number of rows.
 */
class ThetaStepper
{
public:
    ThetaStepper(const StepCoefficients& coefficients, const BoundaryRelations& boundary, double dt, double theta);

    /// Advances `row` from t_hi to t_lo in place.
    void apply(Eigen::Ref<Eigen::VectorXd> row) const;

private:
    SpatialOperator m_explicit;
    BoundaryRelations m_boundary;
    double m_dt;
    double m_theta;
    Eigen::ArrayXd m_lower; // implicit bands on the interior nodes before boundary elimination
    Eigen::ArrayXd m_upper;
    numerics::TridiagonalFactorization<double> m_factor;
};

Eigen::VectorXd theta_step(const Eigen::VectorXd& row, double dt, double theta, const StepCoefficients& coefficients,
                           const BoundaryRelations& boundary);

} // namespace tarn::fd
