#include "tarn/fd/theta_scheme.hpp"

#include <stdexcept>

namespace tarn::fd {

SpatialOperator spatial_operator(const Eigen::ArrayXd& variance, double domestic_rate, double foreign_rate, double dx)
{
    const Eigen::ArrayXd diffusion = 0.5 * variance / (dx * dx);
    const Eigen::ArrayXd drift = (domestic_rate - foreign_rate - 0.5 * variance) / (2.0 * dx);
    return SpatialOperator{diffusion - drift, -2.0 * diffusion - domestic_rate, diffusion + drift};
}

StepCoefficients step_coefficients(const FdGrid& grid, const MarketModel& model, double t_lo, double t_hi)
{
    const double dt = t_hi - t_lo;
    const double rd = model.domestic.integral(t_lo, t_hi) / dt;
    const double rf = model.foreign.integral(t_lo, t_hi) / dt;
    const Eigen::Index m = grid.spot_count();
    if (has_exact_transition(model.vol)) {
        const auto op = spatial_operator(Eigen::ArrayXd::Constant(m, integrated_variance(model.vol, t_lo, t_hi) / dt), rd,
                                         rf, grid.dx);
        return StepCoefficients{op, op};
    }
    auto level = [&](double t) {
        Eigen::ArrayXd variance(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double sigma = local_vol_at(model.vol, grid.spots(i), t);
            variance(i) = sigma * sigma;
        }
        return spatial_operator(variance, rd, rf, grid.dx);
    };
    return StepCoefficients{level(t_lo), level(t_hi)};
}

BoundaryRelations boundary_relations(const FdGrid& grid, BoundaryCondition boundary, Direction beta)
{
    if (boundary == BoundaryCondition::ZeroGamma)
        return BoundaryRelations{{2.0, -1.0, 0.0}, {2.0, -1.0, 0.0}};
    const Eigen::Index m = grid.spot_count();
    if (beta == Direction::Buy)
        return BoundaryRelations{{0.0, 0.0, 0.0}, {1.0, 0.0, grid.spots(m - 1) - grid.spots(m - 2)}};
    return BoundaryRelations{{1.0, 0.0, grid.spots(1) - grid.spots(0)}, {0.0, 0.0, 0.0}};
}

ThetaStepper::ThetaStepper(const StepCoefficients& coefficients, const BoundaryRelations& boundary, double dt,
                           double theta)
    : m_explicit(coefficients.explicit_level), m_boundary(boundary), m_dt(dt), m_theta(theta)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("theta step needs a positive time step");
    const auto& op = coefficients.implicit_level;
    const Eigen::Index m = op.diag.size();
    if (m < 3)
        throw std::invalid_argument("theta step needs at least three spot nodes");
    const Eigen::Index n = m - 2;
    const double w = theta * dt;
    m_lower = -w * op.lower.segment(1, n);
    m_upper = -w * op.upper.segment(1, n);
    Eigen::ArrayXd lower = m_lower;
    Eigen::ArrayXd diag = 1.0 - w * op.diag.segment(1, n);
    Eigen::ArrayXd upper = m_upper;

    const auto& lo = boundary.low;
    const auto& hi = boundary.high;
    if (n == 1 && (lo.gamma != 0.0 || hi.gamma != 0.0))
        throw std::invalid_argument("boundary relations reach past a single interior node");
    diag(0) += m_lower(0) * lo.alpha;
    diag(n - 1) += m_upper(n - 1) * hi.alpha;
    if (n > 1) {
        upper(0) += m_lower(0) * lo.gamma;
        lower(n - 1) += m_upper(n - 1) * hi.gamma;
    }
    m_factor.compute(lower.matrix(), diag.matrix(), upper.matrix());
}

void ThetaStepper::apply(Eigen::Ref<Eigen::VectorXd> row) const
{
    const Eigen::Index m = row.size();
    const Eigen::Index n = m - 2;
    if (n != m_factor.size())
        throw std::invalid_argument("theta step: row size does not match the operator");

    // Explicit half, written over the interior in place.
    const double w = (1.0 - m_theta) * m_dt;
    double prev = row(0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        const double here = row(i);
        double rhs = here;
        if (w != 0.0)
            rhs += w * (m_explicit.lower(i) * prev + m_explicit.diag(i) * here + m_explicit.upper(i) * row(i + 1));
        row(i) = rhs;
        prev = here;
    }
    row(1) -= m_lower(0) * m_boundary.low.kappa;
    row(n) -= m_upper(n - 1) * m_boundary.high.kappa;

    auto interior = row.segment(1, n);
    m_factor.solve_in_place(interior);

    const auto& lo = m_boundary.low;
    const auto& hi = m_boundary.high;
    row(0) = lo.alpha * row(1) + (n > 1 ? lo.gamma * row(2) : 0.0) + lo.kappa;
    row(m - 1) = hi.alpha * row(m - 2) + (n > 1 ? hi.gamma * row(m - 3) : 0.0) + hi.kappa;
}

Eigen::VectorXd theta_step(const Eigen::VectorXd& row, double dt, double theta, const StepCoefficients& coefficients,
                           const BoundaryRelations& boundary)
{
    Eigen::VectorXd out = row;
    ThetaStepper(coefficients, boundary, dt, theta).apply(out);
    return out;
}

} // namespace tarn::fd
