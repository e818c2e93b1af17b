#include "tarn/fd/engine.hpp"

#include "tarn/numerics/cubic_spline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace tarn::fd {

namespace {

// Post-jump value at spot `spot` for the state with accumulated amount A_j,
// taking the continuation from the column splined in A.
class JumpEvaluator
{
public:
    JumpEvaluator(const Eigen::VectorXd& column, const FdGrid& grid) : m_column(column), m_grid(grid) {}

    double operator()(double spot, Eigen::Index j, std::size_t k, const TarnContract& contract)
    {
        const double accumulated = m_grid.accumulation(j);
        const auto flow = detail::fixing_outcome_limit(spot, accumulated, k, contract);
        double continuation = 0.0;
        if (!flow.terminated) {
            if (flow.accumulation_increment == 0.0) {
                continuation = m_column(j);
            } else {
                if (!m_spline)
                    m_spline.emplace(m_grid.accumulation, m_column);
                continuation = (*m_spline)(accumulated + flow.accumulation_increment);
            }
        }
        return continuation + flow.payment + flow.extra_payment;
    }

private:
    const Eigen::VectorXd& m_column;
    const FdGrid& m_grid;
    std::optional<numerics::NaturalCubicSpline<double>> m_spline;
};

void check_shape(const FdState& state, const FdGrid& grid)
{
    if (state.values.rows() != grid.accumulation_count() || state.values.cols() != grid.spot_count())
        throw std::invalid_argument("jump: lattice shape does not match the grid");
}

} // namespace

FdState apply_jump(const FdState& state, std::size_t k, const TarnContract& contract, const FdGrid& grid)
{
    check_shape(state, grid);
    const Eigen::Index rows = grid.accumulation_count();
    const Eigen::Index cols = grid.spot_count();
    FdState out{Lattice(rows, cols), state.time};
    Eigen::VectorXd column(rows);
    for (Eigen::Index m = 0; m < cols; ++m) {
        column = state.values.col(m);
        JumpEvaluator jump(column, grid);
        for (Eigen::Index j = 0; j < rows; ++j)
            out.values(j, m) = jump(grid.spots(m), j, k, contract);
    }
    return out;
}

FdState apply_smoothed_jump(const FdState& state, std::size_t k, const TarnContract& contract, const FdGrid& grid)
{
    FdState out = apply_jump(state, k, contract, grid);
    const Eigen::Index rows = grid.accumulation_count();
    const Eigen::Index cols = grid.spot_count();
    const Eigen::Index top = rows - 1;
    const double beta = sign(contract.beta);
    const double extra = contract.extra_payment(k);

    for (Eigen::Index j = 0; j < rows; ++j) {
        const double accumulated = grid.accumulation(j);
        const double remaining = contract.target - accumulated;
        const double threshold = contract.strike + beta * remaining;
        if (!(threshold > 0.0))
            continue;
        const double x_star = std::log(threshold);
        const auto m = static_cast<Eigen::Index>(std::lround((x_star - grid.log_spots(0)) / grid.dx));
        // Boundary nodes keep their point values; the boundary relations overwrite them anyway.
        if (m <= 0 || m >= cols - 1)
            continue;
        const double x = grid.log_spots(m);
        const double lo = x - 0.5 * grid.dx;
        const double hi = x + 0.5 * grid.dx;
        if (!(x_star > lo && x_star < hi))
            continue;

        // Jump of the post-fixing value across the threshold: the surviving side
        // pays the remaining amount and continues at A = U.
        const auto breach = detail::breaching_outcome(accumulated, k, contract);
        const double survive = remaining + extra + state.values(top, m);
        const double step = breach.payment + breach.extra_payment - survive;

        const double breach_fraction = (beta > 0.0 ? hi - x_star : x_star - lo) / grid.dx;
        const bool node_breaches = beta * (x - x_star) > 0.0 || (x == x_star && remaining > 0.0);
        out.values(j, m) += step * (breach_fraction - (node_breaches ? 1.0 : 0.0));
    }
    return out;
}

JumpCondition jump_for(const FdConfig& config)
{
    if (config.smooth_jumps)
        return apply_smoothed_jump;
    return apply_jump;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Marches rows [0, row_count) of the lattice from times[k] back to times[k-1].
void march_interval(FdState& state, Eigen::Index row_count, std::size_t k, const FdGrid& grid,
                    const MarketModel& model, const FdConfig& config, const BoundaryRelations& boundary)
{
    const double t_end = grid.times[k - 1];
    const double t_start = grid.times[k];
    const int steps = grid.steps[k - 1];
    const double dt = (t_start - t_end) / steps;
    const Eigen::Index cols = state.values.cols();

    auto advance = [&](double t_lo, double t_hi, double theta) {
        const ThetaStepper stepper(step_coefficients(grid, model, t_lo, t_hi), boundary, t_hi - t_lo, theta);
        for (Eigen::Index j = 0; j < row_count; ++j)
            stepper.apply(Eigen::Map<Eigen::VectorXd>(state.values.row(j).data(), cols));
    };

    for (int s = 0; s < steps; ++s) {
        const double t_hi = t_start - s * dt;
        const double t_lo = s + 1 == steps ? t_end : t_start - (s + 1) * dt;
        if (s == 0 && config.implicit_startup) {
            const double t_mid = 0.5 * (t_lo + t_hi);
            advance(t_mid, t_hi, 1.0);
            advance(t_lo, t_mid, 1.0);
        } else {
            advance(t_lo, t_hi, config.theta);
        }
    }
    state.time = t_end;
}

} // namespace

FdResult fd_price_with(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot,
                       const JumpCondition& jump, const JumpObserver& observer)
{
    const auto start = Clock::now();
    validate(model.vol);
    const FdGrid grid = build_grid(contract, model, config, spot);
    const BoundaryRelations boundary = boundary_relations(grid, config.boundary, contract.beta);
    const Eigen::Index rows = grid.accumulation_count();

    FdState state{Lattice::Zero(rows, grid.spot_count()), contract.maturity()};
    for (std::size_t k = contract.fixing_count(); k >= 1; --k) {
        state = jump(state, k, contract, grid);
        if (observer)
            observer(k, state, grid);
        // Before the first fixing the accumulated amount is known to be zero.
        march_interval(state, k > 1 ? rows : 1, k, grid, model, config, boundary);
    }

    const Eigen::VectorXd today = state.values.row(0).transpose();
    double price;
    if (grid.spot_index) {
        price = today(*grid.spot_index);
    } else {
        price = numerics::NaturalCubicSpline<double>(grid.log_spots, today)(std::log(spot));
    }

    FdResult result;
    result.price = price;
    result.seconds = elapsed(start);
    result.spot_nodes = grid.spot_count();
    result.accumulation_nodes = rows;
    result.time_steps = config.refined_time_steps();
    result.pin_policy = grid.pin_policy;
    return result;
}

FdResult fd_price(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot)
{
    return fd_price_with(contract, model, config, spot, jump_for(config));
}

double relative_refinement_error(double coarse, double refined)
{
    if (refined == 0.0)
        throw std::domain_error("relative error undefined: refined price is zero");
    return std::abs((coarse - refined) / refined);
}

ErrorEstimate estimate_error(const TarnContract& contract, const MarketModel& model, const FdConfig& config,
                             double spot)
{
    const auto start = Clock::now();
    FdConfig refined = config;
    refined.refinement = config.refinement + 1;
    ErrorEstimate estimate;
    estimate.coarse = fd_price(contract, model, config, spot).price;
    estimate.refined = fd_price(contract, model, refined, spot).price;
    estimate.relative_error = relative_refinement_error(estimate.coarse, estimate.refined);
    estimate.seconds = elapsed(start);
    return estimate;
}

double observed_order(double coarse, double medium, double fine)
{
    const double denominator = std::abs(medium - fine);
    if (denominator == 0.0)
        throw std::domain_error("converged below measurable difference");
    return std::log2(std::abs(coarse - medium) / denominator);
}

ConvergenceStudy convergence_order(const TarnContract& contract, const MarketModel& model, const FdConfig& base,
                                   double spot)
{
    const auto start = Clock::now();
    ConvergenceStudy study;
    for (int level = 0; level < 3; ++level) {
        FdConfig config = base;
        config.refinement = base.refinement + level;
        study.prices[static_cast<std::size_t>(level)] = fd_price(contract, model, config, spot).price;
    }
    study.order = observed_order(study.prices[0], study.prices[1], study.prices[2]);
    study.seconds = elapsed(start);
    return study;
}

void write_lattice(std::ostream& out, const FdState& state, const FdGrid& grid)
{
    out << std::setprecision(17) << "# t=" << state.time << "\nA\\S";
    for (Eigen::Index m = 0; m < grid.spot_count(); ++m)
        out << ' ' << grid.spots(m);
    out << '\n';
    for (Eigen::Index j = 0; j < state.values.rows(); ++j) {
        out << grid.accumulation(j);
        for (Eigen::Index m = 0; m < state.values.cols(); ++m)
            out << ' ' << state.values(j, m);
        out << '\n';
    }
}

JumpObserver lattice_dumper(std::filesystem::path directory)
{
    std::filesystem::create_directories(directory);
    return [directory = std::move(directory)](std::size_t k, const FdState& state, const FdGrid& grid) {
        std::ofstream out(directory / ("lattice_fixing_" + std::to_string(k) + ".txt"));
        if (!out)
            throw std::runtime_error("cannot write lattice dump into " + directory.string());
        write_lattice(out, state, grid);
    };
}

} // namespace tarn::fd
