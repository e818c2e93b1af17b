#include "tarn/fd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tarn::fd {

void FdConfig::validate() const
{
    if (spot_nodes < 3)
        throw std::invalid_argument("spot_nodes must be at least 3");
    if (boundary == BoundaryCondition::ZeroGamma && spot_nodes < 4)
        throw std::invalid_argument("spot_nodes must be at least 4 with zero-gamma boundaries");
    if (accumulation_nodes < 4)
        throw std::invalid_argument("accumulation_nodes must be at least 4");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("theta must lie in [0, 1]");
    if (!(domain_width_sigmas > 0.0))
        throw std::invalid_argument("domain_width_sigmas must be positive");
    if (refinement < 0 || refinement > 8)
        throw std::invalid_argument("refinement must lie in [0, 8]");
}

std::vector<int> allocate_time_steps(std::span<const double> interval_lengths, int total)
{
    const auto k = static_cast<int>(interval_lengths.size());
    if (k == 0)
        throw std::invalid_argument("no intervals to allocate time steps to");
    if (total < k)
        throw std::invalid_argument("time_steps must be at least the number of fixings");
    const double horizon = std::accumulate(interval_lengths.begin(), interval_lengths.end(), 0.0);

    std::vector<int> steps(static_cast<std::size_t>(k));
    std::vector<double> remainder(static_cast<std::size_t>(k));
    int used = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double ideal = total * interval_lengths[i] / horizon;
        steps[i] = std::max(1, static_cast<int>(std::floor(ideal)));
        remainder[i] = ideal - steps[i];
        used += steps[i];
    }
    std::vector<std::size_t> order(steps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Largest remainder first; ties go to the earlier interval.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; used < total; i = (i + 1) % order.size(), ++used)
        ++steps[order[i]];
    // Minimum-one bumps can overshoot; take back from the most over-served intervals.
    for (std::size_t i = order.size(); used > total;) {
        i = (i == 0 ? order.size() : i) - 1;
        if (steps[order[i]] > 1) {
            --steps[order[i]];
            --used;
        }
    }
    return steps;
}

FdGrid build_grid(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot)
{
    contract.validate();
    config.validate();
    if (!(spot > 0.0))
        throw std::invalid_argument("spot must be positive");

    FdGrid grid;
    const double maturity = contract.maturity();
    const double log_spot = std::log(spot);
    const double log_strike = std::log(contract.strike);
    const double half_width = config.domain_width_sigmas * representative_vol(model.vol, maturity) * std::sqrt(maturity);

    double lo = std::min(log_spot - half_width, log_strike - 0.1 * half_width);
    double hi = std::max(log_spot + half_width, log_strike + 0.1 * half_width);
    const double width = hi - lo;
    const int base_cells = config.spot_nodes - 1;
    const double dx_target = width / base_cells;

    // Base-level grid; refinement subdivides it so pinned nodes stay pinned.
    const double gap = std::abs(log_spot - log_strike);
    grid.pin_policy = config.pin_policy;
    double dx = dx_target;
    long spot_offset = 0; // spot index minus strike index, in base cells
    if (config.pin_policy == PinPolicy::StrikeAndSpot && gap > 0.0) {
        const double cells_between = std::floor(gap / dx_target);
        if (cells_between < 1.0) {
            grid.pin_policy = PinPolicy::StrikeOnlyThenInterpolate;
        } else {
            dx = gap / cells_between;
            spot_offset = static_cast<long>(cells_between) * (log_spot > log_strike ? 1 : -1);
        }
    }

    const double excess = base_cells * dx - width;
    const double first = lo - 0.5 * excess;
    long strike_base = std::lround((log_strike - first) / dx);
    strike_base = std::clamp<long>(strike_base, std::max(0L, -spot_offset), std::min<long>(base_cells, base_cells - spot_offset));

    const int scale = 1 << config.refinement;
    const Eigen::Index cells = static_cast<Eigen::Index>(base_cells) * scale;
    grid.dx = dx / scale;
    grid.strike_index = static_cast<Eigen::Index>(strike_base) * scale;
    grid.log_spots.resize(cells + 1);
    for (Eigen::Index i = 0; i <= cells; ++i)
        grid.log_spots(i) = log_strike + static_cast<double>(i - grid.strike_index) * grid.dx;
    grid.spots = grid.log_spots.array().exp();
    grid.spots(grid.strike_index) = contract.strike;
    if (grid.pin_policy == PinPolicy::StrikeAndSpot) {
        grid.spot_index = grid.strike_index + static_cast<Eigen::Index>(spot_offset) * scale;
        grid.spots(*grid.spot_index) = spot;
    }

    const Eigen::Index acc_cells = static_cast<Eigen::Index>(config.accumulation_nodes - 1) * scale;
    grid.h = contract.target / static_cast<double>(acc_cells);
    grid.accumulation.resize(acc_cells + 1);
    for (Eigen::Index j = 0; j < acc_cells; ++j)
        grid.accumulation(j) = static_cast<double>(j) * grid.h;
    grid.accumulation(acc_cells) = contract.target;

    grid.times.reserve(contract.fixing_count() + 1);
    grid.times.push_back(0.0);
    grid.times.insert(grid.times.end(), contract.fixing_times.begin(), contract.fixing_times.end());
    std::vector<double> lengths(contract.fixing_count());
    for (std::size_t k = 0; k < lengths.size(); ++k)
        lengths[k] = grid.times[k + 1] - grid.times[k];
    grid.steps = allocate_time_steps(lengths, config.time_steps);
    for (int& n : grid.steps)
        n *= scale;
    return grid;
}

} // namespace tarn::fd
