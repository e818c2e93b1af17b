#pragma once

#include "tarn/contract.hpp"
#include "tarn/market.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace tarn::fd {

enum class PinPolicy { StrikeAndSpot, StrikeOnlyThenInterpolate };
enum class BoundaryCondition { ZeroGamma, DirichletNeumannByDirection };

struct FdConfig
{
    int spot_nodes = 500;
    int accumulation_nodes = 100;
    int time_steps = 500;
    double theta = 0.5;
    /// Half-width of the log-spot domain in units of sigma * sqrt(T).
    double domain_width_sigmas = 5.0;
    PinPolicy pin_policy = PinPolicy::StrikeAndSpot;
    BoundaryCondition boundary = BoundaryCondition::ZeroGamma;
    /// Each level doubles the cell count in spot, accumulation and time while
    /// keeping every coarse node (and so the pinned points) on the grid.
    int refinement = 0;
    /// Replace the first step after each jump by two fully implicit half steps.
    bool implicit_startup = false;
    /// Cell-average the post-jump values in the one spot cell per row that
    /// straddles the breach threshold instead of sampling them pointwise.
    bool smooth_jumps = true;

    void validate() const;
    int refined_spot_nodes() const { return (spot_nodes - 1) * (1 << refinement) + 1; }
    int refined_accumulation_nodes() const { return (accumulation_nodes - 1) * (1 << refinement) + 1; }
    int refined_time_steps() const { return time_steps * (1 << refinement); }
};

struct FdGrid
{
    Eigen::VectorXd log_spots;
    /// exp(log_spots) with the pinned nodes set to the exact strike and spot.
    Eigen::VectorXd spots;
    double dx = 0.0;
    Eigen::VectorXd accumulation;
    double h = 0.0;
    Eigen::Index strike_index = 0;
    std::optional<Eigen::Index> spot_index;
    PinPolicy pin_policy = PinPolicy::StrikeAndSpot;
    /// t_0 = 0 followed by the fixing times.
    std::vector<double> times;
    /// Steps in (times[k-1], times[k]] stored at index k-1.
    std::vector<int> steps;

    Eigen::Index spot_count() const { return log_spots.size(); }
    Eigen::Index accumulation_count() const { return accumulation.size(); }
};

/// Splits `total` steps over the intervals proportionally to length, at least one each.
std::vector<int> allocate_time_steps(std::span<const double> interval_lengths, int total);

FdGrid build_grid(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot);

} // namespace tarn::fd
