#pragma once

#include "tarn/fd/grid.hpp"
#include "tarn/fd/theta_scheme.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>

namespace tarn::fd {

/// Row j holds the solution tracked for accumulation node A_j.
using Lattice = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FdState
{
    Lattice values;
    double time = 0.0;
};

/**
 * Jump condition at fixing k: turns the lattice at t_k into the lattice at
 * t_k^- (immediately before the fixing).
 */
using JumpCondition = std::function<FdState(const FdState&, std::size_t, const TarnContract&, const FdGrid&)>;

/**
 * Forward jump. For every spot node the row values are splined in A once,
 * then each accumulation node pays its cash flow and continues from the
 * spline at the shifted amount A_j + payment; terminated states continue
 * from zero.
 */
FdState apply_jump(const FdState& state, std::size_t k, const TarnContract& contract, const FdGrid& grid);

/**
 * Forward jump with the step at the breach threshold S* = X + beta (U - A_j)
 * replaced by its average over the spot cell that contains it. The node of
 * that cell moves by (jump size) x (breaching fraction of the cell minus
 * one if the node itself breaches); where the post-fixing value is
 * continuous at S* nothing changes. Every other node matches apply_jump.
 */
FdState apply_smoothed_jump(const FdState& state, std::size_t k, const TarnContract& contract, const FdGrid& grid);

/// The jump condition selected by `config`.
JumpCondition jump_for(const FdConfig& config);

/// Observer called with the lattice right after each jump (k runs K..1).
using JumpObserver = std::function<void(std::size_t, const FdState&, const FdGrid&)>;

struct FdResult
{
    double price = 0.0;
    double seconds = 0.0;
    Eigen::Index spot_nodes = 0;
    Eigen::Index accumulation_nodes = 0;
    int time_steps = 0;
    PinPolicy pin_policy = PinPolicy::StrikeAndSpot;
};

FdResult fd_price(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot);

/// Same pipeline with a caller-supplied jump condition and an optional observer.
FdResult fd_price_with(const TarnContract& contract, const MarketModel& model, const FdConfig& config, double spot,
                       const JumpCondition& jump, const JumpObserver& observer = {});

struct ErrorEstimate
{
    double coarse = 0.0;
    double refined = 0.0;
    double relative_error = 0.0;
    double seconds = 0.0;
};

/// |coarse - refined| / |refined|; throws std::domain_error when refined == 0.
double relative_refinement_error(double coarse, double refined);

/// Prices on the configured grid and on the grid with every cell count doubled.
ErrorEstimate estimate_error(const TarnContract& contract, const MarketModel& model, const FdConfig& config,
                             double spot);

struct ConvergenceStudy
{
    std::array<double, 3> prices{};
    double order = 0.0;
    double seconds = 0.0;
};

/// log2(|v1 - v2| / |v2 - v3|); throws std::domain_error when v2 == v3.
double observed_order(double coarse, double medium, double fine);

ConvergenceStudy convergence_order(const TarnContract& contract, const MarketModel& model, const FdConfig& base,
                                   double spot);

/// Plain-text dump: a header line with the spot nodes, then one line per accumulation node.
void write_lattice(std::ostream& out, const FdState& state, const FdGrid& grid);

/// Observer writing one lattice file per fixing date into `directory`.
JumpObserver lattice_dumper(std::filesystem::path directory);

} // namespace tarn::fd
