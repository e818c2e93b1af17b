#pragma once

#include "tarn/contract.hpp"
#include "tarn/market.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tarn::mc {

/// How the control-variate coefficient is chosen.
enum class CvCoefficient {
    Pilot, ///< regression estimate on the first pilot_fraction of paths, applied to the rest
    Unit,  ///< fixed at one
};

struct McConfig
{
    std::size_t paths = 200'000;
    std::uint64_t seed = 20130429;
    /// Log-Euler steps per fixing interval; only used by local volatility.
    int substeps = 1;
    bool control_variate = true;
    CvCoefficient coefficient = CvCoefficient::Pilot;
    double pilot_fraction = 0.1;

    void validate() const;
};

struct McResult
{
    double price = 0.0;
    double standard_error = 0.0;
    /// Zero when no control variate was applied.
    double cv_coefficient = 0.0;
    double seconds = 0.0;
    bool control_variate_applied = false;
    /// Control variate was requested but the model has no closed-form vanilla.
    bool control_variate_downgraded = false;
};

using RandomStream = std::mt19937_64;

/// Paths are drawn in fixed batches; batch b of a run always uses this stream.
inline constexpr std::size_t batch_size = 1024;
RandomStream batch_stream(std::uint64_t seed, std::size_t batch);

/**
 * Draws FX fixings under dS/S = (r_d - r_f) dt + sigma dW. Deterministic
 * volatility uses the exact lognormal transition between fixings; local
 * volatility uses log-Euler substeps with sigma frozen at each step start.
 */
class FixingPathSimulator
{
public:
    FixingPathSimulator(const MarketModel& model, double spot, std::span<const double> fixing_times, int substeps = 1);

    void simulate(RandomStream& rng, std::span<double> fixings) const;
    std::size_t fixing_count() const { return m_times.size(); }

private:
    const MarketModel* m_model;
    double m_log_spot;
    std::vector<double> m_times;
    bool m_exact;
    int m_substeps;
    std::vector<double> m_drift;   // exact: log drift per interval; local vol: (r_d - r_f) per substep
    std::vector<double> m_scale;   // exact: sqrt of integrated variance per interval
};

std::vector<double> simulate_fixing_path(const MarketModel& model, double spot, std::span<const double> fixing_times,
                                         RandomStream& rng, int substeps = 1);

/// Single-pass (Welford) running mean and variance.
class RunningStatistics
{
public:
    void add(double x)
    {
        ++m_count;
        const double delta = x - m_mean;
        m_mean += delta / static_cast<double>(m_count);
        m_m2 += delta * (x - m_mean);
    }
    std::size_t count() const { return m_count; }
    double mean() const { return m_mean; }
    double variance() const;
    double standard_error() const;

private:
    std::size_t m_count = 0;
    double m_mean = 0.0;
    double m_m2 = 0.0;
};

/// Sample standard deviation over sqrt(n); needs at least two samples.
double standard_error(std::span<const double> samples);

McResult mc_price(const TarnContract& contract, const MarketModel& model, const McConfig& config, double spot);

} // namespace tarn::mc
