#include "tarn/mc/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tarn::mc {

void McConfig::validate() const
{
    if (paths < 2)
        throw std::invalid_argument("paths must be at least 2");
    if (substeps < 1)
        throw std::invalid_argument("substeps must be at least 1");
    if (!(pilot_fraction > 0.0 && pilot_fraction < 1.0))
        throw std::invalid_argument("pilot_fraction must lie in (0, 1)");
}

RandomStream batch_stream(std::uint64_t seed, std::size_t batch)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(std::uint64_t{batch} >> 32)};
    return RandomStream(seq);
}

FixingPathSimulator::FixingPathSimulator(const MarketModel& model, double spot, std::span<const double> fixing_times,
                                         int substeps)
    : m_model(&model), m_log_spot(std::log(spot)), m_times(fixing_times.begin(), fixing_times.end()),
      m_exact(has_exact_transition(model.vol)), m_substeps(m_exact ? 1 : substeps)
{
    if (!(spot > 0.0))
        throw std::invalid_argument("spot must be positive");
    if (substeps < 1)
        throw std::invalid_argument("substeps must be at least 1");
    double prev = 0.0;
    for (double t : m_times) {
        if (m_exact) {
            const double variance = integrated_variance(model.vol, prev, t);
            m_drift.push_back(model.domestic.integral(prev, t) - model.foreign.integral(prev, t) - 0.5 * variance);
            m_scale.push_back(std::sqrt(variance));
        } else {
            const double dt = (t - prev) / m_substeps;
            for (int s = 0; s < m_substeps; ++s) {
                const double a = prev + s * dt;
                const double b = s + 1 == m_substeps ? t : a + dt;
                m_drift.push_back(model.domestic.integral(a, b) - model.foreign.integral(a, b));
            }
        }
        prev = t;
    }
}

void FixingPathSimulator::simulate(RandomStream& rng, std::span<double> fixings) const
{
    if (fixings.size() != m_times.size())
        throw std::invalid_argument("fixing buffer size does not match the schedule");
    std::normal_distribution<double> normal;
    double x = m_log_spot;
    if (m_exact) {
        for (std::size_t k = 0; k < m_times.size(); ++k) {
            x += m_drift[k] + m_scale[k] * normal(rng);
            fixings[k] = std::exp(x);
        }
        return;
    }
    double prev = 0.0;
    std::size_t step = 0;
    for (std::size_t k = 0; k < m_times.size(); ++k) {
        const double dt = (m_times[k] - prev) / m_substeps;
        for (int s = 0; s < m_substeps; ++s, ++step) {
            const double sigma = local_vol_at(m_model->vol, std::exp(x), prev + s * dt);
            x += m_drift[step] - 0.5 * sigma * sigma * dt + sigma * std::sqrt(dt) * normal(rng);
        }
        fixings[k] = std::exp(x);
        prev = m_times[k];
    }
}

std::vector<double> simulate_fixing_path(const MarketModel& model, double spot, std::span<const double> fixing_times,
                                         RandomStream& rng, int substeps)
{
    std::vector<double> out(fixing_times.size());
    FixingPathSimulator(model, spot, fixing_times, substeps).simulate(rng, out);
    return out;
}

double RunningStatistics::variance() const
{
    if (m_count < 2)
        throw std::invalid_argument("variance needs at least two samples");
    return m_m2 / static_cast<double>(m_count - 1);
}

double RunningStatistics::standard_error() const { return std::sqrt(variance() / static_cast<double>(m_count)); }

double standard_error(std::span<const double> samples)
{
    RunningStatistics stats;
    for (double x : samples)
        stats.add(x);
    return stats.standard_error();
}

McResult mc_price(const TarnContract& contract, const MarketModel& model, const McConfig& config, double spot)
{
    const auto start = std::chrono::steady_clock::now();
    contract.validate();
    config.validate();
    validate(model.vol);

    const std::size_t k_count = contract.fixing_count();
    std::vector<double> discounts(k_count);
    for (std::size_t k = 0; k < k_count; ++k)
        discounts[k] = discount_factor(model.domestic, 0.0, contract.fixing_times[k]);

    McResult result;
    const bool use_cv = config.control_variate && has_exact_transition(model.vol);
    result.control_variate_downgraded = config.control_variate && !use_cv;
    result.control_variate_applied = use_cv;

    const FixingPathSimulator simulator(model, spot, contract.fixing_times, config.substeps);
    std::vector<double> payoff(config.paths);
    std::vector<double> control(use_cv ? config.paths : 0);
    std::vector<double> fixings(k_count);
    for (std::size_t first = 0, batch = 0; first < config.paths; first += batch_size, ++batch) {
        RandomStream rng = batch_stream(config.seed, batch);
        const std::size_t last = std::min(config.paths, first + batch_size);
        for (std::size_t i = first; i < last; ++i) {
            simulator.simulate(rng, fixings);
            payoff[i] = path_present_value(fixings, contract, discounts);
            if (use_cv) {
                double sum = 0.0;
                for (std::size_t k = 0; k < k_count; ++k)
                    sum += discounts[k] * raw_cash_flow(fixings[k], contract);
                control[i] = sum;
            }
        }
    }

    RunningStatistics estimate;
    if (!use_cv) {
        for (double p : payoff)
            estimate.add(p);
    } else {
        double control_mean = 0.0;
        for (double t : contract.fixing_times)
            control_mean += vanilla_price(spot, contract.strike, contract.beta, t, model);

        std::size_t begin = 0;
        double lambda = 1.0;
        if (config.coefficient == CvCoefficient::Pilot) {
            const auto pilot = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::floor(config.pilot_fraction * static_cast<double>(config.paths))));
            if (config.paths - pilot >= 2) {
                // Two-pass covariance over the pilot block.
                double mp = 0.0, mc = 0.0;
                for (std::size_t i = 0; i < pilot; ++i) {
                    mp += payoff[i];
                    mc += control[i];
                }
                mp /= static_cast<double>(pilot);
                mc /= static_cast<double>(pilot);
                double cov = 0.0, var = 0.0;
                for (std::size_t i = 0; i < pilot; ++i) {
                    cov += (payoff[i] - mp) * (control[i] - mc);
                    var += (control[i] - mc) * (control[i] - mc);
                }
                lambda = var > 0.0 ? cov / var : 0.0;
                begin = pilot;
            }
        }
        for (std::size_t i = begin; i < config.paths; ++i)
            estimate.add(payoff[i] - lambda * (control[i] - control_mean));
        result.cv_coefficient = lambda;
    }
    result.price = estimate.mean();
    result.standard_error = estimate.standard_error();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace tarn::mc
