#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace tarn {

/// Rule applied to the payment on the fixing date where the target is breached.
enum class KnockoutType { FullGain, NoGain, PartGain };

std::string_view to_string(KnockoutType type);
KnockoutType parse_knockout(std::string_view text);

/// Buy (+1) or sell (-1) the foreign currency at the strike.
enum class Direction : int { Buy = 1, Sell = -1 };

inline double sign(Direction d) { return static_cast<double>(static_cast<int>(d)); }

/**
 * Target accumulation redemption note on an FX rate.
 *
 * All amounts are per unit of foreign notional. Fixing times are year
 * fractions measured from today.
 */
struct TarnContract
{
    double strike = 1.0;
    double target = 1.0;
    Direction beta = Direction::Buy;
    std::vector<double> fixing_times;
    KnockoutType knockout = KnockoutType::FullGain;
    /// Extra payment per fixing. Empty means none; otherwise one entry per fixing.
    std::vector<double> extra_payments;

    std::size_t fixing_count() const { return fixing_times.size(); }
    double maturity() const { return fixing_times.back(); }
    double extra_payment(std::size_t k) const { return extra_payments.empty() ? 0.0 : extra_payments[k - 1]; }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// What happens at one fixing date for a live state.
struct CashFlowOutcome
{
    double payment = 0.0;
    double extra_payment = 0.0;
    double accumulation_increment = 0.0;
    bool terminated = false;
};

/// beta * (S - X) when in the money, otherwise zero.
double raw_cash_flow(double spot, const TarnContract& contract);

/**
 * Cash flow at fixing k (1-based) for a state that has accumulated
 * `accumulated` so far. The state must be live: 0 <= accumulated < target.
 */
CashFlowOutcome fixing_outcome(double spot, double accumulated, std::size_t k, const TarnContract& contract);

namespace detail {
// Same as fixing_outcome but also accepts accumulated == target, read as the
// limit from below: only a strictly positive flow breaches there.
CashFlowOutcome fixing_outcome_limit(double spot, double accumulated, std::size_t k, const TarnContract& contract);

// Outcome as the raw flow decreases to target - accumulated, i.e. on the
// breaching side of the threshold spot.
CashFlowOutcome breaching_outcome(double accumulated, std::size_t k, const TarnContract& contract);
} // namespace detail

/// Discounted sum of all cash flows along one realisation of the fixings.
double path_present_value(std::span<const double> fixings, const TarnContract& contract,
                          std::span<const double> discounts);

} // namespace tarn
