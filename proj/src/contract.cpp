#include "tarn/contract.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tarn {

std::string_view to_string(KnockoutType type)
{
    switch (type) {
    case KnockoutType::FullGain: return "full_gain";
    case KnockoutType::NoGain: return "no_gain";
    case KnockoutType::PartGain: return "part_gain";
    }
    return "unknown";
}

KnockoutType parse_knockout(std::string_view text)
{
    std::string key;
    for (char c : text)
        if (c != '_' && c != '-' && c != ' ')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "fullgain" || key == "full")
        return KnockoutType::FullGain;
    if (key == "nogain" || key == "no")
        return KnockoutType::NoGain;
    if (key == "partgain" || key == "part")
        return KnockoutType::PartGain;
    throw std::invalid_argument("unknown knockout type '" + std::string(text) + "'");
}

void TarnContract::validate() const
{
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw std::invalid_argument("strike must be positive");
    if (!(target > 0.0))
        throw std::invalid_argument("target must be positive");
    if (fixing_times.empty())
        throw std::invalid_argument("fixing_times must contain at least one fixing");
    double prev = 0.0;
    for (double t : fixing_times) {
        if (!(t > prev) || !std::isfinite(t))
            throw std::invalid_argument("fixing_times must be positive and strictly increasing");
        prev = t;
    }
    if (!extra_payments.empty() && extra_payments.size() != fixing_times.size())
        throw std::invalid_argument("extra_payments length mismatch: expected " +
                                    std::to_string(fixing_times.size()) + " entries, got " +
                                    std::to_string(extra_payments.size()));
    for (double c : extra_payments)
        if (!std::isfinite(c))
            throw std::invalid_argument("extra_payments must be finite");
}

double raw_cash_flow(double spot, const TarnContract& contract)
{
    const double b = sign(contract.beta);
    return b * spot >= b * contract.strike ? b * (spot - contract.strike) : 0.0;
}

namespace {

CashFlowOutcome outcome_for(double flow, bool breach, double accumulated, std::size_t k,
                            const TarnContract& contract)
{
    const double extra = contract.extra_payment(k);
    CashFlowOutcome out;
    if (!breach) {
        out.payment = flow;
        out.extra_payment = extra;
    } else {
        out.terminated = true;
        switch (contract.knockout) {
        case KnockoutType::FullGain:
            out.payment = flow;
            out.extra_payment = extra;
            break;
        case KnockoutType::PartGain:
            // flow > 0 on every breach of a live state, so the weight is well defined.
            out.payment = contract.target - accumulated;
            out.extra_payment = extra == 0.0 ? 0.0 : extra * (out.payment / flow);
            break;
        case KnockoutType::NoGain:
            break;
        }
    }
    out.accumulation_increment = out.payment;
    return out;
}

} // namespace

CashFlowOutcome fixing_outcome(double spot, double accumulated, std::size_t k, const TarnContract& contract)
{
    if (accumulated < 0.0)
        throw std::invalid_argument("accumulated amount must be non-negative");
    if (accumulated >= contract.target)
        throw std::invalid_argument("accumulated amount has reached the target: state is dead");
    if (k < 1 || k > contract.fixing_count())
        throw std::out_of_range("fixing index out of range");
    const double flow = raw_cash_flow(spot, contract);
    return outcome_for(flow, accumulated + flow >= contract.target, accumulated, k, contract);
}

namespace detail {

CashFlowOutcome fixing_outcome_limit(double spot, double accumulated, std::size_t k, const TarnContract& contract)
{
    if (accumulated < contract.target)
        return fixing_outcome(spot, accumulated, k, contract);
    const double flow = raw_cash_flow(spot, contract);
    return outcome_for(flow, flow > 0.0, contract.target, k, contract);
}

CashFlowOutcome breaching_outcome(double accumulated, std::size_t k, const TarnContract& contract)
{
    if (accumulated < 0.0 || accumulated > contract.target)
        throw std::invalid_argument("accumulated amount outside [0, target]");
    const double remaining = contract.target - accumulated;
    auto out = outcome_for(remaining, true, accumulated, k, contract);
    // With nothing left to pay the part-gain weight (target - A) / flow tends to zero.
    if (remaining == 0.0 && contract.knockout == KnockoutType::PartGain)
        out.extra_payment = 0.0;
    return out;
}

} // namespace detail

double path_present_value(std::span<const double> fixings, const TarnContract& contract,
                          std::span<const double> discounts)
{
    double accumulated = 0.0;
    double pv = 0.0;
    for (std::size_t i = 0; i < fixings.size(); ++i) {
        const auto out = fixing_outcome(fixings[i], accumulated, i + 1, contract);
        pv += discounts[i] * (out.payment + out.extra_payment);
        if (out.terminated)
            break;
        accumulated += out.accumulation_increment;
    }
    return pv;
}

} // namespace tarn
