#pragma once

#include "tarn/contract.hpp"
#include "tarn/fd/grid.hpp"
#include "tarn/market.hpp"
#include "tarn/mc/engine.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tarn::cli {

/// Invalid configuration; maps to exit status 1.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

enum class OutputFormat { Human, Records };

/// Days between fixings and days per year of the reproduction preset.
inline constexpr double preset_fixing_interval_days = 30.0;
inline constexpr double preset_days_per_year = 365.0;

struct PricingCase
{
    KnockoutType knockout;
    double target;
};

struct RunConfig
{
    /// Strike, direction, schedule and extra payments; target and knockout come from each case.
    TarnContract contract;
    std::vector<KnockoutType> knockouts;
    std::vector<double> targets;
    double spot = 1.0;
    MarketModel model;
    std::string local_vol_file;

    bool run_fd = true;
    bool run_mc = false;
    fd::FdConfig fd;
    mc::McConfig mc;
    bool refine = false;
    bool convergence = false;

    OutputFormat format = OutputFormat::Human;
    std::string destination = "-";

    /// Knockout types in the outer loop, targets in the inner loop.
    std::vector<PricingCase> cases() const;
    TarnContract contract_for(const PricingCase& c) const;

    /// Throws ConfigError naming the field and the violated constraint.
    void validate() const;
};

/**
 * Parses the sectioned key-value format ([contract], [model], [engines],
 * [fd], [mc], [output]). Relative file references resolve against
 * `base_dir`. Unknown sections or keys are rejected.
 */
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Inputs of the published FD/MC comparison: 12 cases, both engines.
RunConfig table1_preset();

/// Stable hash of every pricing-relevant field (output settings excluded).
std::string fingerprint(const RunConfig& config);

} // namespace tarn::cli
