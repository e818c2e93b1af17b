#pragma once

#include "tarn/cli/config.hpp"
#include "tarn/fd/engine.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tarn::cli {

/**
 * One output row.
 *
 * engine is one of
 *   fd        price = FD price, error = refinement estimate (when requested)
 *   mc        price = MC estimate, error = standard error / price
 *   diff      price = (FD - MC) / MC, error = MC standard error / price
 *   fd_level  price = FD price on one grid of a convergence study
 *   fd_order  price = observed convergence order of the study
 * A failed engine gives a record with a NaN price and error_kind "failed".
 */
struct ResultRecord
{
    std::string engine;
    KnockoutType knockout = KnockoutType::FullGain;
    double target = 0.0;
    double price = 0.0;
    double error = 0.0;
    std::string error_kind = "none";
    double seconds = 0.0;
    std::string fingerprint;
    std::string detail;

    bool operator==(const ResultRecord&) const = default;
};

struct RunOutcome
{
    std::vector<ResultRecord> records;
    bool engine_failed = false;
};

struct RunHooks
{
    /// Called after every FD jump of every case (e.g. lattice dumps).
    fd::JumpObserver fd_observer;
};

RunOutcome run(const RunConfig& config, const RunHooks& hooks = {});

/// Human table (grouped by knockout type) or one JSON object per line.
std::string format_records(const std::vector<ResultRecord>& records, OutputFormat format);

/// Writes to `destination` ("-" for standard output). Throws on empty input or an unwritable path.
void emit(const std::vector<ResultRecord>& records, OutputFormat format, const std::string& destination);

/// Reads the machine format back.
std::vector<ResultRecord> read_records(std::istream& in);

} // namespace tarn::cli
