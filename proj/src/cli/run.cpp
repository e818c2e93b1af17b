#include "tarn/cli/run.hpp"

#include "tarn/mc/engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace tarn::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string grid_label(const fd::FdConfig& c)
{
    return std::to_string(c.refined_spot_nodes()) + "x" + std::to_string(c.refined_accumulation_nodes()) + "x" +
           std::to_string(c.refined_time_steps());
}

ResultRecord failure(std::string engine, const PricingCase& c, const std::string& fp, const std::exception& e)
{
    return ResultRecord{std::move(engine), c.knockout, c.target, nan, nan, "failed", 0.0, fp, e.what()};
}

} // namespace

RunOutcome run(const RunConfig& config, const RunHooks& hooks)
{
    config.validate();
    const std::string fp = fingerprint(config);
    RunOutcome outcome;
    auto& out = outcome.records;

    for (const auto& c : config.cases()) {
        const TarnContract contract = config.contract_for(c);
        std::optional<double> fd_value;
        std::optional<mc::McResult> mc_value;

        if (config.run_fd) {
            try {
                if (config.convergence) {
                    fd::FdConfig level = config.fd;
                    const auto study = fd::convergence_order(contract, config.model, config.fd, config.spot);
                    for (std::size_t i = 0; i < study.prices.size(); ++i) {
                        level.refinement = config.fd.refinement + static_cast<int>(i);
                        out.push_back({"fd_level", c.knockout, c.target, study.prices[i], nan, "none", 0.0, fp,
                                       "grid=" + grid_label(level)});
                    }
                    out.push_back({"fd_order", c.knockout, c.target, study.order, nan, "none", study.seconds, fp,
                                   "grids=3"});
                    fd_value = study.prices[0];
                } else if (config.refine) {
                    fd::FdConfig refined = config.fd;
                    refined.refinement += 1;
                    const auto est = fd::estimate_error(contract, config.model, config.fd, config.spot);
                    std::ostringstream detail;
                    detail << std::setprecision(17) << "grid=" << grid_label(config.fd)
                           << ";refined_grid=" << grid_label(refined) << ";refined_price=" << est.refined;
                    out.push_back({"fd", c.knockout, c.target, est.coarse, est.relative_error, "refine_rel",
                                   est.seconds, fp, detail.str()});
                    fd_value = est.coarse;
                } else {
                    const auto r = fd::fd_price_with(contract, config.model, config.fd, config.spot,
                                                     fd::jump_for(config.fd),
                                                     hooks.fd_observer);
                    out.push_back({"fd", c.knockout, c.target, r.price, nan, "none", r.seconds, fp,
                                   "grid=" + grid_label(config.fd)});
                    fd_value = r.price;
                }
            } catch (const std::exception& e) {
                out.push_back(failure("fd", c, fp, e));
                outcome.engine_failed = true;
            }
        }

        if (config.run_mc) {
            try {
                const auto r = mc::mc_price(contract, config.model, config.mc, config.spot);
                std::ostringstream detail;
                detail << std::setprecision(17) << "paths=" << config.mc.paths << ";stderr=" << r.standard_error
                       << ";cv_coefficient=" << r.cv_coefficient;
                if (r.control_variate_downgraded)
                    detail << ";warning=control variate unavailable for local volatility";
                out.push_back({"mc", c.knockout, c.target, r.price, r.standard_error / r.price, "stderr_rel",
                               r.seconds, fp, detail.str()});
                mc_value = r;
            } catch (const std::exception& e) {
                out.push_back(failure("mc", c, fp, e));
                outcome.engine_failed = true;
            }
        }

        if (fd_value && mc_value)
            out.push_back({"diff", c.knockout, c.target, (*fd_value - mc_value->price) / mc_value->price,
                           mc_value->standard_error / mc_value->price, "stderr_rel", 0.0, fp, ""});
    }
    return outcome;
}

namespace {

const char* knockout_heading(KnockoutType k)
{
    switch (k) {
    case KnockoutType::NoGain: return "No gain";
    case KnockoutType::PartGain: return "Part gain";
    case KnockoutType::FullGain: return "Full gain";
    }
    return "";
}

std::string fixed(double v, int digits)
{
    if (!std::isfinite(v))
        return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string percent(double v, int digits) { return std::isfinite(v) ? fixed(100.0 * v, digits) + "%" : "-"; }

std::string human_table(const std::vector<ResultRecord>& records)
{
    struct Row
    {
        double mc = nan, fd = nan, diff = nan, stderr_rel = nan, mc_sec = nan, err_fd = nan, fd_sec = nan;
        std::string failure;
    };
    // Preserve the first-seen order of knockouts and targets.
    std::vector<KnockoutType> knockouts;
    std::map<KnockoutType, std::vector<double>> targets;
    std::map<std::pair<KnockoutType, double>, Row> rows;
    std::vector<const ResultRecord*> convergence;
    for (const auto& r : records) {
        if (r.engine == "fd_level" || r.engine == "fd_order") {
            convergence.push_back(&r);
            continue;
        }
        if (std::find(knockouts.begin(), knockouts.end(), r.knockout) == knockouts.end())
            knockouts.push_back(r.knockout);
        auto& ts = targets[r.knockout];
        if (std::find(ts.begin(), ts.end(), r.target) == ts.end())
            ts.push_back(r.target);
        auto& row = rows[{r.knockout, r.target}];
        if (r.error_kind == "failed")
            row.failure += r.engine + " failed: " + r.detail + " ";
        else if (r.engine == "fd") {
            row.fd = r.price;
            row.err_fd = r.error;
            row.fd_sec = r.seconds;
        } else if (r.engine == "mc") {
            row.mc = r.price;
            row.stderr_rel = r.error;
            row.mc_sec = r.seconds;
        } else if (r.engine == "diff") {
            row.diff = r.price;
        }
    }

    std::ostringstream out;
    out << std::left;
    const int w = 12;
    if (!rows.empty()) {
        for (const char* h : {"target", "MC", "FD", "diff %", "stderr MC %", "MC sec", "err FD %", "FD sec"})
            out << std::setw(w) << h;
        out << '\n';
        for (auto k : knockouts) {
            out << "-- " << knockout_heading(k) << " --\n";
            for (double t : targets[k]) {
                const auto& row = rows[{k, t}];
                out << std::setw(w) << fixed(t, 2) << std::setw(w) << fixed(row.mc, 4) << std::setw(w)
                    << fixed(row.fd, 4) << std::setw(w) << percent(row.diff, 4) << std::setw(w)
                    << percent(row.stderr_rel, 2) << std::setw(w) << fixed(row.mc_sec, 2) << std::setw(w)
                    << percent(row.err_fd, 3) << std::setw(w) << fixed(row.fd_sec, 2);
                if (!row.failure.empty())
                    out << row.failure;
                out << '\n';
            }
        }
    }
    if (!convergence.empty()) {
        out << "-- FD convergence study --\n";
        for (const auto* r : convergence) {
            out << std::setw(w) << knockout_heading(r->knockout) << std::setw(w) << fixed(r->target, 2);
            if (r->engine == "fd_level")
                out << std::setw(24) << r->detail << fixed(r->price, 8) << '\n';
            else
                out << std::setw(24) << "observed order" << fixed(r->price, 3) << '\n';
        }
    }
    return out.str();
}

nlohmann::ordered_json to_json(const ResultRecord& r)
{
    auto number = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    return {{"engine", r.engine},
            {"knockout", std::string(to_string(r.knockout))},
            {"target", r.target},
            {"price", number(r.price)},
            {"error", number(r.error)},
            {"error_kind", r.error_kind},
            {"seconds", r.seconds},
            {"fingerprint", r.fingerprint},
            {"detail", r.detail}};
}

} // namespace

std::string format_records(const std::vector<ResultRecord>& records, OutputFormat format)
{
    if (records.empty())
        throw std::invalid_argument("no records to emit");
    if (format == OutputFormat::Human)
        return human_table(records);
    std::string out;
    for (const auto& r : records)
        out += to_json(r).dump() + '\n';
    return out;
}

void emit(const std::vector<ResultRecord>& records, OutputFormat format, const std::string& destination)
{
    const std::string text = format_records(records, format);
    if (destination == "-" || destination.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(destination);
    if (!out)
        throw std::runtime_error("cannot write output to " + destination);
    out << text;
    if (!out)
        throw std::runtime_error("write failed for " + destination);
}

std::vector<ResultRecord> read_records(std::istream& in)
{
    std::vector<ResultRecord> records;
    std::string line;
    auto number = [](const nlohmann::json& j) { return j.is_null() ? nan : j.get<double>(); };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        ResultRecord r;
        r.engine = j.at("engine").get<std::string>();
        r.knockout = parse_knockout(j.at("knockout").get<std::string>());
        r.target = j.at("target").get<double>();
        r.price = number(j.at("price"));
        r.error = number(j.at("error"));
        r.error_kind = j.at("error_kind").get<std::string>();
        r.seconds = j.at("seconds").get<double>();
        r.fingerprint = j.at("fingerprint").get<std::string>();
        r.detail = j.at("detail").get<std::string>();
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace tarn::cli
