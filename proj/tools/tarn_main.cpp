// tarn: price TARN FX notes with the FD and MC engines.
//
// Exit status: 0 success, 1 invalid input, 2 engine failure.

#include "tarn/cli/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_engine = 2;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"TARN FX pricer (finite differences and Monte Carlo)", "tarn"};
    app.require_subcommand(1);

    auto* price = app.add_subcommand("price", "Price the cases of a config file or preset");
    std::string config_path;
    std::string preset;
    std::string engines;
    std::string output;
    std::string format;
    std::string dump_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    bool refine = false;
    bool convergence = false;

    price->add_option("config", config_path, "Config file ([contract], [model], [engines], [fd], [mc], [output])")
        ->check(CLI::ExistingFile);
    price->add_option("--preset", preset, "Built-in input set")->check(CLI::IsMember({"table1"}));
    price->add_option("--engines", engines, "Comma-separated engines: fd, mc");
    price->add_flag("--refine", refine, "Estimate the FD error by one grid refinement");
    price->add_flag("--convergence", convergence, "Run a three-grid FD convergence study");
    price->add_option("--seed", seed, "MC seed");
    price->add_option("--paths", paths, "MC path count");
    price->add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "records"}));
    price->add_option("--output", output, "Output path ('-' for stdout)");
    price->add_option("--dump-lattice", dump_dir, "Write the FD lattice after every fixing to this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    using namespace tarn::cli;
    RunConfig config;
    try {
        if (config_path.empty() == preset.empty())
            throw ConfigError("give exactly one of a config file or --preset");
        config = preset.empty() ? load_config(config_path) : table1_preset();
        if (!engines.empty()) {
            config.run_fd = config.run_mc = false;
            for (const auto& e : CLI::detail::split(engines, ',')) {
                const auto name = CLI::detail::trim_copy(e);
                if (name == "fd")
                    config.run_fd = true;
                else if (name == "mc")
                    config.run_mc = true;
                else
                    throw ConfigError("--engines: unknown engine '" + name + "'");
            }
        }
        config.refine = config.refine || refine;
        config.convergence = config.convergence || convergence;
        if (seed)
            config.mc.seed = *seed;
        if (paths)
            config.mc.paths = *paths;
        if (!format.empty())
            config.format = format == "human" ? OutputFormat::Human : OutputFormat::Records;
        if (!output.empty())
            config.destination = output;
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "tarn: " << e.what() << '\n';
        return exit_invalid;
    }

    try {
        RunHooks hooks;
        if (!dump_dir.empty())
            hooks.fd_observer = tarn::fd::lattice_dumper(dump_dir);
        const auto outcome = run(config, hooks);
        emit(outcome.records, config.format, config.destination);
        if (outcome.engine_failed) {
            for (const auto& r : outcome.records)
                if (r.error_kind == "failed")
                    std::cerr << "tarn: " << r.engine << " failed for " << to_string(r.knockout) << " U=" << r.target
                              << ": " << r.detail << '\n';
            return exit_engine;
        }
    } catch (const ConfigError& e) {
        std::cerr << "tarn: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "tarn: " << e.what() << '\n';
        return exit_engine;
    }
    return exit_ok;
}
