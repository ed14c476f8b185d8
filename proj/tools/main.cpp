// Command-line front end: rsm <command> [--config PATH] [--seed N] [--out DIR]
//                                       [--threads N] [--thin N] [--set key=value]...
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsm/cli/commands.hpp"
#include "rsm/cli/config.hpp"

int main(int argc, char** argv)
{
    using namespace rsm::cli;

    CLI::App app{"Random slow manifolds and stochastic bifurcation of a slow-fast SDE"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::size_t> thin;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--thin", thin, "keep every N-th trajectory sample");
    app.add_option("--set", overrides, "override a config key (key=value, value as JSON)");

    app.add_subcommand("simulate", "trajectories of the full and reduced systems");
    app.add_subcommand("sweep", "equilibrium counts over the a values");
    app.add_subcommand("manifold", "manifold approximations vs the Lyapunov-Perron oracle");
    app.add_subcommand("oracle", "convergence order of the first-order manifold in eps");
    app.add_subcommand("verify-lift", "attraction of lifted reduced equilibria");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    RunConfig cfg;
    try
    {
        nlohmann::json doc = config_path.empty() ? nlohmann::json::object()
                                                 : load_config_file(config_path);
        for (auto const& o : overrides)
            apply_override(doc, o);
        if (seed)
            doc["seed"] = *seed;
        if (out)
            doc["out"] = *out;
        if (threads)
            doc["threads"] = *threads;
        if (thin)
            doc["thin"] = *thin;
        cfg = parse_config(doc);
    }
    catch (ConfigError const& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    return run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
