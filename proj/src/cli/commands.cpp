#include "rsm/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include "rsm/cli/output.hpp"
#include "rsm/manifold.hpp"
#include "rsm/parallel.hpp"
#include "rsm/reduction.hpp"
#include "rsm/report.hpp"

namespace rsm::cli {
namespace {

using nlohmann::json;

// Settings that do not change results are left out so that manifests are
// identical across output directories and thread counts.
json reproducible_config(RunConfig const& cfg)
{
    auto doc = to_json(cfg);
    doc.erase("out");
    doc.erase("threads");
    return doc;
}

void finish(OutputSet& files, std::string const& command, RunConfig const& cfg, json extra,
            std::ostream& log)
{
    json manifest = {{"command", command}, {"config", reproducible_config(cfg)}};
    auto names = files.names();
    names.push_back("manifest.json");
    manifest["files"] = names;
    for (auto& [key, value] : extra.items())
        manifest[key] = value;
    files.add("manifest.json", manifest.dump(2) + "\n");
    files.commit();
    log << "wrote " << names.size() << " files to " << files.dir().string() << "\n";
}

SimulateOptions simulate_options(RunConfig const& cfg, SystemKind kind)
{
    SimulateOptions opts;
    opts.scheme = kind == SystemKind::full ? cfg.detection.full_scheme : cfg.detection.reduced_scheme;
    opts.newton = cfg.detection.newton;
    opts.window = cfg.detection.escape_window;
    opts.thin = cfg.thin;
    return opts;
}

}  // namespace

void cmd_simulate(RunConfig const& cfg, std::ostream& log)
{
    OutputSet files(cfg.out);
    files.prepare();

    auto const& det = cfg.detection;
    SystemParams const p = cfg.params;
    double const horizon = det.horizon_for(p.a);
    auto const path = make_path(cfg.seed, 0.0, horizon, det.dt);
    auto const d0 = init_stationary(cfg.seed, p.sigma, det.init);
    auto const full_opts = simulate_options(cfg, SystemKind::full);
    auto const reduced_opts = simulate_options(cfg, SystemKind::reduced);

    std::size_t const n = det.initial_x.size();
    std::vector<Trajectory<2>> full(n);
    std::vector<Trajectory<1>> reduced(n);
    parallel_for(2 * n, cfg.threads, [&](std::size_t task) {
        std::size_t const i = task / 2;
        double const x0 = det.initial_x[i];
        if (task % 2 == 0)
            full[i] = simulate(ExampleSystem(p), Vec<2>(x0, det.initial_y), path, d0, full_opts);
        else
            reduced[i] = simulate(ReducedSystem(p), Vec<1>(x0), path, d0, reduced_opts);
    });

    json summary = json::array();
    for (std::size_t i = 0; i < n; ++i)
    {
        files.add("full_" + std::to_string(i) + ".csv", full_trajectory_csv(full[i]));
        files.add("reduced_" + std::to_string(i) + ".csv", reduced_trajectory_csv(reduced[i]));
        summary.push_back({{"index", i},
                           {"x0", det.initial_x[i]},
                           {"full_final_x", full[i].states.back()[0]},
                           {"full_divergent", full[i].divergent},
                           {"reduced_final_x", reduced[i].states.back()[0]},
                           {"reduced_divergent", reduced[i].divergent}});
        log << "x0=" << format_number(det.initial_x[i])
            << "  full x(T)=" << format_number(full[i].states.back()[0])
            << (full[i].divergent ? " (divergent)" : "")
            << "  reduced x(T)=" << format_number(reduced[i].states.back()[0])
            << (reduced[i].divergent ? " (divergent)" : "") << "\n";
    }
    if (cfg.write_path)
        files.add("path.csv", path_csv(path));
    finish(files, "simulate", cfg, {{"horizon", horizon}, {"trajectories", summary}}, log);
}

void cmd_sweep(RunConfig const& cfg, std::ostream& log)
{
    OutputSet files(cfg.out);
    files.prepare();

    auto const report = sweep(cfg.a_values, cfg.params, cfg.detection, cfg.seed, cfg.threads);
    for (auto const& e : report.sweep)
    {
        log << "a=" << format_number(e.a) << "  full=" << e.full.count << " ("
            << to_string(e.full.status) << ")  reduced=" << e.reduced.count << " ("
            << to_string(e.reduced.status) << ")  max position gap="
            << format_number(e.max_position_gap) << "\n";
    }
    files.add("bifurcation.json", to_json(report).dump(2) + "\n");
    files.add("bifurcation.csv", to_csv(report));
    finish(files, "sweep", cfg, json::object(), log);
}

void cmd_manifold(RunConfig const& cfg, std::ostream& log)
{
    OutputSet files(cfg.out);
    files.prepare();

    auto const history = PathHistory::make(cfg.seed, cfg.params.sigma, cfg.lp);
    auto const& d0 = history.present();
    std::ostringstream csv;
    csv << "xi,h0,h1,oracle\n";
    double worst = 0.0;
    json failures = json::array();
    for (double xi : cfg.xi_grid)
    {
        double oracle = std::numeric_limits<double>::quiet_NaN();
        try
        {
            oracle = lp_oracle(xi, history, cfg.params, cfg.lp).value;
        }
        catch (LPOracleError const& e)
        {
            failures.push_back({{"xi", xi}, {"error", e.what()}});
            log << "xi=" << format_number(xi) << ": " << e.what() << "\n";
        }
        double const h1 = h_order1(xi, d0, cfg.params);
        if (std::isfinite(oracle))
            worst = std::max(worst, std::abs(h1 - oracle));
        csv << format_number(xi) << ',' << format_number(h_order0(xi, d0.z)) << ','
            << format_number(h1) << ',' << format_number(oracle) << '\n';
    }
    log << "max |h1 - oracle| = " << format_number(worst) << "\n";
    files.add("manifold.csv", csv.str());
    finish(files, "manifold", cfg,
           {{"max_abs_h1_minus_oracle", worst},
            {"driving_at_0", {{"z", d0.z}, {"J", d0.J}, {"I", d0.I}}},
            {"oracle_failures", failures}},
           log);
}

void cmd_oracle(RunConfig const& cfg, std::ostream& log)
{
    OutputSet files(cfg.out);
    files.prepare();

    auto const check = manifold_order_check(cfg.eps_values, cfg.xi_grid, cfg.params, cfg.lp, cfg.seed);
    std::ostringstream csv;
    csv << "eps,max_abs_error\n";
    for (std::size_t i = 0; i < check.eps.size(); ++i)
    {
        csv << format_number(check.eps[i]) << ',' << format_number(check.max_error[i]) << '\n';
        log << "eps=" << format_number(check.eps[i])
            << "  max |h1 - oracle| = " << format_number(check.max_error[i]) << "\n";
    }
    log << "empirical order = " << format_number(check.slope) << "\n";
    files.add("oracle.csv", csv.str());
    finish(files, "oracle", cfg, {{"empirical_order", check.slope}}, log);
}

void cmd_verify_lift(RunConfig const& cfg, std::ostream& log)
{
    OutputSet files(cfg.out);
    files.prepare();

    auto const result = verify_lift_attraction(cfg.params.a, cfg.params, cfg.detection, cfg.seed,
                                               cfg.perturbation, cfg.order, cfg.lift_duration);
    std::ostringstream csv;
    csv << "equilibrium,t,distance\n";
    for (std::size_t e = 0; e < result.checks.size(); ++e)
    {
        auto const& c = result.checks[e];
        for (auto const& s : c.series)
            csv << e << ',' << format_number(s.t) << ',' << format_number(s.distance) << '\n';
        log << "x*=" << format_number(c.x_star) << "  final distance "
            << format_number(c.final_distance) << " vs threshold "
            << format_number(result.threshold) << (c.attracted ? "  attracted" : "  NOT attracted")
            << "\n";
    }
    files.add("lift.json", to_json(result).dump(2) + "\n");
    files.add("lift.csv", csv.str());
    finish(files, "verify-lift", cfg, {{"attracted", result.attracted}}, log);
}

std::vector<std::string> command_names()
{
    return {"simulate", "sweep", "manifold", "oracle", "verify-lift"};
}

int run_command(std::string const& name, RunConfig const& cfg, std::ostream& log, std::ostream& err)
{
    try
    {
        if (name == "simulate")
            cmd_simulate(cfg, log);
        else if (name == "sweep")
            cmd_sweep(cfg, log);
        else if (name == "manifold")
            cmd_manifold(cfg, log);
        else if (name == "oracle")
            cmd_oracle(cfg, log);
        else if (name == "verify-lift")
            cmd_verify_lift(cfg, log);
        else
        {
            err << "unknown command '" << name << "'\n";
            return kExitConfig;
        }
        return kExitOk;
    }
    catch (ConfigError const& e)
    {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::filesystem::filesystem_error const& e)
    {
        err << "output error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::invalid_argument const& e)
    {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::exception const& e)
    {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace rsm::cli
