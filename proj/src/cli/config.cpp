#include "rsm/cli/config.hpp"

#include <fstream>
#include <set>

namespace rsm::cli {
namespace {

using nlohmann::json;

std::string init_mode_name(StationaryMode m)
{
    return m == StationaryMode::exact_gaussian ? "exact-gaussian" : "truncated-past";
}

StationaryMode parse_init_mode(std::string const& s)
{
    if (s == "exact-gaussian")
        return StationaryMode::exact_gaussian;
    if (s == "truncated-past")
        return StationaryMode::truncated_past;
    throw ConfigError("init_mode must be exact-gaussian or truncated-past, got '" + s + "'");
}

template <class T>
void read(json const& doc, char const* key, T& target)
{
    auto const it = doc.find(key);
    if (it == doc.end())
        return;
    try
    {
        target = it->get<T>();
    }
    catch (json::exception const& e)
    {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

void RunConfig::validate() const
{
    try
    {
        params.validate();
        detection.validate();
        lp.validate();
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(e.what());
    }
    if (a_values.empty())
        throw ConfigError("a_values must not be empty");
    if (thin == 0)
        throw ConfigError("thin must be at least 1");
    if (out.empty())
        throw ConfigError("out must name a directory");
    if (order != 0 && order != 1)
        throw ConfigError("order must be 0 or 1");
    if (!std::isfinite(perturbation))
        throw ConfigError("perturbation must be finite");
    if (!(lift_duration > 0.0))
        throw ConfigError("lift_duration must be positive");
    if (xi_grid.empty())
        throw ConfigError("xi_grid must not be empty");
    if (eps_values.size() < 2)
        throw ConfigError("eps_values needs at least two entries");
    for (double e : eps_values)
        if (!(e > 0.0))
            throw ConfigError("eps_values must be positive");
}

json to_json(RunConfig const& c)
{
    auto const& d = c.detection;
    return {
        {"eps", c.params.eps},
        {"sigma", c.params.sigma},
        {"a", c.params.a},
        {"a_values", c.a_values},
        {"dt", d.dt},
        {"seed", c.seed},
        {"out", c.out},
        {"thin", c.thin},
        {"threads", c.threads},
        {"write_path", c.write_path},
        {"full_scheme", to_string(d.full_scheme)},
        {"reduced_scheme", to_string(d.reduced_scheme)},
        {"initial_x", d.initial_x},
        {"initial_y", d.initial_y},
        {"horizon", d.horizon},
        {"extended_horizon", d.extended_horizon},
        {"extend_below", d.extend_below},
        {"settle_window", d.settle_window},
        {"settle_tol", d.settle_tol},
        {"cluster_gap", d.cluster_gap},
        {"escape_window", {d.escape_window.lo, d.escape_window.hi}},
        {"newton_tol", d.newton.tol},
        {"newton_max_iters", d.newton.max_iters},
        {"init_mode", init_mode_name(d.init.mode)},
        {"init_past_horizon", d.init.past_horizon},
        {"xi_grid", c.xi_grid},
        {"eps_values", c.eps_values},
        {"lp_past_horizon", c.lp.past_horizon},
        {"lp_fixed_point_tol", c.lp.fixed_point_tol},
        {"lp_max_sweeps", c.lp.max_sweeps},
        {"lp_quadrature_dt", c.lp.quadrature_dt},
        {"order", c.order},
        {"perturbation", c.perturbation},
        {"lift_duration", c.lift_duration},
    };
}

RunConfig parse_config(json const& doc)
{
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");

    RunConfig c;
    auto const known = to_json(c);
    for (auto const& [key, value] : doc.items())
        if (!known.contains(key))
            throw ConfigError("unknown config key '" + key + "'");

    auto& d = c.detection;
    read(doc, "eps", c.params.eps);
    read(doc, "sigma", c.params.sigma);
    read(doc, "a", c.params.a);
    read(doc, "a_values", c.a_values);
    read(doc, "dt", d.dt);
    read(doc, "seed", c.seed);
    read(doc, "out", c.out);
    read(doc, "thin", c.thin);
    read(doc, "threads", c.threads);
    read(doc, "write_path", c.write_path);

    std::string scheme = to_string(d.full_scheme);
    read(doc, "full_scheme", scheme);
    std::string reduced_scheme = to_string(d.reduced_scheme);
    read(doc, "reduced_scheme", reduced_scheme);
    try
    {
        d.full_scheme = parse_scheme(scheme);
        d.reduced_scheme = parse_scheme(reduced_scheme);
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(e.what());
    }

    read(doc, "initial_x", d.initial_x);
    read(doc, "initial_y", d.initial_y);
    read(doc, "horizon", d.horizon);
    read(doc, "extended_horizon", d.extended_horizon);
    read(doc, "extend_below", d.extend_below);
    read(doc, "settle_window", d.settle_window);
    read(doc, "settle_tol", d.settle_tol);
    read(doc, "cluster_gap", d.cluster_gap);
    std::vector<double> window{d.escape_window.lo, d.escape_window.hi};
    read(doc, "escape_window", window);
    if (window.size() != 2)
        throw ConfigError("escape_window must be [lo, hi]");
    d.escape_window = {window[0], window[1]};
    read(doc, "newton_tol", d.newton.tol);
    read(doc, "newton_max_iters", d.newton.max_iters);
    std::string mode = init_mode_name(d.init.mode);
    read(doc, "init_mode", mode);
    d.init.mode = parse_init_mode(mode);
    read(doc, "init_past_horizon", d.init.past_horizon);
    d.init.dt = d.dt;

    read(doc, "xi_grid", c.xi_grid);
    read(doc, "eps_values", c.eps_values);
    read(doc, "lp_past_horizon", c.lp.past_horizon);
    read(doc, "lp_fixed_point_tol", c.lp.fixed_point_tol);
    read(doc, "lp_max_sweeps", c.lp.max_sweeps);
    read(doc, "lp_quadrature_dt", c.lp.quadrature_dt);
    read(doc, "order", c.order);
    read(doc, "perturbation", c.perturbation);
    read(doc, "lift_duration", c.lift_duration);

    c.validate();
    return c;
}

json load_config_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    try
    {
        return json::parse(in);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
}

void apply_override(json& doc, std::string const& assignment)
{
    auto const eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    std::string const key = assignment.substr(0, eq);
    std::string const text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;
    doc[key] = std::move(value);
}

}  // namespace rsm::cli
