#include "rsm/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rsm {

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        v = 0.0;  // drop the sign of -0
    char buf[32];
    auto const res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(SystemParams const& p)
{
    return {{"eps", p.eps}, {"sigma", p.sigma}, {"a", p.a}};
}

nlohmann::json to_json(DetectionConfig const& cfg)
{
    return {
        {"initial_x", cfg.initial_x},
        {"initial_y", cfg.initial_y},
        {"horizon", cfg.horizon},
        {"extended_horizon", cfg.extended_horizon},
        {"extend_below", cfg.extend_below},
        {"settle_window", cfg.settle_window},
        {"settle_tol", cfg.settle_tol},
        {"cluster_gap", cfg.cluster_gap},
        {"escape_window", {cfg.escape_window.lo, cfg.escape_window.hi}},
        {"dt", cfg.dt},
        {"full_scheme", to_string(cfg.full_scheme)},
        {"reduced_scheme", to_string(cfg.reduced_scheme)},
        {"newton_tol", cfg.newton.tol},
        {"newton_max_iters", cfg.newton.max_iters},
        {"init_mode", cfg.init.mode == StationaryMode::exact_gaussian ? "exact-gaussian"
                                                                       : "truncated-past"},
        {"init_past_horizon", cfg.init.past_horizon},
    };
}

nlohmann::json to_json(EquilibriumReport const& rep)
{
    nlohmann::json outcomes = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.outcomes.size(); ++i)
    {
        nlohmann::json o = {{"outcome", to_string(rep.outcomes[i])}, {"final_x", rep.final_x[i]}};
        if (rep.outcomes[i] == Outcome::divergent)
            o["escape_time"] = rep.escape_time[i];
        outcomes.push_back(std::move(o));
    }
    return {
        {"a", rep.a},
        {"system", to_string(rep.kind)},
        {"status", to_string(rep.status)},
        {"message", rep.message},
        {"horizon", rep.horizon},
        {"count", rep.count},
        {"positions", rep.positions},
        {"divergent", rep.divergent},
        {"unsettled", rep.unsettled},
        {"trajectories", std::move(outcomes)},
    };
}

nlohmann::json to_json(BifurcationReport const& report)
{
    nlohmann::json entries = nlohmann::json::array();
    for (auto const& e : report.sweep)
    {
        entries.push_back({
            {"a", e.a},
            {"full", to_json(e.full)},
            {"reduced", to_json(e.reduced)},
            {"counts_match", e.counts_match},
            {"max_position_gap", e.max_position_gap},
        });
    }
    return {
        {"seed", report.seed},
        {"params", {{"eps", report.params.eps}, {"sigma", report.params.sigma}}},
        {"config", to_json(report.config)},
        {"sweep", std::move(entries)},
    };
}

nlohmann::json to_json(LiftAttractionResult const& result)
{
    nlohmann::json checks = nlohmann::json::array();
    for (auto const& c : result.checks)
    {
        checks.push_back({
            {"x_star", c.x_star},
            {"y_star", c.y_star},
            {"attracted", c.attracted},
            {"final_distance", c.final_distance},
        });
    }
    return {
        {"attracted", result.attracted},
        {"threshold", result.threshold},
        {"duration", result.duration},
        {"equilibria", std::move(checks)},
    };
}

std::string to_csv(BifurcationReport const& report)
{
    std::ostringstream out;
    out << "a,system,count,positions,divergent,unsettled\n";
    for (auto const& e : report.sweep)
    {
        for (auto const* rep : {&e.full, &e.reduced})
        {
            out << format_number(e.a) << ',' << to_string(rep->kind) << ',' << rep->count << ',';
            for (std::size_t i = 0; i < rep->positions.size(); ++i)
                out << (i ? ";" : "") << format_number(rep->positions[i]);
            out << ',' << rep->divergent << ',' << rep->unsettled << '\n';
        }
    }
    return out.str();
}

}  // namespace rsm
