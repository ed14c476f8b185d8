#include "rsm/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rsm/manifold.hpp"
#include "rsm/parallel.hpp"
#include "rsm/reduction.hpp"

namespace rsm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RunOptions run_options(DetectionConfig const& cfg, SystemKind kind)
{
    RunOptions opts;
    opts.scheme = kind == SystemKind::full ? cfg.full_scheme : cfg.reduced_scheme;
    opts.newton = cfg.newton;
    opts.window = cfg.escape_window;
    return opts;
}

template <SdeModel M>
void run_detection(M const& model, std::vector<typename M::State> states, NoisePath const& path,
                   DrivingState const& d0, RunOptions const& opts, DetectionConfig const& cfg,
                   EquilibriumReport& rep)
{
    std::size_t const n = states.size();
    std::size_t const steps = path.size();
    auto const window_steps
        = std::min(steps, static_cast<std::size_t>(std::llround(cfg.settle_window / cfg.dt)));
    std::size_t const window_first = steps - window_steps;  // grid index of t = T - window

    std::vector<double> lo(n), hi(n), last(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        lo[i] = hi[i] = last[i] = states[i][0];
    }
    rep.escape_time.assign(n, kNaN);

    auto const escaped = run_shared_noise(
        model, std::span<typename M::State>(states), path, d0, opts,
        [&](std::size_t i, std::size_t k, typename M::State const& s, DrivingState const& d,
            bool out) {
            if (out)
            {
                rep.escape_time[i] = path.time(k + 1);
                return;
            }
            double const x = s[0];
            last[i] = x;
            if (k + 1 == window_first)
                lo[i] = hi[i] = x;
            else if (k + 1 > window_first)
            {
                lo[i] = std::min(lo[i], x);
                hi[i] = std::max(hi[i], x);
            }
            if (k + 1 == steps)
                rep.final_driving = d;
        });

    rep.outcomes.resize(n);
    rep.final_x = last;
    std::vector<double> settled;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (escaped[i])
        {
            rep.outcomes[i] = Outcome::divergent;
            ++rep.divergent;
            continue;
        }
        double const spread = std::max(hi[i] - last[i], last[i] - lo[i]);
        if (spread <= cfg.settle_tol)
        {
            rep.outcomes[i] = Outcome::settled;
            settled.push_back(last[i]);
        }
        else
        {
            rep.outcomes[i] = Outcome::unsettled;
            ++rep.unsettled;
        }
    }
    rep.positions = cluster_positions(std::move(settled), cfg.cluster_gap);
    rep.count = rep.positions.size();
}

EquilibriumReport detect_impl(SystemKind kind, double a, SystemParams const& params,
                              DetectionConfig const& cfg, std::uint64_t seed)
{
    cfg.validate();
    SystemParams p = params;
    p.a = a;
    p.validate();

    EquilibriumReport rep;
    rep.a = a;
    rep.kind = kind;
    rep.horizon = cfg.horizon_for(a);
    rep.final_driving = {kNaN, kNaN, kNaN};

    auto const path = make_path(seed, 0.0, rep.horizon, cfg.dt);
    auto const d0 = init_stationary(seed, p.sigma, cfg.init);
    auto const opts = run_options(cfg, kind);

    if (kind == SystemKind::full)
    {
        std::vector<ExampleSystem::State> states;
        for (double x0 : cfg.initial_x)
            states.emplace_back(x0, cfg.initial_y);
        run_detection(ExampleSystem(p), std::move(states), path, d0, opts, cfg, rep);
    }
    else
    {
        std::vector<ReducedSystem::State> states;
        for (double x0 : cfg.initial_x)
            states.emplace_back(x0);
        run_detection(ReducedSystem(p), std::move(states), path, d0, opts, cfg, rep);
    }

    if (rep.count == 0 && rep.divergent == 0)
    {
        InconclusiveDetection const err(a, rep.horizon, 10.0 * rep.horizon);
        rep.status = EntryStatus::inconclusive;
        rep.message = err.what();
    }
    return rep;
}

}  // namespace

std::string to_string(SystemKind kind) { return kind == SystemKind::full ? "full" : "reduced"; }

std::string to_string(Outcome o)
{
    switch (o)
    {
    case Outcome::settled:
        return "settled";
    case Outcome::unsettled:
        return "unsettled";
    case Outcome::divergent:
        return "divergent";
    }
    return "?";
}

std::string to_string(EntryStatus s)
{
    switch (s)
    {
    case EntryStatus::ok:
        return "ok";
    case EntryStatus::inconclusive:
        return "inconclusive";
    case EntryStatus::failed:
        return "failed";
    }
    return "?";
}

double DetectionConfig::horizon_for(double a) const
{
    if (extended_horizon > 0.0 && std::abs(a) <= extend_below)
        return extended_horizon;
    return horizon;
}

void DetectionConfig::validate() const
{
    if (initial_x.empty())
        throw std::invalid_argument("detection: initial_x must not be empty");
    for (double x : initial_x)
        if (!std::isfinite(x))
            throw std::invalid_argument("detection: initial_x must be finite");
    if (!std::isfinite(initial_y))
        throw std::invalid_argument("detection: initial_y must be finite");
    if (!(dt > 0.0))
        throw std::invalid_argument("detection: dt must be positive");
    if (!(settle_window > 0.0))
        throw std::invalid_argument("detection: settle_window must be positive");
    if (!(horizon > settle_window))
        throw std::invalid_argument("detection: horizon must exceed settle_window");
    if (extended_horizon != 0.0 && !(extended_horizon > settle_window))
        throw std::invalid_argument("detection: extended_horizon must exceed settle_window (or be 0)");
    if (!(extend_below >= 0.0))
        throw std::invalid_argument("detection: extend_below must be non-negative");
    if (!(settle_tol > 0.0))
        throw std::invalid_argument("detection: settle_tol must be positive");
    if (!(cluster_gap > 0.0))
        throw std::invalid_argument("detection: cluster_gap must be positive");
    escape_window.validate();
    newton.validate();
    init.validate();
}

InconclusiveDetection::InconclusiveDetection(double a, double horizon, double suggested)
    : std::runtime_error("no trajectory settled or escaped for a = " + std::to_string(a)
                         + " within horizon " + std::to_string(horizon)
                         + "; rerun with a longer horizon (e.g. "
                         + std::to_string(suggested) + ")")
    , suggested_(suggested)
{
}

std::vector<double> cluster_positions(std::vector<double> values, double gap)
{
    std::sort(values.begin(), values.end());
    std::vector<double> means;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= values.size(); ++i)
    {
        if (i == values.size() || values[i] - values[i - 1] >= gap)
        {
            double sum = 0.0;
            for (std::size_t j = begin; j < i; ++j)
                sum += values[j];
            means.push_back(sum / static_cast<double>(i - begin));
            begin = i;
        }
    }
    return means;
}

EquilibriumReport detect_equilibria(SystemKind kind, double a, SystemParams const& params,
                                    DetectionConfig const& cfg, std::uint64_t seed)
{
    auto rep = detect_impl(kind, a, params, cfg, seed);
    if (rep.status == EntryStatus::inconclusive)
        throw InconclusiveDetection(a, rep.horizon, 10.0 * rep.horizon);
    return rep;
}

BifurcationReport sweep(std::span<double const> a_values, SystemParams const& params,
                        DetectionConfig const& cfg, std::uint64_t seed, unsigned threads)
{
    if (a_values.empty())
        throw std::invalid_argument("sweep: a_values must not be empty");
    cfg.validate();
    params.validate();

    BifurcationReport report;
    report.seed = seed;
    report.params = params;
    report.config = cfg;
    report.sweep.resize(a_values.size());

    parallel_for(2 * a_values.size(), threads, [&](std::size_t task) {
        double const a = a_values[task / 2];
        auto const kind = task % 2 == 0 ? SystemKind::full : SystemKind::reduced;
        EquilibriumReport rep;
        try
        {
            rep = detect_impl(kind, a, params, cfg, seed);
        }
        catch (std::exception const& e)
        {
            rep = EquilibriumReport{};
            rep.a = a;
            rep.kind = kind;
            rep.horizon = cfg.horizon_for(a);
            rep.status = EntryStatus::failed;
            rep.message = e.what();
        }
        auto& entry = report.sweep[task / 2];
        (kind == SystemKind::full ? entry.full : entry.reduced) = std::move(rep);
    });

    for (std::size_t i = 0; i < a_values.size(); ++i)
    {
        auto& entry = report.sweep[i];
        entry.a = a_values[i];
        entry.counts_match = entry.full.status == EntryStatus::ok
                             && entry.reduced.status == EntryStatus::ok
                             && entry.full.count == entry.reduced.count;
        entry.max_position_gap = kNaN;
        if (entry.counts_match)
        {
            double gap = 0.0;
            for (std::size_t c = 0; c < entry.full.count; ++c)
                gap = std::max(gap, std::abs(entry.full.positions[c] - entry.reduced.positions[c]));
            entry.max_position_gap = gap;
        }
    }
    return report;
}

LiftAttractionResult verify_lift_attraction(double a, SystemParams const& params,
                                            DetectionConfig const& cfg, std::uint64_t seed,
                                            double perturbation, int order, double duration)
{
    if (!(duration > 0.0))
        throw std::invalid_argument("lift attraction: duration must be positive");
    auto const reduced = detect_equilibria(SystemKind::reduced, a, params, cfg, seed);
    if (reduced.count == 0)
        throw std::runtime_error("lift attraction: the reduced system has no stable equilibrium for a = "
                                 + std::to_string(a));

    SystemParams p = params;
    p.a = a;
    double const start = reduced.horizon;
    auto const path = make_path(seed, start, start + duration, cfg.dt);
    DrivingState const d0 = reduced.final_driving;

    SimulateOptions full_opts;
    static_cast<RunOptions&>(full_opts) = run_options(cfg, SystemKind::full);
    SimulateOptions reduced_opts;
    static_cast<RunOptions&>(reduced_opts) = run_options(cfg, SystemKind::reduced);

    LiftAttractionResult result;
    result.threshold = 2.0 * std::abs(perturbation) / std::numbers::e;
    result.duration = duration;
    result.attracted = true;

    for (double position : reduced.positions)
    {
        // Representative: the settled trajectory ending closest to the cluster mean.
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < reduced.final_x.size(); ++i)
        {
            if (reduced.outcomes[i] != Outcome::settled)
                continue;
            double const g = std::abs(reduced.final_x[i] - position);
            if (g < best_gap)
            {
                best_gap = g;
                best = i;
            }
        }

        LiftCheck check;
        auto const [x_star, y_star] = lift(reduced.final_x[best], d0, p, order);
        check.x_star = x_star;
        check.y_star = y_star;

        auto const full = simulate(ExampleSystem(p), Vec<2>(x_star, y_star + perturbation), path,
                                   d0, full_opts);
        auto const slow = simulate(ReducedSystem(p), Vec<1>(x_star), path, d0, reduced_opts);
        std::size_t const n = std::min(full.size(), slow.size());
        for (std::size_t k = 0; k < n; ++k)
        {
            double const xr = slow.states[k][0];
            double const dx = full.states[k][0] - xr;
            double const dy = full.states[k][1] - h_order(order, xr, slow.driving[k], p);
            check.series.push_back({full.times[k] - start, std::hypot(dx, dy)});
        }
        check.final_distance = check.series.back().distance;
        check.attracted = !full.divergent && !slow.divergent && n == path.size() + 1
                          && check.final_distance < result.threshold;
        result.attracted = result.attracted && check.attracted;
        result.checks.push_back(std::move(check));
    }
    return result;
}

}  // namespace rsm
