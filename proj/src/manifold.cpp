#include "rsm/manifold.hpp"

#include <cmath>
#include <string>

namespace rsm {

double order1_correction(double xi, DrivingState const& d, SystemParams const& p)
{
    double const s = std::sin(xi);
    double const c = std::cos(xi);
    double const q = 1.0 + xi * xi;
    return -p.a * xi * c / 4.0 + s * c / (8.0 * q) + p.sigma * c * d.I / (2.0 * q);
}

double h_order1(double xi, DrivingState const& d, SystemParams const& p)
{
    return h_order0(xi, d.z) + p.eps * order1_correction(xi, d, p);
}

double h_order(int order, double xi, DrivingState const& d, SystemParams const& p)
{
    switch (order)
    {
    case 0:
        return h_order0(xi, d.z);
    case 1:
        return h_order1(xi, d, p);
    default:
        throw std::invalid_argument("manifold order must be 0 or 1, got " + std::to_string(order));
    }
}

ManifoldEval evaluate_manifold(double xi, int order, DrivingState const& d, SystemParams const& p)
{
    return {xi, order, h_order(order, xi, d, p), d};
}

void LPOracleConfig::validate() const
{
    if (!(past_horizon >= 14.0))
        throw std::invalid_argument("LP oracle: past_horizon must be >= 14");
    if (!(fixed_point_tol > 0.0))
        throw std::invalid_argument("LP oracle: fixed_point_tol must be positive");
    if (max_sweeps < 1)
        throw std::invalid_argument("LP oracle: max_sweeps must be positive");
    if (!(quadrature_dt > 0.0))
        throw std::invalid_argument("LP oracle: quadrature_dt must be positive");
}

PathHistory PathHistory::make(std::uint64_t seed, double sigma, LPOracleConfig const& cfg)
{
    cfg.validate();
    PathHistory h{NoisePath::make(seed, -cfg.past_horizon, 0.0, cfg.quadrature_dt), {}};
    auto const dW = h.path.increments();
    h.driving.resize(dW.size() + 1);
    evolve_driving(init_stationary(seed, sigma), dW, h.path.dt(), sigma, h.driving);
    return h;
}

LPOracleError::LPOracleError(int sweeps, double last_change)
    : std::runtime_error("LP oracle: no convergence after " + std::to_string(sweeps)
                         + " sweeps (last change " + std::to_string(last_change) + ")")
    , last_change_(last_change)
{
}

LPResult lp_oracle(double xi, PathHistory const& history, SystemParams const& p,
                   LPOracleConfig const& cfg, std::function<double(double)> const& forcing)
{
    p.validate();
    cfg.validate();
    auto const& path = history.path;
    double const dt = path.dt();
    if (history.driving.size() != path.size() + 1)
        throw std::invalid_argument("LP oracle: history driving does not match its path");
    if (std::abs(path.t_end()) > 1e-9 * dt || path.t_start() > -cfg.past_horizon + 1e-9 * dt)
        throw std::invalid_argument("LP oracle: history must cover [-past_horizon, 0]");
    if (std::abs(dt - cfg.quadrature_dt) > 1e-12 * cfg.quadrature_dt)
        throw std::invalid_argument("LP oracle: history grid differs from quadrature_dt");

    std::size_t const n = path.size();
    auto const& drive = history.driving;
    auto slow_rate = [&](double u, double v, double z) {
        return -p.eps * (p.a * u + (v + z) / (1.0 + u * u));
    };

    // Product-trapezoid weights for int_0^dt e^{-2(dt-s)} f(s) ds with f linear.
    double const decay = std::exp(-2.0 * dt);
    double const w_new = 0.5 - (1.0 - decay) / (4.0 * dt);
    double const w_old = (1.0 - decay) / 2.0 - w_new;

    std::vector<double> u(n + 1);
    std::vector<double> v(n + 1, 0.0);
    std::vector<double> v_next(n + 1);
    LPResult result;
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep)
    {
        u[n] = xi;
        for (std::size_t k = n; k-- > 0;)
        {
            double const f_right = slow_rate(u[k + 1], v[k + 1], drive[k + 1].z);
            double const predictor = u[k + 1] - dt * f_right;
            double const f_left = slow_rate(predictor, v[k], drive[k].z);
            u[k] = u[k + 1] - 0.5 * dt * (f_right + f_left);
        }

        v_next[0] = 0.0;
        double f_prev = forcing(u[0]);
        for (std::size_t k = 0; k < n; ++k)
        {
            double const f_cur = forcing(u[k + 1]);
            v_next[k + 1] = decay * v_next[k] - (w_old * f_prev + w_new * f_cur);
            f_prev = f_cur;
        }

        double change = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            change = std::max(change, std::abs(v_next[k] - v[k]));
        v.swap(v_next);
        result.changes.push_back(change);
        result.sweeps = sweep;
        if (change < cfg.fixed_point_tol)
        {
            result.value = v[n] + drive[n].z;
            return result;
        }
    }
    throw LPOracleError(cfg.max_sweeps, result.changes.back());
}

double loglog_slope(std::vector<double> const& x, std::vector<double> const& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double const dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

OrderCheck manifold_order_check(std::vector<double> const& eps_values,
                                std::vector<double> const& xi_grid, SystemParams const& p,
                                LPOracleConfig const& cfg, std::uint64_t seed)
{
    if (eps_values.size() < 2 || xi_grid.empty())
        throw std::invalid_argument("order check: need >= 2 eps values and a non-empty xi grid");
    auto const history = PathHistory::make(seed, p.sigma, cfg);
    OrderCheck check;
    for (double eps : eps_values)
    {
        SystemParams q = p;
        q.eps = eps;
        double worst = 0.0;
        for (double xi : xi_grid)
        {
            double const oracle = lp_oracle(xi, history, q, cfg).value;
            worst = std::max(worst, std::abs(h_order1(xi, history.present(), q) - oracle));
        }
        check.eps.push_back(eps);
        check.max_error.push_back(worst);
    }
    check.slope = loglog_slope(check.eps, check.max_error);
    return check;
}

std::vector<TrackingPoint> tracking_distance(Trajectory<2> const& full, int order,
                                             SystemParams const& p)
{
    if (full.driving.size() != full.states.size() || full.times.size() != full.states.size())
        throw std::invalid_argument("tracking distance: trajectory carries no aligned driving samples");
    std::vector<TrackingPoint> out;
    out.reserve(full.states.size());
    for (std::size_t k = 0; k < full.states.size(); ++k)
    {
        auto const& s = full.states[k];
        out.push_back({full.times[k], std::abs(s[1] - h_order(order, s[0], full.driving[k], p))});
    }
    return out;
}

}  // namespace rsm
