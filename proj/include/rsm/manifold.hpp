#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "rsm/dynamics.hpp"
#include "rsm/noise.hpp"

namespace rsm {

/// Leading-order slow manifold of the example system: y = z - sin(xi) / 2.
inline double h_order0(double xi, double z) { return z - 0.5 * std::sin(xi); }

/// The bracket multiplying eps in the first-order manifold,
///   -a xi cos(xi) / 4 + sin(xi) cos(xi) / (8 (1 + xi^2))
///     + sigma cos(xi) I / (2 (1 + xi^2)).
/// It does not depend on eps.
double order1_correction(double xi, DrivingState const& driving, SystemParams const& p);

/// First-order random slow manifold h_0 + eps * correction. `driving` must be
/// the (z, I) realised on the same noise history as the state it is paired with.
double h_order1(double xi, DrivingState const& driving, SystemParams const& p);

/// Dispatches on order (0 or 1).
double h_order(int order, double xi, DrivingState const& driving, SystemParams const& p);

struct ManifoldEval
{
    double xi = 0;
    int order = 0;
    double value = 0;
    DrivingState driving;
};

ManifoldEval evaluate_manifold(double xi, int order, DrivingState const& driving,
                               SystemParams const& p);

struct LPOracleConfig
{
    double past_horizon = 14.0;
    double fixed_point_tol = 1e-13;
    int max_sweeps = 100;
    double quadrature_dt = 0.01;

    void validate() const;
};

/// A noise history on [-past_horizon, 0] together with the driving evolved
/// along it. The driving at -past_horizon is a stationary draw, so the value
/// at time 0 is a stationary sample tied to this particular path.
struct PathHistory
{
    NoisePath path;
    std::vector<DrivingState> driving;  ///< one entry per grid point, path.size() + 1

    DrivingState const& present() const { return driving.back(); }

    static PathHistory make(std::uint64_t seed, double sigma, LPOracleConfig const& cfg);
};

struct LPResult
{
    double value = 0;              ///< manifold value in (x, y) coordinates, v(0) + z(0)
    int sweeps = 0;
    std::vector<double> changes;   ///< sup-norm change of v per sweep
};

class LPOracleError : public std::runtime_error
{
  public:
    LPOracleError(int sweeps, double last_change);

    double last_change() const { return last_change_; }

  private:
    double last_change_;
};

/// Numerical Lyapunov-Perron fixed point for the transformed system.
///
/// Alternates two updates on the history grid until v stops changing:
///   u: integrate du/dt = -eps (a u + (v + z) / (1 + u^2)) backward from u(0) = xi
///      (Heun's method),
///   v: v(t) = -int_{-H}^t e^{-2(t-s)} forcing(u(s)) ds, with the kernel
///      integrated exactly against the piecewise-linear interpolant of forcing(u).
/// `forcing` is sin for the example; tests substitute other functions.
LPResult lp_oracle(double xi, PathHistory const& history, SystemParams const& p,
                   LPOracleConfig const& cfg,
                   std::function<double(double)> const& forcing = [](double u) {
                       return std::sin(u);
                   });

struct OrderCheck
{
    std::vector<double> eps;
    std::vector<double> max_error;  ///< max over the xi grid of |h_order1 - oracle|
    double slope = 0;               ///< least-squares slope of log(error) against log(eps)
};

/// Measures how the first-order manifold error shrinks with eps. Every eps
/// value uses the same noise history (same seed), so only the scale
/// separation changes between rows.
OrderCheck manifold_order_check(std::vector<double> const& eps_values,
                                std::vector<double> const& xi_grid, SystemParams const& p,
                                LPOracleConfig const& cfg, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::vector<double> const& x, std::vector<double> const& y);

struct TrackingPoint
{
    double t;
    double distance;
};

/// |y(t) - h(x(t), driving(t))| along a full-system trajectory, using the
/// driving recorded with the trajectory.
std::vector<TrackingPoint> tracking_distance(Trajectory<2> const& full, int order,
                                             SystemParams const& p);

}  // namespace rsm
