#pragma once

#include <utility>

#include "rsm/dynamics.hpp"
#include "rsm/manifold.hpp"

namespace rsm {

/// Slow drift of the example evaluated on the first-order random slow manifold:
///   -eps { a x + [z - sin x / 2
///                 - eps (a x cos x / 4 - sin x cos x / (8 (1 + x^2))
///                        - sigma cos x I / (2 (1 + x^2)))] / (1 + x^2) }
/// The o(eps^2) remainder is dropped.
inline double reduced_drift(double x, DrivingState const& d, SystemParams const& p)
{
    return -p.eps * (p.a * x + h_order1(x, d, p) / (1.0 + x * x));
}

/// The reduced system as a one-dimensional random ODE driven by (z, I).
class ReducedSystem
{
  public:
    static constexpr int dim = 1;
    static constexpr int slow_dim = 1;
    using State = Vec<1>;

    explicit ReducedSystem(SystemParams const& p);

    State drift(State const& s, DrivingState const& d) const
    {
        return State(reduced_drift(s[0], d, p_));
    }

    State diffusion() const { return State::Zero(); }
    double noise_intensity() const { return p_.sigma; }
    SystemParams const& params() const { return p_; }

  private:
    SystemParams p_;
};

/// Explicit Euler with the default window and Newton settings.
SimulateOptions default_reduced_options();

/// Simulates the reduced system on `path`, co-evolving (z, J, I) from d0.
/// Defaults to the explicit scheme.
Trajectory<1> simulate_reduced(double x0, NoisePath const& path, DrivingState const& d0,
                               SystemParams const& p, SimulateOptions opts = default_reduced_options());

/// Lifts a slow state onto the manifold of the given order: (x, h(x, driving)).
std::pair<double, double> lift(double x, DrivingState const& d, SystemParams const& p, int order);

}  // namespace rsm
