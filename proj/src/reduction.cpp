#include "rsm/reduction.hpp"

namespace rsm {

ReducedSystem::ReducedSystem(SystemParams const& p) : p_(p) { p_.validate(); }

SimulateOptions default_reduced_options()
{
    SimulateOptions opts;
    opts.scheme = Scheme::explicit_euler;
    return opts;
}

Trajectory<1> simulate_reduced(double x0, NoisePath const& path, DrivingState const& d0,
                               SystemParams const& p, SimulateOptions opts)
{
    return simulate(ReducedSystem(p), Vec<1>(x0), path, d0, opts);
}

std::pair<double, double> lift(double x, DrivingState const& d, SystemParams const& p, int order)
{
    return {x, h_order(order, x, d, p)};
}

}  // namespace rsm
