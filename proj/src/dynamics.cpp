#include "rsm/dynamics.hpp"

namespace rsm {

void SystemParams::validate() const
{
    if (!std::isfinite(eps) || !(eps > 0.0))
        throw std::invalid_argument("params: eps must be positive (eps = 0 freezes the slow variable)");
    if (!std::isfinite(sigma) || !(sigma >= 0.0))
        throw std::invalid_argument("params: sigma must be non-negative");
    if (!std::isfinite(a))
        throw std::invalid_argument("params: a must be finite");
}

ExampleSystem::ExampleSystem(SystemParams const& p) : p_(p) { p_.validate(); }

TransformedSystem::TransformedSystem(SystemParams const& p) : p_(p) { p_.validate(); }

void NewtonOptions::validate() const
{
    if (!(tol > 0.0))
        throw std::invalid_argument("newton: tol must be positive");
    if (max_iters < 1)
        throw std::invalid_argument("newton: max_iters must be at least 1");
}

NewtonFailure::NewtonFailure(int iterations, double residual)
    : std::runtime_error("implicit Euler: Newton did not converge after "
                         + std::to_string(iterations) + " iterations (residual "
                         + std::to_string(residual) + ")")
    , iterations_(iterations)
    , residual_(residual)
{
}

void EscapeWindow::validate() const
{
    if (!(lo < hi))
        throw std::invalid_argument("escape window: lo must be below hi");
}

std::string to_string(Scheme s)
{
    return s == Scheme::explicit_euler ? "explicit" : "implicit";
}

Scheme parse_scheme(std::string const& name)
{
    if (name == "explicit")
        return Scheme::explicit_euler;
    if (name == "implicit")
        return Scheme::implicit_euler;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected explicit or implicit)");
}

}  // namespace rsm
