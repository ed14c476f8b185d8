#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsm/noise.hpp"

namespace rsm {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/// Scale separation, noise intensity and bifurcation parameter.
struct SystemParams
{
    double eps = 0.01;
    double sigma = 0.1;
    double a = 0.6;

    /// Throws std::invalid_argument unless eps > 0, sigma >= 0, all finite.
    void validate() const;
};

/// A drift/diffusion pair with additive noise driven by one scalar Brownian
/// motion. The first `slow_dim` components are slow; the window test in the
/// integrators applies to them. Non-autonomous models read the random
/// driving (z, J, I) passed alongside the state.
template <class M>
concept SdeModel = requires(M const& m, typename M::State const& s, DrivingState const& d) {
    typename M::State;
    { M::dim } -> std::convertible_to<int>;
    { M::slow_dim } -> std::convertible_to<int>;
    { m.drift(s, d) } -> std::same_as<typename M::State>;
    { m.diffusion() } -> std::same_as<typename M::State>;
    { m.noise_intensity() } -> std::convertible_to<double>;
};

template <class M>
concept HasJacobian = SdeModel<M> && requires(M const& m, typename M::State const& s,
                                              DrivingState const& d) {
    { m.jacobian(s, d) } -> std::same_as<Mat<M::dim>>;
};

/// dx = -eps (a x + y / (1 + x^2)) dt
/// dy = (-2 y - sin x) dt + sigma dB
class ExampleSystem
{
  public:
    static constexpr int dim = 2;
    static constexpr int slow_dim = 1;
    using State = Vec<2>;

    explicit ExampleSystem(SystemParams const& p);

    State drift(State const& s, DrivingState const&) const
    {
        double const x = s[0];
        double const y = s[1];
        return {-p_.eps * (p_.a * x + y / (1.0 + x * x)), -2.0 * y - std::sin(x)};
    }

    Mat<2> jacobian(State const& s, DrivingState const&) const
    {
        double const x = s[0];
        double const y = s[1];
        double const q = 1.0 + x * x;
        Mat<2> jac;
        jac << -p_.eps * (p_.a - 2.0 * x * y / (q * q)), -p_.eps / q, -std::cos(x), -2.0;
        return jac;
    }

    State diffusion() const { return {0.0, p_.sigma}; }
    double noise_intensity() const { return p_.sigma; }
    SystemParams const& params() const { return p_; }

  private:
    SystemParams p_;
};

/// The example after the change of variables (u, v) = (x, y - z): a random
/// ODE whose only randomness is the OU value z supplied through the driving.
///   du/dt = -eps (a u + (v + z) / (1 + u^2))
///   dv/dt = -2 v - sin u
class TransformedSystem
{
  public:
    static constexpr int dim = 2;
    static constexpr int slow_dim = 1;
    using State = Vec<2>;

    explicit TransformedSystem(SystemParams const& p);

    State drift(State const& s, DrivingState const& d) const
    {
        double const u = s[0];
        double const v = s[1];
        return {-p_.eps * (p_.a * u + (v + d.z) / (1.0 + u * u)), -2.0 * v - std::sin(u)};
    }

    Mat<2> jacobian(State const& s, DrivingState const& d) const
    {
        double const u = s[0];
        double const w = s[1] + d.z;
        double const q = 1.0 + u * u;
        Mat<2> jac;
        jac << -p_.eps * (p_.a - 2.0 * u * w / (q * q)), -p_.eps / q, -std::cos(u), -2.0;
        return jac;
    }

    State diffusion() const { return State::Zero(); }
    double noise_intensity() const { return p_.sigma; }
    SystemParams const& params() const { return p_; }

  private:
    SystemParams p_;
};

inline ExampleSystem example_system(SystemParams const& p) { return ExampleSystem(p); }
inline TransformedSystem transformed_system(SystemParams const& p) { return TransformedSystem(p); }

/// General slow-fast system with user-supplied drifts
///   dx = f_slow(x, y) dt,   dy = f_fast(x, y) dt + sigma * direction dB.
/// No analytic Jacobian; the implicit scheme differentiates numerically.
template <int M, int N>
class SlowFastSystem
{
  public:
    static constexpr int dim = M + N;
    static constexpr int slow_dim = M;
    using State = Vec<M + N>;
    using Slow = Vec<M>;
    using Fast = Vec<N>;
    using SlowDrift = std::function<Slow(Slow const&, Fast const&, SystemParams const&)>;
    using FastDrift = std::function<Fast(Slow const&, Fast const&, SystemParams const&)>;

    SlowFastSystem(SlowDrift slow, FastDrift fast, SystemParams const& p,
                   Fast direction = Fast::Ones())
        : slow_(std::move(slow)), fast_(std::move(fast)), p_(p), direction_(direction)
    {
        p_.validate();
        if (!slow_ || !fast_)
            throw std::invalid_argument("slow-fast system: both drifts are required");
    }

    State drift(State const& s, DrivingState const&) const
    {
        Slow const x = s.template head<M>();
        Fast const y = s.template tail<N>();
        State out;
        out << slow_(x, y, p_), fast_(x, y, p_);
        return out;
    }

    State diffusion() const
    {
        State out = State::Zero();
        out.template tail<N>() = p_.sigma * direction_;
        return out;
    }

    double noise_intensity() const { return p_.sigma; }
    SystemParams const& params() const { return p_; }

  private:
    SlowDrift slow_;
    FastDrift fast_;
    SystemParams p_;
    Fast direction_;
};

struct NewtonOptions
{
    double tol = 1e-12;  ///< max-norm residual of the implicit equation
    int max_iters = 50;

    void validate() const;
};

/// Raised when the drift-implicit step does not converge.
class NewtonFailure : public std::runtime_error
{
  public:
    NewtonFailure(int iterations, double residual);

    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

  private:
    int iterations_;
    double residual_;
};

enum class Scheme
{
    explicit_euler,  ///< Euler-Maruyama
    implicit_euler,  ///< drift-implicit, diffusion-explicit Euler-Maruyama
};

std::string to_string(Scheme s);
Scheme parse_scheme(std::string const& name);

/// Explicit Euler-Maruyama: s + f(s, d) dt + g dW. The driving is the value
/// at the start of the step.
template <SdeModel M>
typename M::State em_step(M const& model, typename M::State const& s, DrivingState const& d,
                          double dW, double dt)
{
    return s + model.drift(s, d) * dt + model.diffusion() * dW;
}

/// Jacobian of the drift: analytic when the model provides one, otherwise
/// central differences with h = 1e-6 (1 + |s_j|).
template <SdeModel M>
Mat<M::dim> drift_jacobian(M const& model, typename M::State const& s, DrivingState const& d)
{
    if constexpr (HasJacobian<M>)
    {
        return model.jacobian(s, d);
    }
    else
    {
        Mat<M::dim> jac;
        for (int j = 0; j < M::dim; ++j)
        {
            double const h = 1e-6 * (1.0 + std::abs(s[j]));
            typename M::State plus = s;
            typename M::State minus = s;
            plus[j] += h;
            minus[j] -= h;
            jac.col(j) = (model.drift(plus, d) - model.drift(minus, d)) / (2.0 * h);
        }
        return jac;
    }
}

/// Solves s' = s + f(s', d_next) dt + g dW by Newton's method, started from
/// the explicit predictor. `d_next` is the driving at the end of the step.
template <SdeModel M>
typename M::State implicit_em_step(M const& model, typename M::State const& s,
                                   DrivingState const& d_next, double dW, double dt,
                                   NewtonOptions const& newton = {})
{
    using State = typename M::State;
    State const rhs = s + model.diffusion() * dW;
    State guess = rhs + model.drift(s, d_next) * dt;
    double residual = 0.0;
    for (int iter = 0;; ++iter)
    {
        State const g = guess - model.drift(guess, d_next) * dt - rhs;
        residual = g.template lpNorm<Eigen::Infinity>();
        if (!std::isfinite(residual))
            throw NewtonFailure(iter, residual);
        if (residual <= newton.tol)
            return guess;
        if (iter == newton.max_iters)
            throw NewtonFailure(iter, residual);
        Mat<M::dim> const jac
            = Mat<M::dim>::Identity() - dt * drift_jacobian(model, guess, d_next);
        if constexpr (M::dim <= 4)
            guess -= jac.inverse() * g;
        else
            guess -= jac.partialPivLu().solve(g);
    }
}

/// Escape bounds applied to every slow component.
struct EscapeWindow
{
    double lo = -50.0;
    double hi = 50.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    void validate() const;
};

struct RunOptions
{
    Scheme scheme = Scheme::implicit_euler;
    NewtonOptions newton;
    EscapeWindow window;
};

/// Dispatches one step of the selected scheme.
template <SdeModel M>
typename M::State scheme_step(M const& model, RunOptions const& opts,
                              typename M::State const& s, DrivingState const& now,
                              DrivingState const& next, double dW, double dt)
{
    if (opts.scheme == Scheme::explicit_euler)
        return em_step(model, s, now, dW, dt);
    return implicit_em_step(model, s, next, dW, dt, opts.newton);
}

template <SdeModel M>
bool state_escaped(typename M::State const& s, EscapeWindow const& w)
{
    if (!s.allFinite())
        return true;
    for (int i = 0; i < M::slow_dim; ++i)
        if (!w.contains(s[i]))
            return true;
    return false;
}

/// Advances several trajectories over one noise path. Every trajectory sees
/// the same increments and the same driving (z, J, I) sequence, which is
/// evolved once per block.
///
/// After step k (time path.time(k + 1)) the observer is called as
///   observer(i, k, state, driving, escaped)
/// for every trajectory i still running. A trajectory whose state is
/// non-finite or whose slow components leave the window is reported once
/// with escaped = true and then dropped. Returns, per trajectory, whether it
/// escaped.
template <SdeModel M, class Observer>
std::vector<bool> run_shared_noise(M const& model, std::span<typename M::State> states,
                                   NoisePath const& path, DrivingState const& d0,
                                   RunOptions const& opts, Observer&& observer)
{
    constexpr std::size_t kBlock = 4096;
    std::vector<bool> escaped(states.size(), false);
    std::vector<double> dW(kBlock);
    std::vector<DrivingState> drive(kBlock + 1);
    std::size_t active = states.size();
    DrivingState current = d0;
    double const dt = path.dt();
    double const sigma = model.noise_intensity();

    for (std::size_t first = 0; first < path.size() && active > 0; first += kBlock)
    {
        std::size_t const len = std::min(kBlock, path.size() - first);
        std::span<double> block_dW(dW.data(), len);
        std::span<DrivingState> block_drive(drive.data(), len + 1);
        path.fill(first, block_dW);
        evolve_driving(current, block_dW, dt, sigma, block_drive);
        current = block_drive[len];

        for (std::size_t i = 0; i < states.size(); ++i)
        {
            if (escaped[i])
                continue;
            auto s = states[i];
            for (std::size_t j = 0; j < len; ++j)
            {
                s = scheme_step(model, opts, s, block_drive[j], block_drive[j + 1],
                                block_dW[j], dt);
                bool const out = state_escaped<M>(s, opts.window);
                observer(i, first + j, s, block_drive[j + 1], out);
                if (out)
                {
                    escaped[i] = true;
                    --active;
                    break;
                }
            }
            states[i] = s;
        }
    }
    return escaped;
}

template <int Dim>
struct Trajectory
{
    std::vector<double> times;
    std::vector<Vec<Dim>> states;
    std::vector<DrivingState> driving;
    bool divergent = false;

    std::size_t size() const { return states.size(); }
};

struct SimulateOptions : RunOptions
{
    std::size_t thin = 1;  ///< keep every thin-th step (first and last always kept)
};

/// Integrates one trajectory over the whole path, co-evolving the driving
/// from d0. Stops early, flagged divergent, when the state leaves the window.
template <SdeModel M>
Trajectory<M::dim> simulate(M const& model, typename M::State const& x0, NoisePath const& path,
                            DrivingState const& d0, SimulateOptions const& opts = {})
{
    if (opts.thin == 0)
        throw std::invalid_argument("simulate: thin must be at least 1");
    opts.newton.validate();
    opts.window.validate();

    Trajectory<M::dim> traj;
    std::size_t const expected = path.size() / opts.thin + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.driving.reserve(expected);
    traj.times.push_back(path.t_start());
    traj.states.push_back(x0);
    traj.driving.push_back(d0);

    typename M::State state = x0;
    std::size_t const last = path.size() - 1;
    auto const escaped = run_shared_noise(
        model, std::span<typename M::State>(&state, 1), path, d0, opts,
        [&](std::size_t, std::size_t k, typename M::State const& s, DrivingState const& d,
            bool out) {
            if (out || k == last || (k + 1) % opts.thin == 0)
            {
                traj.times.push_back(path.time(k + 1));
                traj.states.push_back(s);
                traj.driving.push_back(d);
            }
        });
    traj.divergent = escaped[0];
    return traj;
}

}  // namespace rsm
