#include "rsm/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rsm/philox.hpp"

namespace rsm {
namespace {

constexpr std::uint64_t kIncrementStream = 0;
constexpr std::uint64_t kStationaryStream = 1;
constexpr std::uint64_t kWarmupSubseed = 0x7761726d7570ull;

// Largest grid we accept; keeps k * refinement and the time arithmetic exact.
constexpr double kMaxSteps = 0x1.0p52;

inline double base_normal(std::uint64_t seed, std::int64_t index)
{
    auto const u = static_cast<std::uint64_t>(index);
    auto const pair = normal_pair(seed, kIncrementStream, u >> 1);
    return pair[u & 1u];
}

}  // namespace

NoisePath NoisePath::make(std::uint64_t seed, double t_start, double t_end, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("noise path: dt must be positive and finite");
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start))
        throw std::invalid_argument("noise path: t_end must exceed t_start");

    double const exact = (t_end - t_start) / dt;
    if (!(exact < kMaxSteps) || !(std::abs(t_start / dt) < kMaxSteps))
        throw std::length_error("noise path: grid length overflow");
    double const rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, rounded))
        throw std::invalid_argument("noise path: (t_end - t_start) = "
                                    + std::to_string(t_end - t_start)
                                    + " is not a multiple of dt = " + std::to_string(dt));

    NoisePath p;
    p.seed_ = seed;
    p.t_start_ = t_start;
    p.base_dt_ = dt;
    p.base_sqrt_dt_ = std::sqrt(dt);
    p.base_offset_ = static_cast<std::int64_t>(std::llround(t_start / dt));
    p.refinement_ = 1;
    p.steps_ = static_cast<std::size_t>(rounded);
    return p;
}

double NoisePath::increment(std::size_t k) const
{
    auto const first = base_offset_ + static_cast<std::int64_t>(k * refinement_);
    double sum = 0.0;
    for (std::size_t j = 0; j < refinement_; ++j)
        sum += base_sqrt_dt_ * base_normal(seed_, first + static_cast<std::int64_t>(j));
    return sum;
}

void NoisePath::fill(std::size_t first, std::span<double> out) const
{
    if (first + out.size() > steps_)
        throw std::out_of_range("noise path: fill past end of path");
    if (refinement_ == 1)
    {
        // Pairs share one Philox call; reuse both halves when aligned.
        std::size_t k = 0;
        while (k < out.size())
        {
            auto const index = base_offset_ + static_cast<std::int64_t>(first + k);
            auto const u = static_cast<std::uint64_t>(index);
            auto const pair = normal_pair(seed_, kIncrementStream, u >> 1);
            out[k++] = base_sqrt_dt_ * pair[u & 1u];
            if ((u & 1u) == 0 && k < out.size())
                out[k++] = base_sqrt_dt_ * pair[1];
        }
        return;
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = increment(first + k);
}

std::vector<double> NoisePath::increments() const
{
    std::vector<double> out(steps_);
    fill(0, out);
    return out;
}

NoisePath NoisePath::coarsened(std::size_t factor) const
{
    if (factor == 0 || steps_ % factor != 0)
        throw std::invalid_argument("noise path: coarsening factor must divide the step count");
    NoisePath p = *this;
    p.refinement_ = refinement_ * factor;
    p.steps_ = steps_ / factor;
    return p;
}

void StationaryInit::validate() const
{
    if (mode == StationaryMode::truncated_past)
    {
        if (!(past_horizon >= 14.0))
            throw std::invalid_argument("stationary init: past_horizon must be >= 14");
        if (!(dt > 0.0))
            throw std::invalid_argument("stationary init: dt must be positive");
    }
}

DrivingState init_stationary(std::uint64_t seed, double sigma, StationaryInit const& init)
{
    if (!(sigma >= 0.0))
        throw std::invalid_argument("stationary init: sigma must be non-negative");
    init.validate();

    DrivingState s;
    if (init.mode == StationaryMode::exact_gaussian)
    {
        // Cholesky factor of [[1/4, -1/16], [-1/16, 1/32]] is [[1/2, 0], [-1/8, 1/8]].
        auto const n = normal_pair(seed, kStationaryStream, 0);
        s.J = 0.5 * n[0];
        s.I = -0.125 * n[0] + 0.125 * n[1];
    }
    else
    {
        auto const warmup = NoisePath::make(derive_seed(seed, kWarmupSubseed),
                                            -init.past_horizon, 0.0, init.dt);
        std::vector<double> dW(4096);
        for (std::size_t k = 0; k < warmup.size(); k += dW.size())
        {
            std::span<double> block(dW.data(), std::min(dW.size(), warmup.size() - k));
            warmup.fill(k, block);
            for (double w : block)
                s = step_driving(s, w, init.dt, 1.0);
        }
    }
    s.z = sigma * s.J;
    return s;
}

void evolve_driving(DrivingState const& start, std::span<double const> dW, double dt,
                    double sigma, std::span<DrivingState> out)
{
    if (out.size() != dW.size() + 1)
        throw std::invalid_argument("evolve_driving: output must have dW.size() + 1 slots");
    out[0] = start;
    for (std::size_t k = 0; k < dW.size(); ++k)
        out[k + 1] = step_driving(out[k], dW[k], dt, sigma);
}

}  // namespace rsm
