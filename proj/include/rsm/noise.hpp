#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rsm {

/// Brownian increments on a uniform grid.
///
/// Increments are not stored: element k is computed on demand from a
/// Philox4x32-10 counter keyed by the seed, so paths of any length cost O(1)
/// memory and can be read from several threads at once. Counters are indexed
/// by absolute grid position (t / dt), which means two paths with the same
/// seed and step that overlap in time see the same increments on the overlap.
/// A path obtained by `coarsened` sums consecutive base increments, giving
/// the same Brownian motion sampled on a coarser grid.
class NoisePath
{
  public:
    static NoisePath make(std::uint64_t seed, double t_start, double t_end, double dt);

    std::uint64_t seed() const { return seed_; }
    double t_start() const { return t_start_; }
    double t_end() const { return t_start_ + static_cast<double>(steps_) * dt(); }
    double dt() const { return base_dt_ * static_cast<double>(refinement_); }
    std::size_t size() const { return steps_; }
    double time(std::size_t k) const { return t_start_ + static_cast<double>(k) * dt(); }

    double increment(std::size_t k) const;
    void fill(std::size_t first, std::span<double> out) const;
    std::vector<double> increments() const;

    /// Same Brownian motion with `factor` base steps merged into one.
    NoisePath coarsened(std::size_t factor) const;

  private:
    NoisePath() = default;

    std::uint64_t seed_ = 0;
    double t_start_ = 0;
    double base_dt_ = 0;
    double base_sqrt_dt_ = 0;
    std::int64_t base_offset_ = 0;
    std::size_t refinement_ = 1;
    std::size_t steps_ = 0;
};

inline NoisePath make_path(std::uint64_t seed, double t_start, double t_end, double dt)
{
    return NoisePath::make(seed, t_start, t_end, dt);
}

/// Stationary driving processes sharing one Brownian motion B:
///   J(t) = int_{-inf}^t e^{-2(t-s)} dB_s          (unit-noise OU)
///   I(t) = int_{-inf}^t (s-t) e^{2(s-t)} dB_s
///   z(t) = sigma * J(t)
struct DrivingState
{
    double z = 0;
    double J = 0;
    double I = 0;

    bool operator==(DrivingState const&) const = default;
};

enum class StationaryMode
{
    exact_gaussian,
    truncated_past,
};

struct StationaryInit
{
    StationaryMode mode = StationaryMode::exact_gaussian;
    double past_horizon = 14.0;
    double dt = 0.01;  ///< step of the warm-up sub-path (truncated_past only)

    void validate() const;
};

/// Draws a driving state from the stationary law.
///
/// exact_gaussian samples (J, I) with covariance [[1/4, -1/16], [-1/16, 1/32]];
/// truncated_past starts from zero at -past_horizon and evolves over a
/// private sub-path derived from `seed`.
DrivingState init_stationary(std::uint64_t seed, double sigma, StationaryInit const& init = {});

/// One explicit Euler step of dJ = -2J dt + dB, dI = (-2I - J) dt.
inline DrivingState step_driving(DrivingState const& s, double dW, double dt, double sigma)
{
    DrivingState next;
    next.J = s.J - 2.0 * s.J * dt + dW;
    next.I = s.I + (-2.0 * s.I - s.J) * dt;
    next.z = sigma * next.J;
    return next;
}

/// Fills out[0] = start and out[k+1] = step_driving(out[k], dW[k]).
/// Requires out.size() == dW.size() + 1.
void evolve_driving(DrivingState const& start, std::span<double const> dW, double dt,
                    double sigma, std::span<DrivingState> out);

}  // namespace rsm
