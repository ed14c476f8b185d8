#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsm/dynamics.hpp"
#include "rsm/noise.hpp"

namespace rsm {

enum class SystemKind
{
    full,     ///< the two-dimensional slow-fast SDE
    reduced,  ///< the one-dimensional system on the first-order slow manifold
};

std::string to_string(SystemKind kind);

/// How stable equilibrium states are detected from an ensemble of
/// trajectories sharing one noise path.
///
/// A trajectory counts as settled when its slow component moves by at most
/// settle_tol over the final settle_window. Settled final values closer than
/// cluster_gap are merged. Counts are relative to the initial values probed.
struct DetectionConfig
{
    std::vector<double> initial_x{17.0, 7.5, 6.5, 0.5, -0.5, -6.5, -7.5, -17.0};
    double initial_y = -1.0;
    double horizon = 2000.0;
    /// When positive, replaces `horizon` for |a| <= extend_below.
    double extended_horizon = 0.0;
    double extend_below = 0.001;
    double settle_window = 200.0;
    double settle_tol = 0.05;
    double cluster_gap = 1.0;
    EscapeWindow escape_window;
    double dt = 0.01;
    Scheme full_scheme = Scheme::implicit_euler;
    Scheme reduced_scheme = Scheme::explicit_euler;
    NewtonOptions newton;
    StationaryInit init;

    double horizon_for(double a) const;
    void validate() const;
};

enum class Outcome
{
    settled,
    unsettled,
    divergent,
};

std::string to_string(Outcome o);

enum class EntryStatus
{
    ok,
    inconclusive,  ///< nothing settled and nothing escaped
    failed,        ///< numerical failure (e.g. Newton)
};

std::string to_string(EntryStatus s);

struct EquilibriumReport
{
    double a = 0;
    SystemKind kind = SystemKind::full;
    double horizon = 0;
    std::size_t count = 0;
    std::vector<double> positions;   ///< cluster means, ascending
    std::size_t divergent = 0;
    std::size_t unsettled = 0;
    std::vector<Outcome> outcomes;   ///< per initial value, in input order
    std::vector<double> final_x;     ///< per initial value; last in-window value if divergent
    std::vector<double> escape_time; ///< per initial value; NaN unless divergent
    DrivingState final_driving;      ///< shared driving at the horizon
    EntryStatus status = EntryStatus::ok;
    std::string message;
};

class InconclusiveDetection : public std::runtime_error
{
  public:
    InconclusiveDetection(double a, double horizon, double suggested_horizon);

    double suggested_horizon() const { return suggested_; }

  private:
    double suggested_;
};

/// Sorts settled final values and merges neighbours closer than `gap`.
/// Returns the cluster means in ascending order.
std::vector<double> cluster_positions(std::vector<double> values, double gap);

/// Runs one trajectory per initial value on the same noise path (seeded by
/// `seed`, starting from a stationary driving draw) and clusters the settled
/// end points. `params.a` is replaced by `a`.
/// Throws InconclusiveDetection when every trajectory is unsettled.
EquilibriumReport detect_equilibria(SystemKind kind, double a, SystemParams const& params,
                                    DetectionConfig const& cfg, std::uint64_t seed);

struct SweepEntry
{
    double a = 0;
    EquilibriumReport full;
    EquilibriumReport reduced;
    bool counts_match = false;
    /// Largest |x_full - x_reduced| over clusters paired in order; NaN when
    /// the counts differ.
    double max_position_gap = 0;
};

struct BifurcationReport
{
    std::vector<SweepEntry> sweep;
    std::uint64_t seed = 0;
    SystemParams params;
    DetectionConfig config;
};

/// Detects equilibria of the full and reduced systems for every a, both on
/// the same seed. Work is spread over `threads` workers; the result does not
/// depend on the thread count. Failed entries are flagged, never thrown.
BifurcationReport sweep(std::span<double const> a_values, SystemParams const& params,
                        DetectionConfig const& cfg, std::uint64_t seed, unsigned threads = 1);

struct LiftSample
{
    double t;
    double distance;
};

struct LiftCheck
{
    double x_star = 0;              ///< reduced equilibrium at the horizon
    double y_star = 0;              ///< its lift onto the manifold
    bool attracted = false;
    double final_distance = 0;
    std::vector<LiftSample> series; ///< distance to the moving lifted state
};

struct LiftAttractionResult
{
    bool attracted = false;  ///< all equilibria attracted
    double threshold = 0;    ///< 2 |perturbation| / e
    double duration = 0;
    std::vector<LiftCheck> checks;
};

/// Lifts every reduced equilibrium found by detect_equilibria onto the
/// manifold of `order`, starts the full system `perturbation` away in y and
/// follows both systems on the continuation of the shared noise path for
/// `duration`. An equilibrium is attracted when the full trajectory ends
/// within 2 |perturbation| / e of the lifted reduced trajectory.
LiftAttractionResult verify_lift_attraction(double a, SystemParams const& params,
                                            DetectionConfig const& cfg, std::uint64_t seed,
                                            double perturbation, int order = 1,
                                            double duration = 2.5);

}  // namespace rsm
