#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rsm/dynamics.hpp"
#include "rsm/philox.hpp"

using namespace rsm;

namespace {

// dx = lambda x dt + sigma dB, one component, slow so the window applies.
struct Linear1D
{
    static constexpr int dim = 1;
    static constexpr int slow_dim = 1;
    using State = Vec<1>;

    double lambda = -1.0;
    double sigma = 0.0;

    State drift(State const& s, DrivingState const&) const { return State(lambda * s[0]); }
    State diffusion() const { return State(sigma); }
    double noise_intensity() const { return sigma; }
};

struct Linear1DJac : Linear1D
{
    Mat<1> jacobian(State const&, DrivingState const&) const { return Mat<1>(lambda); }
};

// dx = (1 + x^2) dt: the implicit equation has no real root for large dt.
struct Riccati
{
    static constexpr int dim = 1;
    static constexpr int slow_dim = 1;
    using State = Vec<1>;

    State drift(State const& s, DrivingState const&) const { return State(1.0 + s[0] * s[0]); }
    State diffusion() const { return State::Zero(); }
    double noise_intensity() const { return 0.0; }
};

static_assert(SdeModel<Linear1D>);
static_assert(!HasJacobian<Linear1D>);
static_assert(HasJacobian<Linear1DJac>);
static_assert(HasJacobian<ExampleSystem>);
static_assert(HasJacobian<TransformedSystem>);

SystemParams params(double a = 0.6, double sigma = 0.1, double eps = 0.01)
{
    return {eps, sigma, a};
}

SlowFastSystem<1, 1> generic_example(SystemParams const& p)
{
    return SlowFastSystem<1, 1>(
        [](Vec<1> const& x, Vec<1> const& y, SystemParams const& q) {
            return Vec<1>(-q.eps * (q.a * x[0] + y[0] / (1.0 + x[0] * x[0])));
        },
        [](Vec<1> const& x, Vec<1> const& y, SystemParams const&) {
            return Vec<1>(-2.0 * y[0] - std::sin(x[0]));
        },
        p);
}

double sup_distance(Trajectory<2> const& a, Trajectory<2> const& b)
{
    double d = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        d = std::max(d, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace

TEST(Params, Validation)
{
    EXPECT_NO_THROW(params().validate());
    EXPECT_THROW(params(0.6, 0.1, 0.0).validate(), std::invalid_argument);
    EXPECT_THROW(params(0.6, -0.1).validate(), std::invalid_argument);
    EXPECT_THROW(params(NAN).validate(), std::invalid_argument);
    EXPECT_THROW(ExampleSystem(params(0.6, 0.1, 0.0)), std::invalid_argument);
}

TEST(Scheme, NamesRoundTrip)
{
    EXPECT_EQ(parse_scheme("explicit"), Scheme::explicit_euler);
    EXPECT_EQ(parse_scheme("implicit"), Scheme::implicit_euler);
    EXPECT_EQ(to_string(Scheme::implicit_euler), "implicit");
    EXPECT_THROW(parse_scheme("rk4"), std::invalid_argument);
}

TEST(Example, DriftValues)
{
    ExampleSystem const m(params(1.0));
    DrivingState const d;
    auto f = m.drift({0.0, 0.0}, d);
    EXPECT_EQ(f[0], 0.0);
    EXPECT_EQ(f[1], 0.0);

    f = m.drift({0.0, 1.0}, d);
    EXPECT_DOUBLE_EQ(f[0], -0.01);
    EXPECT_DOUBLE_EQ(f[1], -2.0);

    f = m.drift({std::numbers::pi / 2, 0.0}, d);
    EXPECT_DOUBLE_EQ(f[0], -0.01 * std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(f[1], -1.0);

    EXPECT_EQ(m.diffusion(), Vec<2>(0.0, 0.1));
}

TEST(Transformed, DriftReadsZ)
{
    auto const p = params(1.0);
    TransformedSystem const t(p);
    ExampleSystem const e(p);
    DrivingState d;
    EXPECT_EQ(t.drift({0.3, 0.7}, d), e.drift({0.3, 0.7}, d));
    d.z = 1.0;
    auto const f = t.drift({0.0, 0.0}, d);
    EXPECT_DOUBLE_EQ(f[0], -0.01);
    EXPECT_EQ(f[1], 0.0);
    EXPECT_EQ(t.diffusion(), Vec<2>::Zero());
}

TEST(Jacobian, AnalyticMatchesCentralDifferences)
{
    auto const p = params(0.37, 0.1, 0.05);
    ExampleSystem const e(p);
    TransformedSystem const t(p);
    auto const g = generic_example(p);
    DrivingState d;
    d.z = 0.2;
    for (double x : {-3.0, -0.4, 0.0, 1.1, 6.5})
        for (double y : {-1.0, 0.0, 0.8})
        {
            Vec<2> const s(x, y);
            EXPECT_LT((drift_jacobian(e, s, d) - drift_jacobian(g, s, d)).cwiseAbs().maxCoeff(),
                      1e-8);
            // The transformed drift at (u, v) with z equals the example at (u, v + z).
            EXPECT_LT((drift_jacobian(t, s, d) - drift_jacobian(e, Vec<2>(x, y + d.z), d))
                          .cwiseAbs()
                          .maxCoeff(),
                      1e-14);
        }
}

TEST(Steps, ZeroDriftZeroNoiseIsIdentity)
{
    Linear1D const m{0.0, 0.0};
    Vec<1> const s(2.5);
    EXPECT_EQ(em_step(m, s, {}, 0.0, 0.01), s);
    EXPECT_EQ(implicit_em_step(m, s, {}, 0.0, 0.01), s);
}

TEST(Steps, LinearClosedForms)
{
    double const lambda = -3.0, dt = 0.01, x0 = 1.7, dW = 0.04, sigma = 0.5;
    double const implicit_quiet = x0 / (1 - lambda * dt);
    double const implicit_noisy = (x0 + sigma * dW) / (1 - lambda * dt);

    EXPECT_NEAR(em_step(Linear1D{lambda, 0.0}, Vec<1>(x0), {}, 0.0, dt)[0],
                x0 * (1 + lambda * dt), 1e-15);

    // Analytic Jacobian: one Newton step lands on the root up to rounding.
    EXPECT_NEAR(implicit_em_step(Linear1DJac{{lambda, 0.0}}, Vec<1>(x0), {}, 0.0, dt)[0],
                implicit_quiet, 4e-16 * implicit_quiet);
    EXPECT_NEAR(implicit_em_step(Linear1DJac{{lambda, sigma}}, Vec<1>(x0), {}, dW, dt)[0],
                implicit_noisy, 4e-16 * implicit_noisy);

    // Finite-difference Jacobian: accurate to the Newton residual tolerance.
    EXPECT_NEAR(implicit_em_step(Linear1D{lambda, 0.0}, Vec<1>(x0), {}, 0.0, dt)[0],
                implicit_quiet, 1e-12);
    EXPECT_NEAR(implicit_em_step(Linear1D{lambda, sigma}, Vec<1>(x0), {}, dW, dt)[0],
                implicit_noisy, 1e-12);
}

TEST(Steps, ImplicitSolvesItsEquation)
{
    auto const p = params();
    ExampleSystem const m(p);
    DrivingState d;
    d.z = 0.03;
    Vec<2> const s(4.0, -0.6);
    double const dt = 0.01, dW = 0.07;
    auto const next = implicit_em_step(m, s, d, dW, dt);
    Vec<2> const residual = next - m.drift(next, d) * dt - s - m.diffusion() * dW;
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Steps, ImplicitExplicitLocalDifferenceIsSecondOrder)
{
    ExampleSystem const m(params());
    Vec<2> const s(1.0, 0.5);
    auto gap = [&](double dt) {
        return (implicit_em_step(m, s, {}, 0.0, dt) - em_step(m, s, {}, 0.0, dt))
            .cwiseAbs()
            .maxCoeff();
    };
    double const r = gap(0.01) / gap(0.005);
    EXPECT_GT(r, 3.6);
    EXPECT_LT(r, 4.4);
}

TEST(Steps, NewtonFailureCarriesDiagnostics)
{
    NewtonOptions const opts{1e-12, 5};
    try
    {
        implicit_em_step(Riccati{}, Vec<1>(1.0), {}, 0.0, 1.0, opts);
        FAIL() << "expected NewtonFailure";
    }
    catch (NewtonFailure const& e)
    {
        EXPECT_LE(e.iterations(), 5);
        EXPECT_TRUE(!std::isfinite(e.residual()) || e.residual() > 1e-12);
    }
    EXPECT_THROW((NewtonOptions{0.0, 5}.validate()), std::invalid_argument);
    EXPECT_THROW((NewtonOptions{1e-12, 0}.validate()), std::invalid_argument);
}

TEST(Steps, GenericSystemMatchesAnalytic)
{
    auto const p = params();
    auto const path = make_path(3, 0.0, 50.0, 0.01);
    auto const d0 = init_stationary(3, p.sigma);
    auto const a = simulate(ExampleSystem(p), Vec<2>(6.5, -1.0), path, d0);
    auto const b = simulate(generic_example(p), Vec<2>(6.5, -1.0), path, d0);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_LT(sup_distance(a, b), 1e-9);
}

TEST(Generic, RequiresBothDrifts)
{
    using S = SlowFastSystem<1, 1>;
    EXPECT_THROW(S(nullptr, [](Vec<1> const&, Vec<1> const& y, SystemParams const&) { return y; },
                   params()),
                 std::invalid_argument);
}

TEST(Simulate, Deterministic)
{
    auto const p = params();
    auto const path = make_path(12, 0.0, 100.0, 0.01);
    auto const d0 = init_stationary(12, p.sigma);
    auto const a = simulate(ExampleSystem(p), Vec<2>(7.5, -1.0), path, d0);
    auto const b = simulate(ExampleSystem(p), Vec<2>(7.5, -1.0), path, d0);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.driving, b.driving);
}

TEST(Simulate, ThinKeepsFirstLastAndEveryNth)
{
    auto const p = params();
    auto const path = make_path(4, 0.0, 1.0, 0.01);
    auto const d0 = init_stationary(4, p.sigma);
    SimulateOptions opts;
    auto const all = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0, opts);
    opts.thin = 7;
    auto const thin = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0, opts);

    ASSERT_EQ(all.size(), 101u);
    ASSERT_EQ(thin.size(), 16u);
    EXPECT_EQ(thin.states.front(), all.states.front());
    EXPECT_EQ(thin.states.back(), all.states.back());
    EXPECT_DOUBLE_EQ(thin.times.back(), 1.0);
    for (std::size_t i = 1; i + 1 < thin.size(); ++i)
        EXPECT_EQ(thin.states[i], all.states[7 * i]);

    opts.thin = 0;
    EXPECT_THROW(simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0, opts),
                 std::invalid_argument);
}

TEST(Simulate, EscapeStopsAtFirstExit)
{
    // x_k = 1.01^k first exceeds 50 at k = 394.
    Linear1D const grow{1.0, 0.0};
    SimulateOptions opts;
    opts.scheme = Scheme::explicit_euler;
    auto const traj = simulate(grow, Vec<1>(1.0), make_path(1, 0.0, 10.0, 0.01), {}, opts);
    EXPECT_TRUE(traj.divergent);
    EXPECT_NEAR(traj.times.back(), 3.94, 1e-12);
    EXPECT_GT(traj.states.back()[0], 50.0);
    EXPECT_LE(traj.states[traj.size() - 2][0], 50.0);
}

TEST(Simulate, NonFiniteCountsAsEscape)
{
    Riccati const blow;
    SimulateOptions opts;
    opts.scheme = Scheme::explicit_euler;
    opts.window = {-1e300, 1e300};
    auto const traj = simulate(blow, Vec<1>(1e200), make_path(1, 0.0, 1.0, 0.5), {}, opts);
    EXPECT_TRUE(traj.divergent);
}

TEST(Simulate, SettlesForPositiveA)
{
    auto const p = params(0.6);
    auto const path = make_path(1, 0.0, 2000.0, 0.01);
    auto const traj = simulate(ExampleSystem(p), Vec<2>(17.0, -1.0), path,
                               init_stationary(1, p.sigma));
    EXPECT_FALSE(traj.divergent);
    double const end = traj.states.back()[0];
    double drift = 0;
    for (std::size_t k = traj.size() - 20001; k < traj.size(); ++k)
        drift = std::max(drift, std::abs(traj.states[k][0] - end));
    EXPECT_LT(drift, 0.05);
    EXPECT_LT(std::abs(end), 1.0);
}

TEST(Simulate, EscapesForNegativeA)
{
    auto const p = params(-0.006);
    auto const path = make_path(1, 0.0, 150000.0, 0.01);
    SimulateOptions opts;
    opts.thin = 1000;
    auto const traj = simulate(ExampleSystem(p), Vec<2>(0.5, -1.0), path,
                               init_stationary(1, p.sigma), opts);
    EXPECT_TRUE(traj.divergent);
    EXPECT_LT(traj.times.back(), 150000.0);
}

TEST(Simulate, FastVariableContractsAtRateTwo)
{
    // With eps tiny the slow variable is frozen and y - (-sin x / 2) decays
    // like (1 + 2 dt)^{-t/dt} under the implicit scheme.
    auto const p = params(0.6, 0.0, 1e-12);
    double const x0 = 1.0;
    auto const traj = simulate(ExampleSystem(p), Vec<2>(x0, 1.0), make_path(1, 0.0, 5.0, 0.01),
                               {});
    std::vector<double> t, logd;
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
        t.push_back(traj.times[k]);
        logd.push_back(std::log(std::abs(traj.states[k][1] + std::sin(x0) / 2)));
    }
    double const n = static_cast<double>(t.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        st += t[k];
        sl += logd[k];
        stt += t[k] * t[k];
        stl += t[k] * logd[k];
    }
    double const slope = (n * stl - st * sl) / (n * stt - st * st);
    EXPECT_NEAR(slope, -2.0, 0.1);
}

TEST(Conjugacy, ExplicitSchemeIsExact)
{
    // With the driving frozen at the start of each step, explicit Euler on
    // (x, y) and on (u, v) = (x, y - z) are the same recursion.
    auto const p = params();
    auto const path = make_path(6, 0.0, 100.0, 0.01);
    auto const d0 = init_stationary(6, p.sigma);
    SimulateOptions opts;
    opts.scheme = Scheme::explicit_euler;
    auto const full = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0, opts);
    auto const tr = simulate(TransformedSystem(p), Vec<2>(1.0, -1.0 - d0.z), path, d0, opts);
    double worst = 0;
    for (std::size_t k = 0; k < full.size(); ++k)
    {
        worst = std::max(worst, std::abs(full.states[k][0] - tr.states[k][0]));
        worst = std::max(worst, std::abs(full.states[k][1] - (tr.states[k][1] + tr.driving[k].z)));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Conjugacy, ImplicitSchemeConvergesAtFirstOrder)
{
    auto const p = params();
    auto const fine = make_path(1, 0.0, 20.0, 0.0025);
    auto const d0 = init_stationary(1, p.sigma);
    std::vector<double> gaps;
    for (std::size_t factor : {4u, 2u, 1u})
    {
        auto const path = fine.coarsened(factor);
        auto const full = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0);
        auto const tr = simulate(TransformedSystem(p), Vec<2>(1.0, -1.0 - d0.z), path, d0);
        double worst = 0;
        for (std::size_t k = 0; k < full.size(); ++k)
            worst = std::max({worst, std::abs(full.states[k][0] - tr.states[k][0]),
                              std::abs(full.states[k][1] - tr.states[k][1] - tr.driving[k].z)});
        gaps.push_back(worst);
    }
    EXPECT_GT(gaps[0] / gaps[1], 1.7);
    EXPECT_LT(gaps[0] / gaps[1], 2.3);
    EXPECT_GT(gaps[1] / gaps[2], 1.7);
    EXPECT_LT(gaps[1] / gaps[2], 2.3);
}

TEST(Schemes, ImplicitAndExplicitConverge)
{
    auto const p = params();
    auto const fine = make_path(2, 0.0, 100.0, 0.00125);
    auto const d0 = init_stationary(2, p.sigma);
    std::vector<double> gaps;
    for (std::size_t factor : {8u, 4u, 2u})
    {
        auto const path = fine.coarsened(factor);
        SimulateOptions ex;
        ex.scheme = Scheme::explicit_euler;
        auto const a = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0);
        auto const b = simulate(ExampleSystem(p), Vec<2>(1.0, -1.0), path, d0, ex);
        gaps.push_back(sup_distance(a, b));
    }
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
    {
        EXPECT_GT(gaps[i] / gaps[i + 1], 1.7);
        EXPECT_LT(gaps[i] / gaps[i + 1], 2.3);
    }
}

TEST(Schemes, StrongErrorIsFirstOrder)
{
    // Mean |x_dt(1) - x_ref(1)| on shared paths against a fine reference.
    auto const p = params(0.6, 0.1, 0.01);
    constexpr int paths = 64;
    std::vector<double> err(3, 0.0);
    for (int i = 0; i < paths; ++i)
    {
        auto const fine = make_path(derive_seed(31, i), 0.0, 1.0, 0.000625);
        auto const d0 = init_stationary(derive_seed(31, i), p.sigma);
        Vec<2> const x0(1.0, -1.0);
        for (auto scheme : {Scheme::explicit_euler, Scheme::implicit_euler})
        {
            SimulateOptions opts;
            opts.scheme = scheme;
            auto const ref = simulate(ExampleSystem(p), x0, fine, d0, opts).states.back();
            int level = 0;
            for (std::size_t factor : {64u, 32u, 16u})
            {
                auto const x = simulate(ExampleSystem(p), x0, fine.coarsened(factor), d0, opts);
                err[level++] += (x.states.back() - ref).cwiseAbs().maxCoeff() / (2 * paths);
            }
        }
    }
    for (std::size_t i = 0; i + 1 < err.size(); ++i)
    {
        double const r = err[i] / err[i + 1];
        EXPECT_GT(r, 1.7) << "level " << i;
        EXPECT_LT(r, 2.5) << "level " << i;
    }
}
