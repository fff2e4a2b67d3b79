#include "fch/diagnostics.hpp"
#include "fch/equilibrium.hpp"
#include "fch/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fch;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) {
        t[i] = a + (b - a) * i / (n - 1);
    }
    return t;
}

EnergyContext make_ctx(int n)
{
    return EnergyContext(OperatorSet(build_uniform_mesh(-1.0, 1.0, n), FracExponents(0.5, 0.5)), Potential::double_well(4));
}

const Trajectory& settled_run()
{
    static const EnergyContext ctx = make_ctx(32);
    static const Trajectory traj = [] {
        const FemVector u0 =
            interpolate(ctx.ops().mesh(), [](double x) { return 0.3 * std::sin(std::numbers::pi * x); });
        return evolve(ctx, StepConfig{2e-2}, u0, EvolveOptions{20.0, 5});
    }();
    return traj;
}

} // namespace

TEST(DecayFit, SyntheticExponential)
{
    const double e_phi = -0.3;
    const auto t = linspace(0.0, 10.0, 201);
    std::vector<double> e;
    for (double x : t) {
        e.push_back(std::exp(-2.0 * x) + e_phi);
    }
    const LojFit fit = decay_fit(t, e, e_phi, 0.5);
    EXPECT_EQ(fit.mode, FitMode::exponential);
    EXPECT_NEAR(fit.rate, 1.0, 0.01);
    EXPECT_GT(fit.r_squared, 0.999);
    EXPECT_GE(fit.decades, 3.0);
    EXPECT_FALSE(fit.degenerate);
    EXPECT_EQ(fit.e_limit, e_phi);
    EXPECT_EQ(fit.t_start, 0.0);
    EXPECT_LE(fit.t_end, 10.0);
    EXPECT_EQ(fit.samples, static_cast<int>(fit.window_t.size()));
}

TEST(DecayFit, SyntheticAlgebraic)
{
    const auto t = linspace(0.0, 999.0, 1000);
    std::vector<double> e;
    for (double x : t) {
        e.push_back(std::pow(1.0 + x, -2.0));
    }
    const LojFit fit = decay_fit(t, e, 0.0, 0.5);
    EXPECT_EQ(fit.mode, FitMode::algebraic);
    EXPECT_NEAR(fit.rate, -1.0, 0.02);
    EXPECT_GT(fit.r_squared, fit.exponential_r_squared);
}

TEST(DecayFit, TransientIsSkippedWithTMin)
{
    const auto t = linspace(0.0, 10.0, 201);
    std::vector<double> e;
    for (double x : t) {
        e.push_back(x < 1.0 ? 5.0 - x : std::exp(-4.0 * x));
    }
    DecayFitOptions opts;
    opts.t_min = 1.0;
    const LojFit fit = decay_fit(t, e, 0.0, 0.5, opts);
    EXPECT_GE(fit.t_start, 1.0);
    EXPECT_NEAR(fit.rate, 2.0, 0.02);
}

TEST(DecayFit, WindowStopsAtNoiseFloor)
{
    const auto t = linspace(0.0, 40.0, 401);
    std::vector<double> e;
    for (double x : t) {
        e.push_back(1.0 + std::exp(-2.0 * x));
    }
    const LojFit fit = decay_fit(t, e, 1.0, 0.5);
    EXPECT_LT(fit.t_end, 40.0);
    for (double h : fit.window_h) {
        EXPECT_GT(h * h, fit.noise_floor);
    }
    EXPECT_NEAR(fit.rate, 1.0, 0.01);
}

TEST(DecayFit, RefusesShortOrFlatWindows)
{
    const auto t = linspace(0.0, 1.0, 5);
    std::vector<double> e(5);
    for (int i = 0; i < 5; ++i) {
        e[i] = std::exp(-10.0 * t[i]);
    }
    EXPECT_THROW((void)decay_fit(t, e, 0.0, 0.5), NumericalError);
    const auto t2 = linspace(0.0, 1.0, 50);
    std::vector<double> flat(50);
    for (int i = 0; i < 50; ++i) {
        flat[i] = 1.0 + 0.01 * std::exp(-t2[i]);
    }
    EXPECT_THROW((void)decay_fit(t2, flat, 1.0, 0.5), NumericalError);
    EXPECT_THROW((void)decay_fit(t2, flat, 1.0, 0.7), ConfigError);
    EXPECT_THROW((void)decay_fit(t, flat, 1.0, 0.5), NumericalError);
}

TEST(DecayFit, AllZeroGapIsDegenerate)
{
    const auto t = linspace(0.0, 1.0, 20);
    const std::vector<double> e(20, -0.25);
    const LojFit fit = decay_fit(t, e, -0.25, 0.5);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_EQ(fit.clipped, 0);
}

TEST(DecayFit, NegativeGapsAreClipped)
{
    const auto t = linspace(0.0, 1.0, 20);
    std::vector<double> e(20, -1e-14);
    const LojFit fit = decay_fit(t, e, 0.0, 0.5);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_GE(fit.clipped, 1);
}

TEST(DecayFit, SettledRunIsExponential)
{
    const Trajectory& traj = settled_run();
    DecayFitOptions opts;
    opts.t_min = 0.5;
    const LojFit fit = decay_fit(traj, 0.0, 0.5, opts);
    EXPECT_EQ(fit.mode, FitMode::exponential);
    EXPECT_GE(fit.r_squared, 0.99);
    EXPECT_GE(fit.decades, 3.0);
}

TEST(OmegaLimit, ConstantTrajectoryAtEquilibrium)
{
    const EnergyContext ctx = make_ctx(16);
    const Trajectory traj = evolve(ctx, StepConfig{1e-2}, FemVector::Zero(15), EvolveOptions{0.2, 5});
    const auto d = omega_limit_distances(traj, FemVector::Zero(15), ctx.ops());
    ASSERT_EQ(d.size(), traj.states.size());
    for (const auto& s : d) {
        EXPECT_LT(s.distance, 1e-10);
    }
    EXPECT_THROW((void)omega_limit_distances(traj, FemVector::Zero(3), ctx.ops()), NumericalError);
}

TEST(OmegaLimit, SettledRunConvergesToZero)
{
    const EnergyContext ctx = make_ctx(32);
    const Trajectory& traj = settled_run();
    const auto d = omega_limit_distances(traj, FemVector::Zero(31), ctx.ops());
    EXPECT_LT(d.back().distance, 1e-6);
    // Tail is nonincreasing after the last local maximum.
    std::size_t last_max = 0;
    for (std::size_t k = 1; k + 1 < d.size(); ++k) {
        if (d[k].distance > d[k - 1].distance && d[k].distance >= d[k + 1].distance) {
            last_max = k;
        }
    }
    for (std::size_t k = last_max + 1; k < d.size(); ++k) {
        EXPECT_LE(d[k].distance, d[k - 1].distance + 1e-8);
    }
    // Against a shifted candidate the distance plateaus at a positive value.
    const FemVector wrong = FemVector::Constant(31, 0.1);
    const auto dw = omega_limit_distances(traj, wrong, ctx.ops());
    const double plateau = ctx.ops().xnorm_sigma(wrong);
    EXPECT_NEAR(dw.back().distance, plateau, 1e-6);
    EXPECT_GT(dw.back().distance, 0.1);
}

TEST(EnergyMonotone, RecordedTrajectory)
{
    const auto e = settled_run().energies();
    for (std::size_t k = 1; k < e.size(); ++k) {
        EXPECT_LE(e[k], e[k - 1] + 1e-9);
    }
}

TEST(Poincare, HoldsWithBoundFromShellVolume)
{
    const OperatorSet ops(build_uniform_mesh(-1.0, 1.0, 64), FracExponents(0.5, 0.5));
    const PoincareReport rep = poincare_report(ops, 1000);
    EXPECT_DOUBLE_EQ(rep.radius, 1.0);
    EXPECT_NEAR(rep.bound, 2.0 / 9.0, 1e-15);
    EXPECT_TRUE(rep.holds);
    EXPECT_GE(rep.min_ratio, rep.bound);
    EXPECT_EQ(rep.trials, 1000);
    EXPECT_EQ(rep.localized, 20);
    EXPECT_EQ(rep.skipped, 0);
    // The lowest pencil eigenvector is the sharpest case.
    const double l1 = rayleigh_lambda1(ops.a_s(), ops.mass());
    const double sharpest = 2.0 / ops.c_s() * l1;
    EXPECT_LE(sharpest, rep.min_ratio * (1.0 + 1e-12));
    EXPECT_GT(sharpest, rep.bound);
}

TEST(Poincare, BoundShrinksOnLargerDomains)
{
    const OperatorSet ops(build_uniform_mesh(-4.0, 4.0, 64), FracExponents(0.5, 0.5));
    const PoincareReport rep = poincare_report(ops, 200);
    EXPECT_NEAR(rep.bound, 2.0 / 81.0, 1e-15);
    EXPECT_TRUE(rep.holds);
}

TEST(Smoothing, StationaryProductsVanish)
{
    const EnergyContext ctx = make_ctx(16);
    const Trajectory traj = evolve(ctx, StepConfig{1e-2}, FemVector::Zero(15), EvolveOptions{1.0, 10});
    const auto rep = smoothing_report(traj, {0.1, 0.2, 0.5, 1.0});
    ASSERT_EQ(rep.size(), 4u);
    for (const auto& [t0, prod] : rep) {
        EXPECT_EQ(prod, 0.0) << "t0 " << t0;
    }
}

TEST(Smoothing, SmoothDataProductsBounded)
{
    // Smooth data: the chemical potential never exceeds its initial size,
    // so each product is at most t0 |w(0)|^2.
    const Trajectory& traj = settled_run();
    const double w0 = traj.initial.w_xnorm;
    const auto rep = smoothing_report(traj, {0.1, 0.2, 0.5, 1.0});
    for (const auto& [t0, prod] : rep) {
        EXPECT_TRUE(std::isfinite(prod));
        EXPECT_GT(prod, 0.0);
        EXPECT_LE(prod, t0 * w0 * w0 * (1.0 + 1e-9)) << "t0 " << t0;
    }
}

TEST(Duality, IdentityHolds)
{
    const OperatorSet ops(build_uniform_mesh(-1.0, 1.0, 64), FracExponents(0.25, 0.75));
    EXPECT_LT(duality_check(ops.a_s(), 100).max_rel_error, 1e-10);
    EXPECT_LT(duality_check(ops.a_sigma(), 100).max_rel_error, 1e-10);
    EXPECT_EQ(duality_check(ops.a_s(), 7).trials, 7);
}

TEST(Yosida, SuiteHasNoViolations)
{
    const YosidaSuiteReport rep = yosida_suite(Potential::double_well(4), 1e-2, 1000);
    EXPECT_EQ(rep.samples, 1000);
    EXPECT_EQ(rep.violations(), 0);
    ASSERT_EQ(rep.max_error.size(), 3u);
    EXPECT_GT(rep.max_error[0], rep.max_error[1]);
    EXPECT_GT(rep.max_error[1], rep.max_error[2]);
}
