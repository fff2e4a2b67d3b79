#include "fch/energy.hpp"
#include "fch/errors.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <random>

using namespace fch;

namespace {

EnergyContext make_ctx(int n, Potential pot = Potential::double_well(4.0), double a = -1.0, double b = 1.0)
{
    return EnergyContext(OperatorSet(build_uniform_mesh(a, b, n), FracExponents(0.5, 0.5)), std::move(pot));
}

FemVector random_state(int n, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    FemVector v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = u(rng);
    }
    return v;
}

/// ∫ g_hat(v_h) with a 30-point rule per element.
double reference_potential_energy(const EnergyContext& ctx, const FemVector& v)
{
    const FracMesh& m = ctx.ops().mesh();
    double sum = 0.0;
    for (int e = 0; e < m.n_elems(); ++e) {
        const double l = FracMesh::nodal_value(v, e, m.n_elems());
        const double r = FracMesh::nodal_value(v, e + 1, m.n_elems());
        auto f = [&](double xi) { return ctx.potential().g_hat(l + (r - l) * xi); };
        sum += m.h() * boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0);
    }
    return sum;
}

} // namespace

TEST(Energy, ZeroState)
{
    const EnergyContext ctx = make_ctx(16);
    EXPECT_EQ(energy(ctx, FemVector::Zero(15)), 0.0);
    EXPECT_EQ(energy_gradient(ctx, FemVector::Zero(15)), FemVector::Zero(15));
}

TEST(Energy, QuadraticPartAndQuadratureRefinement)
{
    const EnergyContext ctx = make_ctx(8);
    const FemVector ones = FemVector::Ones(7);
    const double quad = 0.5 * ones.dot(ctx.ops().a_sigma() * ones);
    const double pot = potential_energy(ctx, ones);
    EXPECT_NEAR(energy(ctx, ones), quad + pot, 1e-14);
    const double ref = reference_potential_energy(ctx, ones);
    EXPECT_LT(std::abs(pot - ref), 1e-8 * std::abs(ref));
}

TEST(Energy, ZeroPotentialIsHalfSquaredNorm)
{
    const EnergyContext ctx = make_ctx(32, Potential::zero());
    std::mt19937_64 rng(2);
    for (int k = 0; k < 10; ++k) {
        const FemVector v = random_state(31, rng);
        const double x = xnorm(ctx.ops().a_sigma(), v);
        EXPECT_NEAR(energy(ctx, v), 0.5 * x * x, 1e-14 * x * x);
    }
}

TEST(Energy, QuadraticTermScalesByFour)
{
    const EnergyContext ctx = make_ctx(16);
    std::mt19937_64 rng(4);
    const FemVector v = random_state(15, rng);
    const double q1 = energy(ctx, v) - potential_energy(ctx, v);
    const double q2 = energy(ctx, 2.0 * v) - potential_energy(ctx, 2.0 * v);
    EXPECT_NEAR(q2, 4.0 * q1, 1e-13 * q2);
}

TEST(Energy, GradientMatchesFiniteDifferences)
{
    const EnergyContext ctx = make_ctx(24);
    const int n = 23;
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const FemVector v = random_state(n, rng, 1.5);
        const FemVector g = energy_gradient(ctx, v);
        const double gscale = g.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
            const double d = 1e-6 * (1.0 + std::abs(v[i]));
            FemVector vp = v;
            FemVector vm = v;
            vp[i] += d;
            vm[i] -= d;
            const double fd = (energy(ctx, vp) - energy(ctx, vm)) / (2 * d);
            EXPECT_NEAR(fd, g[i], 1e-6 * std::max(std::abs(g[i]), 1e-3 * gscale));
        }
    }
}

TEST(Energy, JacobianMatchesLoadDifferences)
{
    const EnergyContext ctx = make_ctx(16);
    std::mt19937_64 rng(6);
    const FemVector v = random_state(15, rng);
    const Matrix j = jacobian_beta(ctx, v);
    EXPECT_TRUE(j == j.transpose());
    for (int i = 0; i < 15; ++i) {
        FemVector vp = v;
        FemVector vm = v;
        vp[i] += 1e-6;
        vm[i] -= 1e-6;
        const FemVector col = (load_beta(ctx, vp) - load_beta(ctx, vm)) / 2e-6;
        EXPECT_LT((col - j.col(i)).cwiseAbs().maxCoeff(), 1e-7);
    }
    EXPECT_LT((jacobian_g(ctx, v) - (j - ctx.lambda() * ctx.ops().mass())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Energy, YosidaEnergyIsConsistent)
{
    const EnergyContext base = make_ctx(16);
    const EnergyContext ctx = base.with_yosida(YosidaParams{0.05});
    std::mt19937_64 rng(7);
    const FemVector v = random_state(15, rng, 2.0);
    const FemVector g = energy_gradient(ctx, v);
    for (int i = 0; i < 15; ++i) {
        const double d = 1e-6;
        FemVector vp = v;
        FemVector vm = v;
        vp[i] += d;
        vm[i] -= d;
        EXPECT_NEAR((energy(ctx, vp) - energy(ctx, vm)) / (2 * d), g[i], 1e-6 * (1 + std::abs(g[i])));
    }
    // The Moreau envelope lies below the original primitive.
    EXPECT_LE(energy(ctx, v), energy(base, v) + 1e-14);
}

TEST(Energy, RejectsLowQuadratureOrder)
{
    EXPECT_THROW(EnergyContext(OperatorSet(build_uniform_mesh(-1, 1, 4), FracExponents(0.5, 0.5)),
                               Potential::zero(), 1),
                 ConfigError);
}

TEST(Energy, OverflowSurfaces)
{
    const EnergyContext ctx = make_ctx(8);
    const FemVector huge = FemVector::Constant(7, 1e200);
    EXPECT_ANY_THROW((void)energy(ctx, huge));
}

TEST(Coercivity, ProbeReportsFiniteConstant)
{
    const EnergyContext ctx = make_ctx(64);
    const double l1 = rayleigh_lambda1(ctx.ops().a_sigma(), ctx.ops().mass());
    const double kappa = 0.5 * l1;
    const CoercivityReport rep = coercivity_probe(ctx, l1, kappa, 500);
    EXPECT_TRUE(std::isfinite(rep.c));
    EXPECT_GE(rep.c, 0.0);
    EXPECT_DOUBLE_EQ(rep.kappa0, kappa / (2 * l1));
    EXPECT_EQ(rep.verified_on, 500);
    EXPECT_GE(coercivity_margin(ctx, rep.kappa0, FemVector::Zero(63)), -rep.c);
    EXPECT_THROW((void)coercivity_probe(ctx, l1, 2 * l1, 10), ConfigError);
}

TEST(Coercivity, MarginGrowsAlongScaledFamily)
{
    const EnergyContext ctx = make_ctx(64);
    const double kappa0 = 0.25;
    std::mt19937_64 rng(8);
    const FemVector v0 = random_state(63, rng);
    double prev = coercivity_margin(ctx, kappa0, 10.0 * v0);
    for (double t = 15.0; t <= 50.0; t += 5.0) {
        const double m = coercivity_margin(ctx, kappa0, t * v0);
        EXPECT_GT(m, prev);
        prev = m;
    }
}

TEST(Energy, BoundedBelowOnSample)
{
    const EnergyContext ctx = make_ctx(32);
    std::mt19937_64 rng(10);
    double lowest = 0.0;
    for (int k = 0; k < 200; ++k) {
        lowest = std::min(lowest, energy(ctx, random_state(31, rng, 3.0)));
    }
    EXPECT_TRUE(std::isfinite(lowest));
    EXPECT_GT(lowest, -10.0);
}
