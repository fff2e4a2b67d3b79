/// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fch/diagnostics.hpp"
#include "fch/equilibrium.hpp"
#include "fch/evolution.hpp"
#include "fch/runner.hpp"

#include "gagliardo_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace fch;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

RunConfig canonical(int n_elems)
{
    RunConfig cfg;
    cfg.domain = {-1.0, 1.0};
    cfg.mesh.n_elems = n_elems;
    cfg.frac = {0.5, 0.5};
    cfg.potential.kind = "double_well";
    cfg.potential.m = 4.0;
    cfg.potential.lambda = 1.0;
    return cfg;
}

FemVector sine_pi(const FracMesh& mesh, double amp)
{
    return interpolate(mesh, [amp](double x) { return amp * std::sin(std::numbers::pi * x); });
}

double max_abs_defect(const Trajectory& traj)
{
    double d = 0.0;
    for (double x : energy_balance_defect(traj)) {
        d = std::max(d, std::abs(x));
    }
    return d;
}

Outcome assembly_oracle()
{
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
        const FracMesh mesh = build_uniform_mesh(-1.0, 1.0, 8);
        const double c = normalization_constant(1, s);
        const Matrix a = assemble_gagliardo(mesh, s, c);
        const oracle::Interval iv{-1.0, 1.0, 8};
        for (int i = 0; i < a.rows(); ++i) {
            for (int j = i; j < a.cols(); ++j) {
                const double ref = oracle::gagliardo_entry(iv, s, c, i, j, 1e-10);
                worst = std::max(worst, std::abs(a(i, j) - ref) / std::abs(ref));
            }
        }
    }
    return {worst < 1e-4, "max relative error " + fmt(worst) + " (< 1e-4)"};
}

Outcome duality()
{
    const OperatorSet ops(build_uniform_mesh(-1.0, 1.0, 128), FracExponents(0.5, 0.5));
    const DualityReport rep = duality_check(ops.a_s(), 100);
    return {rep.max_rel_error < 1e-10, "max relative error " + fmt(rep.max_rel_error) + " over 100 vectors (< 1e-10)"};
}

Outcome poincare()
{
    const OperatorSet ops(build_uniform_mesh(-1.0, 1.0, 128), FracExponents(0.5, 0.5));
    const PoincareReport rep = poincare_report(ops, 1000, 3, 20);
    const double stated = 2.0 / 27.0;
    const bool pass = rep.min_ratio >= stated && rep.holds;
    return {pass, "min ratio " + fmt(rep.min_ratio) + " (localized " + fmt(rep.min_ratio_localized) + ") vs 2/27 = " +
                      fmt(stated) + " and 2/(2R+1)^(1+2s) = " + fmt(rep.bound) + "; " +
                      std::to_string(rep.trials) + " random + " + std::to_string(rep.localized) + " localized"};
}

Outcome energy_stability()
{
    RunConfig cfg = canonical(128);
    cfg.initial.kind = "random";
    cfg.initial.amplitude = 1.0;
    const EnergyContext ctx = build_context(cfg);
    const FemVector u0 = initial_state(cfg, ctx.ops().mesh());
    int violations = 0;
    int steps = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (double tau : {1e-1, 1e-2, 1e-3}) {
        EvolveOptions opts{2000.0 * tau, 2000};
        opts.abort_on_violation = false;
        const Trajectory traj = evolve(ctx, StepConfig{tau}, u0, opts);
        for (const auto& s : traj.steps) {
            ++steps;
            worst = std::max(worst, s.cert.defect / std::max(1.0, std::abs(s.cert.e_before)));
            if (!(s.cert.defect <= 1e-9 * std::max(1.0, std::abs(s.cert.e_before)))) {
                ++violations;
            }
        }
    }
    return {violations == 0 && steps == 6000, std::to_string(steps) + " steps, " + std::to_string(violations) +
                                                   " violations, max scaled defect " + fmt(worst) + " (<= 1e-9)"};
}

Outcome defect_scaling()
{
    const EnergyContext ctx = build_context(canonical(128));
    const FemVector u0 = sine_pi(ctx.ops().mesh(), 0.5);
    std::vector<double> d;
    for (double tau : {1e-2, 5e-3, 2.5e-3}) {
        d.push_back(max_abs_defect(evolve(ctx, StepConfig{tau}, u0, EvolveOptions{0.1, 1000})));
    }
    const double r1 = d[1] / d[0];
    const double r2 = d[2] / d[1];
    const bool pass = std::abs(r1 - 0.5) <= 0.1 && std::abs(r2 - 0.5) <= 0.1;
    return {pass, "max defects " + fmt(d[0]) + ", " + fmt(d[1]) + ", " + fmt(d[2]) + "; ratios " + fmt(r1) + ", " +
                      fmt(r2) + " (0.5 +- 20%)"};
}

Outcome convergence()
{
    const EnergyContext ctx = build_context(canonical(128));
    const FemVector u0 = sine_pi(ctx.ops().mesh(), 0.1);
    const Trajectory traj = evolve(ctx, StepConfig{1e-2}, u0, EvolveOptions{20.0, 100});
    const FemVector phi = FemVector::Zero(ctx.ops().dof_count());
    const double dist = omega_limit_distances(traj, phi, ctx.ops()).back().distance;
    LojFit fit;
    try {
        fit = decay_fit(traj, energy(ctx, phi), 0.5);
    } catch (const std::exception& e) {
        return {false, std::string("final distance ") + fmt(dist) + "; decay_fit refused: " + e.what()};
    }
    const bool pass = dist < 1e-6 && fit.mode == FitMode::exponential && fit.r_squared >= 0.99 && fit.decades >= 3.0;
    return {pass, "final distance " + fmt(dist) + " (< 1e-6); fit " + to_string(fit.mode) + " rate " + fmt(fit.rate) +
                      " r^2 " + fmt(fit.r_squared) + " over " + fmt(fit.decades) + " decades on [" +
                      fmt(fit.t_start) + ", " + fmt(fit.t_end) + "]"};
}

Outcome spectral_shift()
{
    const EnergyContext ctx = build_context(canonical(128));
    const Matrix& m = ctx.ops().mass();
    const PencilEigen plain = solve_pencil(ctx.ops().a_sigma(), m, false);
    const PencilEigen shifted = solve_pencil(linearize(ctx, FemVector::Zero(ctx.ops().dof_count())), m, false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < plain.values.size(); ++i) {
        worst = std::max(worst, std::abs(shifted.values[i] - (plain.values[i] - 1.0)));
    }
    return {worst < 1e-10, "max entrywise deviation " + fmt(worst) + " over " + std::to_string(plain.values.size()) +
                               " eigenvalues (< 1e-10)"};
}

Outcome maximum_principle()
{
    RunConfig cfg = canonical(256);
    cfg.domain = {-4.0, 4.0};
    const EnergyContext ctx = build_context(cfg);
    const EquilibriumReport rep = find_nontrivial_equilibrium(ctx, 1.0, 1e-12);
    const double bound = 1.0 + 10.0 * rep.mesh_h;
    const bool pass = rep.linf > 0.1 && max_principle_check(rep, 1.0) && rep.residual_dual < 1e-10;
    return {pass, "linf " + fmt(rep.linf) + " (<= " + fmt(bound) + "), residual " + fmt(rep.residual_dual) +
                      " (< 1e-10), energy " + fmt(rep.energy)};
}

Outcome lsi()
{
    const EnergyContext ctx = build_context(canonical(128));
    const int n = ctx.ops().dof_count();
    EquilibriumReport rep = solve_stationary(ctx, FemVector::Zero(n), 1e-12);
    analyze_equilibrium(ctx, rep);
    LsiProbeOptions opts;
    opts.theta = 0.5;
    opts.delta = 0.01;
    opts.samples = 500;
    const LsiProbeResult r = lsi_probe(ctx, rep, opts);
    bool stable = std::isfinite(r.max_ratio) && rep.kernel_dim == 0;
    double worst = 0.0;
    for (double med : r.decade_medians) {
        worst = std::max(worst, r.max_ratio / med);
        stable = stable && r.max_ratio < 2.0 * med;
    }

    // Negative control: g(r) = r^3 - lambda_1 r plants a zero mode at phi = 0.
    const double l1 = rayleigh_lambda1(ctx.ops().a_sigma(), ctx.ops().mass());
    const Potential planted = Potential::custom([l1](double x) { return x * x * x - l1 * x; },
                                                [l1](double x) { return 3.0 * x * x - l1; },
                                                [l1](double x) { return 0.25 * x * x * x * x - 0.5 * l1 * x * x; }, l1);
    const EnergyContext dctx(ctx.ops(), planted);
    EquilibriumReport drep = solve_stationary(dctx, FemVector::Zero(n), 1e-12);
    analyze_equilibrium(dctx, drep);
    LsiProbeOptions neg = opts;
    neg.theta = 0.75;
    const LsiProbeResult dr = lsi_probe(dctx, drep, neg);
    const bool control = drep.kernel_dim == 1 && dr.grows_as_r_decreases;

    std::ostringstream ss;
    ss << "theta 1/2: max " << fmt(r.max_ratio) << ", max/decade-median " << fmt(worst) << " (< 2), "
       << r.skipped << " skipped; control theta' 3/4 at kernel_dim " << drep.kernel_dim << ": decade medians";
    for (double m : dr.decade_medians) {
        ss << ' ' << fmt(m);
    }
    ss << (dr.grows_as_r_decreases ? " (grow)" : " (do not grow)");
    return {stable && control, ss.str()};
}

Outcome yosida()
{
    const YosidaSuiteReport rep = yosida_suite(Potential::double_well(4.0, 1.0), 1e-2, 1000);
    std::ostringstream ss;
    ss << rep.samples << " samples: bound " << rep.bound_violations << ", lipschitz " << rep.lipschitz_violations
       << ", monotone " << rep.monotone_violations << ", resolvent " << rep.resolvent_violations << ", convergence "
       << rep.convergence_violations << " violations";
    return {rep.violations() == 0 && rep.samples == 1000, ss.str()};
}

Outcome smoothing()
{
    RunConfig cfg = canonical(128);
    cfg.initial.kind = "random";
    cfg.initial.amplitude = 1.0;
    const EnergyContext ctx = build_context(cfg);
    const FemVector u0 = initial_state(cfg, ctx.ops().mesh());
    const Trajectory traj = evolve(ctx, StepConfig{1e-3}, u0, EvolveOptions{2.0, 1000});
    const auto rep = smoothing_report(traj, {0.1, 0.2, 0.5, 1.0});
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::ostringstream ss;
    ss << "products";
    for (const auto& [t0, p] : rep) {
        ss << ' ' << fmt(t0) << ':' << fmt(p);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double ratio = hi / lo;
    ss << "; max/min " << fmt(ratio) << " (<= 3)";
    return {std::isfinite(ratio) && ratio <= 3.0, ss.str()};
}

Outcome decay_fit_oracle()
{
    std::vector<double> t;
    std::vector<double> e_exp;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.05 * i);
        e_exp.push_back(std::exp(-2.0 * t.back()) - 0.5);
    }
    const LojFit ex = decay_fit(t, e_exp, -0.5, 0.5);
    std::vector<double> ta;
    std::vector<double> e_alg;
    for (int i = 0; i < 1000; ++i) {
        ta.push_back(static_cast<double>(i));
        e_alg.push_back(std::pow(1.0 + ta.back(), -2.0));
    }
    const LojFit al = decay_fit(ta, e_alg, 0.0, 0.5);
    const double ex_err = std::abs(ex.rate - 1.0);
    const double al_err = std::abs(al.rate + 1.0);
    const bool pass = ex.mode == FitMode::exponential && ex_err < 0.01 && al.mode == FitMode::algebraic && al_err < 0.02;
    return {pass, "exponential rate " + fmt(ex.rate) + " (" + to_string(ex.mode) + ", 1 +- 1%); algebraic exponent " +
                      fmt(al.rate) + " (" + to_string(al.mode) + ", -1 +- 2%)"};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "assembly matches quadrature oracle", 30.0, assembly_oracle},
        {2, "duality identity", 1.0, duality},
        {3, "discrete fractional Poincare inequality", 5.0, poincare},
        {4, "unconditional energy stability", 120.0, energy_stability},
        {5, "energy defect scales linearly in tau", 120.0, defect_scaling},
        {6, "convergence to equilibrium", 180.0, convergence},
        {7, "spectral shift identity", 10.0, spectral_shift},
        {8, "maximum principle", 60.0, maximum_principle},
        {9, "Lojasiewicz-Simon probe", 60.0, lsi},
        {10, "Yosida properties", 1.0, yosida},
        {11, "parabolic smoothing shape", 120.0, smoothing},
        {12, "decay_fit synthetic oracle", 1.0, decay_fit_oracle},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = out.pass && in_time;
        if (!pass) {
            ++failures;
        }
        std::printf("%s %2d %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                    secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
