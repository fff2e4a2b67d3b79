#include "fch/runner.hpp"

#include "fch/diagnostics.hpp"
#include "fch/equilibrium.hpp"
#include "fch/errors.hpp"
#include "fch/io.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

namespace fch {

namespace fs = std::filesystem;

Potential build_potential(const RunConfig& cfg)
{
    Potential pot = cfg.potential.kind == "zero" ? Potential::zero()
                                                 : Potential::double_well(cfg.potential.m, cfg.potential.lambda);
    if (!cfg.potential.analytic_class.empty()) {
        pot.set_analytic_class(cfg.potential.analytic_class);
    }
    return pot;
}

EnergyContext build_context(const RunConfig& cfg)
{
    const FracMesh mesh = build_uniform_mesh(cfg.domain.a, cfg.domain.b, cfg.mesh.n_elems);
    AssemblyOptions ao;
    ao.regular_order = cfg.quadrature.regular_order;
    ao.singular_order = cfg.quadrature.singular_order;
    OperatorSet ops(mesh, FracExponents(cfg.frac.s, cfg.frac.sigma), ao);
    std::optional<YosidaParams> yp;
    if (cfg.yosida.enabled) {
        yp = YosidaParams{cfg.yosida.epsilon};
    }
    return EnergyContext(std::move(ops), build_potential(cfg), cfg.quadrature.energy_order, yp);
}

FemVector initial_state(const RunConfig& cfg, const FracMesh& mesh)
{
    const double amp = cfg.initial.amplitude;
    const double a = mesh.a();
    const double len = mesh.length();
    if (cfg.initial.kind == "random") {
        std::mt19937_64 rng(cfg.seeds.rng_seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        FemVector v(mesh.dof_count());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = amp * unif(rng);
        }
        return v;
    }
    if (cfg.initial.kind == "steps") {
        // Piecewise constant with independent uniform levels per cell.
        std::mt19937_64 rng(cfg.seeds.rng_seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        const int cells = cfg.initial.cells;
        std::vector<double> level(static_cast<std::size_t>(cells));
        for (double& l : level) {
            l = amp * unif(rng);
        }
        return interpolate(mesh, [&](double x) {
            const int c = std::clamp(static_cast<int>((x - a) / len * cells), 0, cells - 1);
            return level[static_cast<std::size_t>(c)];
        });
    }
    if (cfg.initial.kind == "sine") {
        const double k = cfg.initial.modes;
        return interpolate(mesh, [&](double x) { return amp * std::sin(k * std::numbers::pi * (x - a) / len); });
    }
    if (cfg.initial.kind == "bump") {
        return interpolate(mesh, [&](double x) { return amp * std::sin(std::numbers::pi * (x - a) / len); });
    }
    return FemVector::Zero(mesh.dof_count());
}

StepConfig step_config(const RunConfig& cfg)
{
    StepConfig sc;
    sc.tau = cfg.time.tau;
    sc.newton_tol = cfg.newton.tol;
    sc.newton_max = cfg.newton.max_iter;
    if (cfg.yosida.enabled) {
        sc.use_yosida = cfg.yosida.epsilon;
    }
    sc.validate();
    return sc;
}

namespace {

fs::path out_dir(const RunConfig& cfg)
{
    fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    return dir;
}

Json check(const std::string& name, bool passed, double value, double threshold)
{
    return {{"name", name},
            {"passed", passed},
            {"value", std::isfinite(value) ? Json(value) : Json(nullptr)},
            {"threshold", threshold}};
}

} // namespace

int run_simulate(const RunConfig& cfg)
{
    const StepConfig sc = step_config(cfg);
    const EnergyContext ctx = build_context(cfg);
    const FracMesh& mesh = ctx.ops().mesh();
    const FemVector u0 = initial_state(cfg, mesh);
    const fs::path dir = out_dir(cfg);

    TrajectoryCsvWriter csv(dir / "trajectory.csv");
    EvolveOptions eo;
    eo.t_end = cfg.time.t_end;
    eo.record_stride = cfg.time.record_stride;
    eo.abort_on_violation = false;
    eo.on_step = [&](const StepRecord& rec) { csv.write(rec); };
    {
        const double e0 = energy(ctx, u0);
        Monitors m0;
        m0.energy = e0;
        m0.u_xnorm_sigma = ctx.ops().xnorm_sigma(u0);
        m0.u_linf = linf_norm(mesh, u0);
        m0.w_xnorm = ctx.ops().xnorm_s(chemical_potential(ctx, u0));
        csv.write_initial(m0);
    }
    const Trajectory traj = evolve(ctx, sc, u0, eo);

    write_certificates_csv(dir / "certificates.csv", traj);
    write_state_csv(dir / "final_state.csv", mesh, traj.states.back(), traj.w_states.back());

    int violations = 0;
    double max_defect = -INFINITY;
    for (const auto& r : traj.steps) {
        violations += r.cert.satisfied ? 0 : 1;
        max_defect = std::max(max_defect, r.cert.defect);
    }
    Json summary;
    summary["steps"] = traj.steps.size();
    summary["t_final"] = traj.steps.empty() ? 0.0 : traj.steps.back().t;
    summary["energy_initial"] = traj.initial.energy;
    summary["energy_final"] = traj.energies().back();
    summary["max_defect"] = max_defect;
    summary["certificate_violations"] = violations;
    summary["events"] = traj.events;
    write_json(dir / "simulate.json", summary);

    if (violations > 0) {
        throw CertificateViolation("simulate: " + std::to_string(violations) + " energy certificates violated");
    }
    return 0;
}

int run_equilibrium(const RunConfig& cfg)
{
    const EnergyContext ctx = build_context(cfg);
    const fs::path dir = out_dir(cfg);
    const int n = ctx.ops().dof_count();
    const double tol = cfg.analysis.stationary_tol;
    const int max_iter = cfg.analysis.stationary_max_iter;

    EquilibriumReport rep;
    if (cfg.analysis.equilibrium_seed == "nontrivial") {
        rep = find_nontrivial_equilibrium(ctx, cfg.analysis.seed_amplitude, tol, max_iter);
    } else if (cfg.analysis.equilibrium_seed == "final_state") {
        const FemVector seed = read_state_csv(dir / "final_state.csv");
        if (seed.size() != n) {
            throw ConfigError("equilibrium: final_state.csv does not match mesh.n_elems");
        }
        rep = solve_stationary(ctx, seed, tol, max_iter);
    } else {
        rep = solve_stationary(ctx, FemVector::Zero(n), tol, max_iter);
    }
    const PencilEigen pe = solve_pencil(linearize(ctx, rep.phi), ctx.ops().mass(), false);
    const double mu_max = pe.values.cwiseAbs().maxCoeff();
    analyze_equilibrium(ctx, rep, cfg.analysis.kernel_tol_rel * mu_max);

    Json j = to_json(rep);
    if (ctx.potential().kind() == Potential::Kind::double_well) {
        j["max_principle"] = max_principle_check(rep, 1.0);
    }
    j["analytic_class"] = ctx.potential().analytic_class();
    write_json(dir / "equilibrium.json", j);
    return 0;
}

int run_spectrum(const RunConfig& cfg)
{
    const EnergyContext ctx = build_context(cfg);
    const OperatorSet& ops = ctx.ops();
    const fs::path dir = out_dir(cfg);
    const PencilEigen base = solve_pencil(ops.a_sigma(), ops.mass(), false);
    const PencilEigen lin = solve_pencil(linearize(ctx, FemVector::Zero(ops.dof_count())), ops.mass(), false);
    std::vector<double> index;
    std::vector<double> a;
    std::vector<double> l;
    for (Eigen::Index i = 0; i < base.values.size(); ++i) {
        index.push_back(static_cast<double>(i));
        a.push_back(base.values[i]);
        l.push_back(lin.values[i]);
    }
    write_series_csv(dir / "spectrum.csv", {"index", "a_sigma", "linearized_at_zero"}, {index, a, l});
    write_stiffness(dir / "stiffness_s.bin", ops.a_s(), ops.exponents().s(), ops.c_s());
    return 0;
}

int run_verify(const RunConfig& cfg)
{
    const EnergyContext ctx = build_context(cfg);
    const OperatorSet& ops = ctx.ops();
    const fs::path dir = out_dir(cfg);
    Json checks = Json::array();

    const bool symmetric = ops.a_s() == ops.a_s().transpose() && ops.a_sigma() == ops.a_sigma().transpose();
    checks.push_back(check("stiffness_symmetry", symmetric, symmetric ? 0.0 : 1.0, 0.0));

    const DualityReport ds = duality_check(ops.a_s(), 100, cfg.seeds.rng_seed);
    checks.push_back(check("duality_s", ds.max_rel_error < 1e-10, ds.max_rel_error, 1e-10));
    const DualityReport dsig = duality_check(ops.a_sigma(), 100, cfg.seeds.rng_seed + 1);
    checks.push_back(check("duality_sigma", dsig.max_rel_error < 1e-10, dsig.max_rel_error, 1e-10));

    const PoincareReport pr = poincare_report(ops, cfg.analysis.verify_trials, cfg.seeds.rng_seed);
    checks.push_back(check("poincare", pr.holds, pr.min_ratio, pr.bound));

    const YosidaSuiteReport ys = yosida_suite(ctx.potential(), cfg.yosida.epsilon, 1000, 3.0, cfg.seeds.rng_seed);
    checks.push_back(check("yosida", ys.violations() == 0, ys.violations(), 0.0));

    const HypothesisReport& hr = ctx.potential().hypotheses();
    checks.push_back(check("potential_bundle", hr.bundle_consistent, hr.max_bundle_error, 1e-6));
    checks.push_back(check("potential_lambda_monotone", hr.lambda_monotone, hr.min_g_prime_margin, 0.0));

    {
        // Central differences of the energy against its gradient.
        std::mt19937_64 rng(cfg.seeds.rng_seed + 2);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        FemVector v(ops.dof_count());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = unif(rng);
        }
        const FemVector g = energy_gradient(ctx, v);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double d = 1e-6 * (1.0 + std::abs(v[i]));
            FemVector vp = v;
            FemVector vm = v;
            vp[i] += d;
            vm[i] -= d;
            const double fd = (energy(ctx, vp) - energy(ctx, vm)) / (2.0 * d);
            worst = std::max(worst, std::abs(fd - g[i]) / std::max(std::abs(g[i]), 1e-3 * g.cwiseAbs().maxCoeff()));
        }
        checks.push_back(check("gradient_consistency", worst < 1e-6, worst, 1e-6));
    }

    {
        const StepConfig sc = step_config(cfg);
        EvolveOptions eo;
        eo.t_end = cfg.analysis.verify_steps * sc.tau;
        eo.record_stride = cfg.analysis.verify_steps;
        eo.abort_on_violation = false;
        const Trajectory traj = evolve(ctx, sc, initial_state(cfg, ops.mesh()), eo);
        int bad = 0;
        double worst = -INFINITY;
        for (const auto& r : traj.steps) {
            bad += r.cert.satisfied ? 0 : 1;
            worst = std::max(worst, r.cert.defect / r.cert.tolerance);
        }
        checks.push_back(check("energy_stability", bad == 0, worst, 1.0));
        const auto e = traj.energies();
        int increases = 0;
        for (std::size_t i = 1; i < e.size(); ++i) {
            increases += e[i] > e[i - 1] + 1e-9 ? 1 : 0;
        }
        checks.push_back(check("energy_monotone", increases == 0, increases, 0.0));
    }

    bool all = true;
    for (const auto& c : checks) {
        all = all && c["passed"].get<bool>();
    }
    Json report;
    report["checks"] = checks;
    report["all_passed"] = all;
    report["poincare"] = {{"min_ratio", pr.min_ratio},
                          {"min_ratio_localized", pr.min_ratio_localized},
                          {"bound", pr.bound},
                          {"radius", pr.radius},
                          {"trials", pr.trials},
                          {"localized", pr.localized}};
    report["yosida_max_error"] = ys.max_error;
    report["yosida_eps_ladder"] = ys.eps_ladder;
    write_json(dir / "verify.json", report);
    for (const auto& c : checks) {
        std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << '\n';
    }
    if (!all) {
        throw CertificateViolation("verify: at least one check failed");
    }
    return 0;
}

int run_rates(const RunConfig& cfg)
{
    const fs::path dir(cfg.output.dir);
    const fs::path traj_path = dir / "trajectory.csv";
    const fs::path eq_path = dir / "equilibrium.json";
    if (!fs::exists(traj_path)) {
        throw MissingInputError("rates: " + traj_path.string() + " not found; run simulate first");
    }
    if (!fs::exists(eq_path)) {
        throw MissingInputError("rates: " + eq_path.string() + " not found; run equilibrium first");
    }
    const TrajectorySeries series = read_trajectory_csv(traj_path);
    const Json eq = read_json(eq_path);
    if (!eq.contains("energy") || !eq["energy"].is_number()) {
        throw NumericalError("rates: equilibrium.json has no finite energy");
    }
    DecayFitOptions fo;
    fo.t_min = cfg.analysis.fit_t_min;
    const LojFit fit = decay_fit(series.t, series.energy, eq["energy"].get<double>(), cfg.analysis.theta, fo);
    write_json(dir / "rates.json", to_json(fit));

    std::vector<double> fe;
    std::vector<double> fa;
    for (const double t : fit.window_t) {
        fe.push_back(std::exp(fit.exponential_intercept - fit.exponential_rate * t));
        fa.push_back(std::exp(fit.algebraic_intercept + fit.algebraic_exponent * std::log1p(t - fit.t_start)));
    }
    write_series_csv(dir / "rates_fit.csv", {"t", "h", "h_exponential", "h_algebraic"},
                     {fit.window_t, fit.window_h, fe, fa});
    return 0;
}

int run_command(const std::string& name, const RunConfig& cfg)
{
    if (name == "simulate") {
        return run_simulate(cfg);
    }
    if (name == "equilibrium") {
        return run_equilibrium(cfg);
    }
    if (name == "verify") {
        return run_verify(cfg);
    }
    if (name == "spectrum") {
        return run_spectrum(cfg);
    }
    if (name == "rates") {
        return run_rates(cfg);
    }
    throw ConfigError("unknown command \"" + name + "\"");
}

} // namespace fch
