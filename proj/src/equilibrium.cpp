#include "fch/equilibrium.hpp"

#include "fch/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fch {

namespace {

/// Shared damped-Newton loop for F(u) = 0 with residual measured in a dual norm.
template <typename Residual, typename Jacobian, typename Norm>
FemVector newton_solve(FemVector u, Residual&& residual, Jacobian&& jacobian, Norm&& norm, double tol,
                       int max_iter, int& iterations, double& final_norm, const char* who)
{
    FemVector f = residual(u);
    double fn = norm(f);
    int it = 0;
    while (!(fn < tol)) {
        if (it >= max_iter) {
            std::ostringstream msg;
            msg << who << ": no convergence after " << max_iter << " iterations (residual " << fn << ")";
            throw NewtonDivergence(msg.str());
        }
        ++it;
        const Matrix j = jacobian(u);
        Eigen::PartialPivLU<Matrix> lu(j);
        if (!(lu.rcond() > 1e-14)) {
            std::ostringstream msg;
            msg << who << ": singular Jacobian (rcond " << lu.rcond() << ") at iteration " << it;
            throw JacobianSingular(msg.str());
        }
        const FemVector du = lu.solve(-f);
        double alpha = 1.0;
        FemVector trial = u + du;
        FemVector ft = residual(trial);
        double tn = norm(ft);
        while (!(tn < (1.0 - 1e-4 * alpha) * fn) && alpha > 1e-6) {
            alpha *= 0.5;
            trial = u + alpha * du;
            ft = residual(trial);
            tn = norm(ft);
        }
        if (!(tn < fn)) {
            if (alpha * du.norm() < 1e-14 * (1.0 + u.norm()) && fn < 1e3 * tol) {
                break; // round-off floor
            }
            std::ostringstream msg;
            msg << who << ": line search failed at residual " << fn;
            throw NewtonDivergence(msg.str());
        }
        u = std::move(trial);
        f = std::move(ft);
        fn = tn;
    }
    iterations = it;
    final_norm = fn;
    return u;
}

double median_of(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) {
        return *mid;
    }
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace

EquilibriumReport solve_stationary(const EnergyContext& ctx, const FemVector& u_init, double tol, int max_iter)
{
    if (!(tol > 0.0)) {
        throw ConfigError("solve_stationary: tol must be > 0");
    }
    const OperatorSet& ops = ctx.ops();
    EquilibriumReport rep;
    rep.mesh_h = ops.mesh().h();
    rep.phi = newton_solve(
        u_init, [&](const FemVector& u) { return energy_gradient(ctx, u); },
        [&](const FemVector& u) { return linearize(ctx, u); },
        [&](const FemVector& f) { return ops.dual_norm_sigma(f); }, tol, max_iter, rep.newton_iterations,
        rep.residual_dual, "solve_stationary");
    rep.linf = linf_norm(ops.mesh(), rep.phi);
    rep.energy = energy(ctx, rep.phi);
    return rep;
}

bool max_principle_check(const EquilibriumReport& rep, double gamma, std::optional<double> slack)
{
    return rep.linf <= gamma + slack.value_or(10.0 * rep.mesh_h);
}

Matrix linearize(const EnergyContext& ctx, const FemVector& phi)
{
    if (!phi.allFinite()) {
        throw NumericalError("linearize: phi has non-finite entries");
    }
    return ctx.ops().a_sigma() + jacobian_g(ctx, phi);
}

KernelProjection kernel_and_projection(const Matrix& l, const Matrix& m, std::optional<double> kernel_tol)
{
    const PencilEigen pe = solve_pencil(l, m, true);
    KernelProjection out;
    out.eigenvalues = pe.values;
    const double scale = pe.values.cwiseAbs().maxCoeff();
    out.tolerance = kernel_tol.value_or(1e-8 * scale);
    std::vector<int> idx;
    for (int i = 0; i < pe.values.size(); ++i) {
        if (std::abs(pe.values[i]) < out.tolerance) {
            idx.push_back(i);
        }
    }
    out.basis.resize(l.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        out.basis.col(static_cast<Eigen::Index>(c)) = pe.vectors.col(idx[c]);
    }
    out.projection = out.basis * (out.basis.transpose() * m);
    return out;
}

double isomorphism_check(const Matrix& l, const Matrix& m, const Matrix& projection)
{
    if (l.rows() != m.rows() || projection.rows() != l.rows()) {
        throw NumericalError("isomorphism_check: dimension mismatch");
    }
    const Matrix op = l + m * projection;
    Eigen::JacobiSVD<Matrix> svd(op);
    const auto& sv = svd.singularValues();
    const double smax = sv[0];
    const double smin = sv[sv.size() - 1];
    if (!(smin > 1e-13 * smax)) {
        return std::numeric_limits<double>::infinity();
    }
    return smax / smin;
}

void analyze_equilibrium(const EnergyContext& ctx, EquilibriumReport& rep, std::optional<double> kernel_tol)
{
    const Matrix l = linearize(ctx, rep.phi);
    const KernelProjection kp = kernel_and_projection(l, ctx.ops().mass(), kernel_tol);
    rep.pencil_eigs.assign(kp.eigenvalues.data(), kp.eigenvalues.data() + kp.eigenvalues.size());
    rep.kernel_dim = kp.dim();
    rep.kernel_tol = kp.tolerance;
    rep.kernel_basis.clear();
    for (int c = 0; c < kp.dim(); ++c) {
        rep.kernel_basis.emplace_back(kp.basis.col(c));
    }
    rep.iso_condition = isomorphism_check(l, ctx.ops().mass(), kp.projection);
    if (rep.kernel_dim == 0) {
        rep.theta_hint = 0.5;
    } else {
        rep.theta_hint.reset();
    }
}

EquilibriumReport find_nontrivial_equilibrium(const EnergyContext& ctx, double amplitude, double tol, int max_iter)
{
    const int n = ctx.ops().dof_count();
    const Matrix l0 = linearize(ctx, FemVector::Zero(n));
    const PencilEigen pe = solve_pencil(l0, ctx.ops().mass(), true);
    FemVector seed = pe.vectors.col(0);
    const Eigen::Index mid = n / 2;
    if (seed[mid] < 0.0) {
        seed = -seed;
    }
    seed /= seed.cwiseAbs().maxCoeff();
    // Retry with a doubled amplitude while the result is trivial.
    double amp = amplitude;
    EquilibriumReport rep = solve_stationary(ctx, amp * seed, tol, max_iter);
    for (int attempt = 1; attempt < 4 && rep.linf < 1e-3 * amplitude; ++attempt) {
        amp *= 2.0;
        rep = solve_stationary(ctx, amp * seed, tol, max_iter);
    }
    return rep;
}

FemVector solve_beta_elliptic(const EnergyContext& ctx, const FemVector& f, double tol, int max_iter)
{
    const OperatorSet& ops = ctx.ops();
    const FemVector rhs = ops.mass() * f;
    int its = 0;
    double fn = 0.0;
    return newton_solve(
        FemVector::Zero(f.size()),
        [&](const FemVector& u) { return FemVector(ops.a_sigma() * u + load_beta(ctx, u) - rhs); },
        [&](const FemVector& u) { return Matrix(ops.a_sigma() + jacobian_beta(ctx, u)); },
        [&](const FemVector& r) { return ops.dual_norm_sigma(r); }, tol, max_iter, its, fn, "solve_beta_elliptic");
}

LsiProbeResult lsi_probe(const EnergyContext& ctx, const EquilibriumReport& rep, const LsiProbeOptions& opts)
{
    if (!(opts.theta > 0.0 && opts.theta <= 1.0)) {
        throw ConfigError("lsi_probe: theta must lie in (0, 1]");
    }
    if (!(opts.delta > 0.0) || opts.samples < 1 || opts.decades < 1) {
        throw ConfigError("lsi_probe: need delta > 0, samples >= 1, decades >= 1");
    }
    if (!(rep.residual_dual <= 1e-8)) {
        throw ConfigError("lsi_probe: equilibrium residual too large for a probe");
    }
    const OperatorSet& ops = ctx.ops();
    const FemVector& phi = rep.phi;
    const int n = ops.dof_count();
    const double e_phi = energy(ctx, phi);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    LsiProbeResult out;
    out.theta = opts.theta;
    out.delta = opts.delta;
    out.samples = opts.samples;
    std::vector<std::vector<double>> by_decade(opts.decades);

    for (int k = 0; k < opts.samples; ++k) {
        FemVector d(n);
        if (opts.direction) {
            d = *opts.direction;
        } else {
            for (int i = 0; i < n; ++i) {
                d[i] = normal(rng);
            }
        }
        const double dn = ops.xnorm_sigma(d);
        // log-uniform radius in (delta 10^-decades, delta)
        const double u01 = unit(rng);
        if (!(dn > 0.0)) {
            ++out.skipped;
            continue;
        }
        d /= dn;
        const double r = opts.delta * std::pow(10.0, -opts.decades * u01);
        const FemVector v = phi + r * d;
        const double grad = ops.dual_norm_sigma(energy_gradient(ctx, v));
        const double gap = std::abs(energy(ctx, v) - e_phi);
        if (grad < 1e-14) {
            ++out.skipped;
            continue;
        }
        const double ratio = std::pow(gap, 1.0 - opts.theta) / grad;
        out.radii.push_back(r);
        out.ratios.push_back(ratio);
        const int dec = std::clamp(static_cast<int>(std::floor(-std::log10(r / opts.delta))), 0, opts.decades - 1);
        by_decade[dec].push_back(ratio);
    }
    if (!out.ratios.empty()) {
        out.max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
        out.median_ratio = median_of(out.ratios);
    }
    out.omega_estimate = out.max_ratio;
    bool grows = true;
    double prev = -1.0;
    for (int dec = 0; dec < opts.decades; ++dec) {
        const double med = median_of(by_decade[dec]);
        out.decade_medians.push_back(med);
        out.decade_upper_radius.push_back(opts.delta * std::pow(10.0, -dec));
        if (by_decade[dec].empty() || !(med > prev)) {
            grows = false;
        }
        prev = med;
    }
    out.grows_as_r_decreases = grows;
    return out;
}

} // namespace fch
