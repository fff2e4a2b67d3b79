#include "fch/evolution.hpp"

#include "fch/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <iostream>
#include <sstream>

namespace fch {

void StepConfig::validate() const
{
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigError("time.tau must be > 0");
    }
    if (!(newton_tol > 0.0)) {
        throw ConfigError("newton.tol must be > 0");
    }
    if (newton_max < 1) {
        throw ConfigError("newton.max_iter must be >= 1");
    }
    if (use_yosida && !(*use_yosida > 0.0)) {
        throw ConfigError("yosida.epsilon must be > 0");
    }
}

FemVector chemical_potential(const EnergyContext& ctx, const FemVector& u)
{
    return ctx.ops().mass_factor().solve(energy_gradient(ctx, u));
}

namespace {

struct BlockResidual {
    FemVector r1;
    FemVector r2;
    double norm = 0.0;
};

BlockResidual block_residual(const EnergyContext& ctx, double tau, const FemVector& u_prev, const FemVector& u,
                             const FemVector& w)
{
    const OperatorSet& ops = ctx.ops();
    const Matrix& m = ops.mass();
    BlockResidual r;
    r.r1 = m * (u - u_prev) / tau + ops.a_s() * w;
    r.r2 = m * w - ops.a_sigma() * u - load_beta(ctx, u) + ctx.lambda() * (m * u_prev);
    const double n1 = ops.dual_norm_mass(r.r1);
    const double n2 = ops.dual_norm_mass(r.r2);
    r.norm = std::sqrt(n1 * n1 + n2 * n2);
    return r;
}

} // namespace

StepResult step(const EnergyContext& ctx_in, const StepConfig& cfg, const FemVector& u_prev)
{
    cfg.validate();
    if (!u_prev.allFinite()) {
        throw NumericalError("step: u_prev has non-finite entries");
    }
    const bool want_yosida = cfg.use_yosida.has_value();
    const bool has_yosida = ctx_in.yosida().has_value();
    std::optional<EnergyContext> adjusted;
    if (want_yosida != has_yosida || (want_yosida && ctx_in.yosida()->epsilon != *cfg.use_yosida)) {
        adjusted = ctx_in.with_yosida(want_yosida ? std::optional<YosidaParams>(YosidaParams{*cfg.use_yosida})
                                                  : std::nullopt);
    }
    const EnergyContext& ctx = adjusted ? *adjusted : ctx_in;

    const OperatorSet& ops = ctx.ops();
    const Matrix& m = ops.mass();
    const int n = ops.dof_count();
    const double tau = cfg.tau;

    FemVector u = u_prev;
    FemVector w = ops.mass_factor().solve(ops.a_sigma() * u + load_beta(ctx, u) - ctx.lambda() * (m * u_prev));
    BlockResidual res = block_residual(ctx, tau, u_prev, u, w);

    Matrix jac(2 * n, 2 * n);
    jac.topLeftCorner(n, n) = m / tau;
    jac.topRightCorner(n, n) = ops.a_s();
    jac.bottomRightCorner(n, n) = m;

    // At least one Newton update per step.
    int it = 0;
    bool converged = false;
    while (!converged && it < cfg.newton_max) {
        ++it;
        jac.bottomLeftCorner(n, n) = -ops.a_sigma() - jacobian_beta(ctx, u);
        Eigen::PartialPivLU<Matrix> lu(jac);
        if (!(lu.rcond() > 1e-15)) {
            throw JacobianSingular("step: block Jacobian is singular");
        }
        Eigen::VectorXd rhs(2 * n);
        rhs << -res.r1, -res.r2;
        const Eigen::VectorXd delta = lu.solve(rhs);
        const FemVector du = delta.head(n);
        const FemVector dw = delta.tail(n);

        double alpha = 1.0;
        BlockResidual trial = block_residual(ctx, tau, u_prev, u + du, w + dw);
        while (!(trial.norm < (1.0 - 1e-4 * alpha) * res.norm) && alpha > 1.0 / 1024.0) {
            alpha *= 0.5;
            trial = block_residual(ctx, tau, u_prev, u + alpha * du, w + alpha * dw);
        }
        const double step_size = alpha * delta.norm();
        const double scale = 1.0 + std::sqrt(u.squaredNorm() + w.squaredNorm());
        if (!(trial.norm < res.norm)) {
            // No decrease at all: either stuck at the round-off floor or diverging.
            if (res.norm < cfg.newton_tol || (res.norm < 1e3 * cfg.newton_tol && step_size < 1e-12 * scale)) {
                converged = true;
                break;
            }
            std::ostringstream msg;
            msg << "step: Newton stalled at residual " << res.norm << " (tau = " << tau << ")";
            throw NewtonDivergence(msg.str());
        }
        u += alpha * du;
        w += alpha * dw;
        res = trial;
        converged = res.norm < cfg.newton_tol
            || (res.norm < 1e3 * cfg.newton_tol && step_size < 1e-14 * scale);
    }
    if (!converged || !u.allFinite() || !w.allFinite()) {
        std::ostringstream msg;
        msg << "step: Newton did not converge in " << cfg.newton_max << " iterations (residual " << res.norm
            << ", tau = " << tau << ")";
        throw NewtonDivergence(msg.str());
    }

    StepResult out;
    out.newton_iterations = it;
    out.residual = res.norm;
    StepCertificate& c = out.cert;
    const FemVector du = u - u_prev;
    c.e_before = energy(ctx, u_prev);
    c.e_after = energy(ctx, u);
    c.w_normsq = w.dot(ops.a_s() * w);
    c.du_msq = du.dot(m * du);
    c.lambda_half_du = 0.5 * ctx.lambda() * c.du_msq;
    c.defect = c.e_after + tau * c.w_normsq + c.lambda_half_du - c.e_before;
    c.tolerance = cfg.cert_rel_tol * std::max(1.0, std::abs(c.e_before));
    c.satisfied = c.defect <= c.tolerance;
    out.u = std::move(u);
    out.w = std::move(w);
    return out;
}

std::vector<double> Trajectory::times() const
{
    std::vector<double> t;
    t.reserve(steps.size() + 1);
    t.push_back(0.0);
    for (const auto& s : steps) {
        t.push_back(s.t);
    }
    return t;
}

std::vector<double> Trajectory::energies() const
{
    std::vector<double> e;
    e.reserve(steps.size() + 1);
    e.push_back(initial.energy);
    for (const auto& s : steps) {
        e.push_back(s.monitors.energy);
    }
    return e;
}

Trajectory evolve(const EnergyContext& ctx_in, const StepConfig& cfg, const FemVector& u0, const EvolveOptions& opts)
{
    cfg.validate();
    if (!(opts.t_end > 0.0)) {
        throw ConfigError("time.t_end must be > 0");
    }
    if (opts.record_stride < 1) {
        throw ConfigError("time.record_stride must be >= 1");
    }
    const EnergyContext ctx = ctx_in.with_yosida(
        cfg.use_yosida ? std::optional<YosidaParams>(YosidaParams{*cfg.use_yosida}) : std::nullopt);
    const OperatorSet& ops = ctx.ops();

    Trajectory traj;
    traj.initial.energy = energy(ctx, u0);
    if (!std::isfinite(traj.initial.energy)) {
        throw ConfigError("evolve: initial data has infinite energy");
    }
    traj.initial.u_xnorm_sigma = ops.xnorm_sigma(u0);
    traj.initial.u_linf = linf_norm(ops.mesh(), u0);
    const FemVector w0 = chemical_potential(ctx, u0);
    traj.initial.w_xnorm = ops.xnorm_s(w0);
    traj.state_times.push_back(0.0);
    traj.states.push_back(u0);
    traj.w_states.push_back(w0);

    FemVector u = u0;
    FemVector w = w0;
    double t = 0.0;
    int k = 0;
    const double t_stop = opts.t_end - 0.5 * cfg.tau;
    while (t < t_stop) {
        StepConfig sc = cfg;
        int halvings = 0;
        std::optional<StepResult> res;
        while (!res) {
            try {
                res = step(ctx, sc, u);
            } catch (const NewtonDivergence& e) {
                if (halvings >= opts.max_halvings) {
                    throw;
                }
                ++halvings;
                sc.tau *= 0.5;
                std::ostringstream ev;
                ev << "step " << (k + 1) << ": Newton failed, retrying with tau = " << sc.tau;
                traj.events.push_back(ev.str());
            }
        }
        ++k;
        t += sc.tau;
        StepRecord rec;
        rec.step = k;
        rec.t = t;
        rec.tau_used = sc.tau;
        rec.halvings = halvings;
        rec.newton_iterations = res->newton_iterations;
        rec.cert = res->cert;
        rec.monitors.energy = res->cert.e_after;
        rec.monitors.w_xnorm = ops.xnorm_s(res->w);
        rec.monitors.u_xnorm_sigma = ops.xnorm_sigma(res->u);
        rec.monitors.u_linf = linf_norm(ops.mesh(), res->u);
        rec.monitors.dual_norm_ut = ops.dual_norm_s(ops.mass() * (res->u - u) / sc.tau);
        u = std::move(res->u);
        w = std::move(res->w);
        if (opts.on_step) {
            opts.on_step(rec);
        }
        if (!rec.cert.satisfied) {
            std::ostringstream msg;
            msg << "certificate violated at step " << k << " (t = " << t << "): defect " << rec.cert.defect
                << " > " << rec.cert.tolerance;
            if (opts.abort_on_violation) {
                throw CertificateViolation(msg.str());
            }
            traj.events.push_back(msg.str());
            std::cerr << "warning: " << msg.str() << '\n';
        }
        traj.steps.push_back(rec);
        if (k % opts.record_stride == 0 || !(t < t_stop)) {
            traj.state_times.push_back(t);
            traj.states.push_back(u);
            traj.w_states.push_back(w);
        }
    }
    return traj;
}

std::vector<double> energy_balance_defect(const Trajectory& traj)
{
    std::vector<double> out;
    out.reserve(traj.steps.size());
    for (const auto& s : traj.steps) {
        out.push_back(-s.cert.defect);
    }
    return out;
}

} // namespace fch
