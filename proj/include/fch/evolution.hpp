#pragma once

#include "fch/energy.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fch {

struct StepConfig {
    double tau = 1e-3;
    /// Newton stops when sqrt(|R1|^2_{M^-1} + |R2|^2_{M^-1}) < newton_tol.
    double newton_tol = 1e-10;
    int newton_max = 50;
    /// Replace beta by its Yosida approximation with this epsilon.
    std::optional<double> use_yosida;
    /// Certificate tolerance is cert_rel_tol * max(1, |E(u_prev)|).
    double cert_rel_tol = 1e-9;

    void validate() const;
};

/// Per-step record of the discrete energy inequality
///   E(u_n) + tau w_n^T A_s w_n + (lambda/2) |u_n - u_{n-1}|_M^2 <= E(u_{n-1}).
struct StepCertificate {
    double e_before = 0.0;
    double e_after = 0.0;
    double w_normsq = 0.0;       ///< w_n^T A_s w_n
    double du_msq = 0.0;         ///< (u_n - u_{n-1})^T M (u_n - u_{n-1})
    double lambda_half_du = 0.0; ///< (lambda / 2) du_msq
    double defect = 0.0;         ///< e_after + tau w_normsq + lambda_half_du - e_before
    double tolerance = 0.0;
    bool satisfied = true;
};

struct StepResult {
    FemVector u;
    FemVector w;
    StepCertificate cert;
    int newton_iterations = 0;
    double residual = 0.0;
};

/// One step of the semi-implicit splitting
///   M (u_n - u_{n-1}) / tau + A_s w_n = 0,
///   M w_n = A_sigma u_n + b_beta(u_n) - lambda M u_{n-1},
/// solved by damped Newton on the full (u, w) block system with Jacobian
/// [[M / tau, A_s], [-A_sigma - B'(u), M]]. Throws NewtonDivergence or
/// JacobianSingular.
[[nodiscard]] StepResult step(const EnergyContext& ctx, const StepConfig& cfg, const FemVector& u_prev);

/// w = M^{-1} (A_sigma u + b_g(u)), the chemical potential of a state.
[[nodiscard]] FemVector chemical_potential(const EnergyContext& ctx, const FemVector& u);

struct Monitors {
    double energy = 0.0;
    double w_xnorm = 0.0;       ///< |w|_{X_s}
    double u_xnorm_sigma = 0.0; ///< |u|_{X_sigma}
    double u_linf = 0.0;
    double dual_norm_ut = 0.0;  ///< |M (u_n - u_{n-1}) / tau|_{X_s'}
};

struct StepRecord {
    int step = 0;
    double t = 0.0;
    double tau_used = 0.0;
    int halvings = 0;
    int newton_iterations = 0;
    Monitors monitors;
    StepCertificate cert;
};

struct Trajectory {
    Monitors initial;
    std::vector<StepRecord> steps;
    /// Strided snapshots; the first is t = 0 and the last is the final state.
    std::vector<double> state_times;
    std::vector<FemVector> states;
    std::vector<FemVector> w_states;
    std::vector<std::string> events;

    /// Times t_0 = 0, t_1, ... aligned with energies().
    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] std::vector<double> energies() const;
};

struct EvolveOptions {
    double t_end = 1.0;
    int record_stride = 10;
    /// When false, violated certificates are logged as events instead.
    bool abort_on_violation = true;
    int max_halvings = 10;
    std::function<void(const StepRecord&)> on_step;
};

/// Iterates `step` from u0 until t_end. On NewtonDivergence the step is
/// retried with tau halved (that step only). Throws CertificateViolation
/// when a certificate fails and abort_on_violation is set.
[[nodiscard]] Trajectory evolve(const EnergyContext& ctx, const StepConfig& cfg, const FemVector& u0,
                                const EvolveOptions& opts);

/// Per-step gap in the discrete energy identity, -defect (non-negative up to
/// solver tolerance). Shrinks linearly with tau when sigma >= s.
[[nodiscard]] std::vector<double> energy_balance_defect(const Trajectory& traj);

} // namespace fch
