#pragma once

#include "fch/energy.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fch {

struct EquilibriumReport {
    FemVector phi;
    double residual_dual = 0.0; ///< |A_sigma phi + b_g(phi)|_{X_sigma'}
    double linf = 0.0;
    double energy = 0.0;
    double mesh_h = 0.0;
    int newton_iterations = 0;

    // Filled by analyze_equilibrium.
    std::vector<double> pencil_eigs; ///< ascending eigenvalues of (L(phi), M)
    int kernel_dim = 0;
    std::vector<FemVector> kernel_basis;
    double kernel_tol = 0.0;
    double iso_condition = 0.0;
    std::optional<double> theta_hint; ///< 1/2 when the kernel is trivial
};

/// Damped Newton on F(phi) = A_sigma phi + b_g(phi) with Jacobian
/// A_sigma + B_g'(phi) and backtracking on |F|_{X_sigma'}. Throws
/// JacobianSingular at a degenerate critical point and NewtonDivergence
/// after `max_iter` iterations.
[[nodiscard]] EquilibriumReport solve_stationary(const EnergyContext& ctx, const FemVector& u_init, double tol,
                                                 int max_iter = 100);

/// |phi|_inf <= gamma + slack; slack defaults to 10 h.
[[nodiscard]] bool max_principle_check(const EquilibriumReport& rep, double gamma,
                                       std::optional<double> slack = std::nullopt);

/// L(phi) = A_sigma + B_g'(phi), B_g'(phi)_ij = ∫ g'(phi_h) phi_i phi_j.
[[nodiscard]] Matrix linearize(const EnergyContext& ctx, const FemVector& phi);

struct KernelProjection {
    Eigen::VectorXd eigenvalues; ///< ascending, of the pencil (L, M)
    Matrix basis;                ///< M-orthonormal kernel vectors as columns
    Matrix projection;           ///< V V^T M: L2-orthogonal projection onto the kernel
    double tolerance = 0.0;
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(basis.cols()); }
};

/// Kernel of the pencil L v = mu M v: eigenvectors with |mu| < kernel_tol.
/// kernel_tol defaults to 1e-8 * max |mu|.
[[nodiscard]] KernelProjection kernel_and_projection(const Matrix& l, const Matrix& m,
                                                     std::optional<double> kernel_tol = std::nullopt);

/// 2-norm condition number of L + M P, or +inf when it is numerically singular.
[[nodiscard]] double isomorphism_check(const Matrix& l, const Matrix& m, const Matrix& projection);

/// Fills spectrum, kernel, projection and isomorphism fields of `rep`.
void analyze_equilibrium(const EnergyContext& ctx, EquilibriumReport& rep,
                         std::optional<double> kernel_tol = std::nullopt);

/// Seeds Newton with the lowest pencil eigenvector of L(0) scaled to
/// sup-norm `amplitude` (positive in the middle) and solves. A trivial result
/// triggers up to three retries with the amplitude doubled each time.
[[nodiscard]] EquilibriumReport find_nontrivial_equilibrium(const EnergyContext& ctx, double amplitude, double tol,
                                                            int max_iter = 100);

/// Solves A_sigma u + b_beta(u) = M f (a strictly monotone problem) by Newton.
[[nodiscard]] FemVector solve_beta_elliptic(const EnergyContext& ctx, const FemVector& f, double tol,
                                            int max_iter = 100);

struct LsiProbeResult {
    double theta = 0.5;
    int samples = 0;
    int skipped = 0;  ///< samples with a vanishing gradient (0/0)
    double delta = 0.0;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    double omega_estimate = 0.0; ///< max ratio
    /// Median ratio per radius decade, from the largest radii to the smallest.
    std::vector<double> decade_medians;
    std::vector<double> decade_upper_radius;
    /// True when decade medians strictly increase as the radius shrinks.
    bool grows_as_r_decreases = false;
    std::vector<double> radii;
    std::vector<double> ratios;
};

struct LsiProbeOptions {
    double theta = 0.5;
    double delta = 0.01;
    int samples = 500;
    int decades = 3; ///< radii are drawn log-uniformly in (delta 10^-decades, delta)
    std::uint64_t seed = 7;
    /// Fixed direction instead of random ones (normalized in X_sigma).
    std::optional<FemVector> direction;
};

/// Samples v = phi + r d with |d|_{X_sigma} = 1, r < delta, and records
/// |E(v) - E(phi)|^{1-theta} / |E'(v)|_{X_sigma'}.
/// Requires rep.residual_dual <= 1e-8.
[[nodiscard]] LsiProbeResult lsi_probe(const EnergyContext& ctx, const EquilibriumReport& rep,
                                      const LsiProbeOptions& opts);

} // namespace fch
