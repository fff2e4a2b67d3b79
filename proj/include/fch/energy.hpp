#pragma once

#include "fch/fractional_operator.hpp"
#include "fch/nonlinearity.hpp"
#include "fch/quadrature.hpp"

#include <cstdint>
#include <optional>

namespace fch {

/// Everything needed to evaluate the discrete energy
///   E(v) = 1/2 v^T A_sigma v + ∫ g_hat(v_h)
/// and its derivatives. All nonlinear integrals share one Gauss rule per
/// element, so the load vectors are exact derivatives of the energy.
///
/// When `yosida` is set, beta is replaced by its Yosida approximation
/// beta_eps and beta_hat by the Moreau envelope beta_hat(j) + eps beta_eps^2 / 2,
/// so g_hat becomes beta_hat_eps - lambda r^2 / 2.
class EnergyContext {
public:
    EnergyContext(OperatorSet ops, Potential pot, int quad_order = 5,
                  std::optional<YosidaParams> yosida = std::nullopt);

    [[nodiscard]] const OperatorSet& ops() const noexcept { return ops_; }
    [[nodiscard]] const Potential& potential() const noexcept { return pot_; }
    [[nodiscard]] int quad_order() const noexcept { return rule_.size(); }
    [[nodiscard]] const GaussRule& rule() const noexcept { return rule_; }
    [[nodiscard]] const std::optional<YosidaParams>& yosida() const noexcept { return yosida_; }
    [[nodiscard]] double lambda() const noexcept { return pot_.lambda(); }

    /// Same operators and potential with the Yosida switch changed.
    [[nodiscard]] EnergyContext with_yosida(std::optional<YosidaParams> yosida) const;

    // Pointwise nonlinearity as seen by the scheme (respecting `yosida`).
    [[nodiscard]] double beta(double r) const;
    [[nodiscard]] double beta_prime(double r) const;
    [[nodiscard]] double g_hat(double r) const;
    [[nodiscard]] double g(double r) const { return beta(r) - lambda() * r; }
    [[nodiscard]] double g_prime(double r) const { return beta_prime(r) - lambda(); }

private:
    OperatorSet ops_;
    Potential pot_;
    GaussRule rule_;
    std::optional<YosidaParams> yosida_;
};

[[nodiscard]] double energy(const EnergyContext& ctx, const FemVector& v);

/// Only the nonlinear part ∫ g_hat(v_h).
[[nodiscard]] double potential_energy(const EnergyContext& ctx, const FemVector& v);

/// E'(v) = A_sigma v + b_g(v) as a dual vector.
[[nodiscard]] FemVector energy_gradient(const EnergyContext& ctx, const FemVector& v);

/// b_g(v)_i = ∫ g(v_h) phi_i.
[[nodiscard]] FemVector load_g(const EnergyContext& ctx, const FemVector& v);
/// b_beta(v)_i = ∫ beta(v_h) phi_i.
[[nodiscard]] FemVector load_beta(const EnergyContext& ctx, const FemVector& v);
/// B'(v)_ij = ∫ beta'(v_h) phi_i phi_j (tridiagonal, stored dense).
[[nodiscard]] Matrix jacobian_beta(const EnergyContext& ctx, const FemVector& v);
/// ∫ g'(v_h) phi_i phi_j = jacobian_beta - lambda M.
[[nodiscard]] Matrix jacobian_g(const EnergyContext& ctx, const FemVector& v);

/// Quadrature L2 norm of beta(v_h).
[[nodiscard]] double beta_l2_norm(const EnergyContext& ctx, const FemVector& v);

struct CoercivityReport {
    double lambda1 = 0.0;
    double kappa = 0.0;
    double kappa0 = 0.0; ///< kappa / (2 lambda1)
    double c = 0.0;      ///< smallest C with E(v) >= kappa0 |v|^2 - C on the sample
    int verified_on = 0;
};

/// E(v) - kappa0 |v|_{X_sigma}^2; the coercivity bound holds at v iff this is >= -C.
[[nodiscard]] double coercivity_margin(const EnergyContext& ctx, double kappa0, const FemVector& v);

/// Sampled estimate of the additive constant in E(v) >= kappa0 |v|^2 - C.
/// Random directions at magnitudes spread over four decades. Evidence only.
[[nodiscard]] CoercivityReport coercivity_probe(const EnergyContext& ctx, double lambda1, double kappa,
                                                int samples, std::uint64_t seed = 1);

} // namespace fch
