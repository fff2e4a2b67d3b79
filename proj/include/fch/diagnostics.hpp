#pragma once

#include "fch/evolution.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace fch {

struct DistanceSample {
    double t = 0.0;
    double distance = 0.0; ///< |u(t) - phi|_{X_sigma}
};

/// Distance of every recorded state to a candidate limit phi.
[[nodiscard]] std::vector<DistanceSample> omega_limit_distances(const Trajectory& traj, const FemVector& phi,
                                                                const OperatorSet& ops);

enum class FitMode { exponential, algebraic };

[[nodiscard]] const char* to_string(FitMode mode) noexcept;

/// Least-squares fit of H(t) = (E(t) - E(phi))^theta on a window.
///   exponential: log H = c0 - rate * t           (rate reported positive)
///   algebraic:   log H = c0 + p * log(1 + t - t_start)  (rate = p, negative)
/// The mode with the larger R^2 wins.
struct LojFit {
    FitMode mode = FitMode::exponential;
    double theta = 0.5;
    double rate = 0.0;
    double r_squared = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    double e_limit = 0.0;
    int samples = 0;
    double decades = 0.0; ///< log10(max H / min H) over the window
    bool degenerate = false; ///< H vanished identically: already converged
    int clipped = 0;         ///< negative gaps clipped to zero
    double noise_floor = 0.0; ///< gap threshold ending the window
    double exponential_rate = 0.0;
    double exponential_r_squared = 0.0;
    double algebraic_exponent = 0.0;
    double algebraic_r_squared = 0.0;
    double exponential_intercept = 0.0; ///< c0 of the exponential fit
    double algebraic_intercept = 0.0;
    std::vector<double> window_t;
    std::vector<double> window_h;
};

struct DecayFitOptions {
    /// Samples before t_min are ignored (initial transient).
    double t_min = 0.0;
    /// Refuse fits whose H range spans fewer decades than this.
    double min_decades = 2.0;
    int min_samples = 10;
};

/// Window: from the first sample with t >= t_min up to the last sample before
/// the gap E - E(phi) first drops to 100 eps |E|, with |E| the largest of
/// |E(phi)| and |E(t)| over the series. Throws
/// NumericalError if the window has too few samples or spans too few decades;
/// returns a `degenerate` fit when every gap is zero.
[[nodiscard]] LojFit decay_fit(const std::vector<double>& t, const std::vector<double>& e, double phi_energy,
                               double theta, const DecayFitOptions& opts = {});
[[nodiscard]] LojFit decay_fit(const Trajectory& traj, double phi_energy, double theta,
                               const DecayFitOptions& opts = {});

struct PoincareReport {
    double min_ratio = 0.0;
    double bound = 0.0;
    bool holds = false;
    double radius = 0.0;
    int trials = 0;
    int localized = 0;
    int skipped = 0;
    double min_ratio_localized = 0.0;
};

/// Checks (2 / C_s) v^T A_s v >= |B_{R+1} \ B_R| / (2R + 1)^{1+2s} |v|_{L2}^2
/// with R = max(|a|, |b|), over `trials` Gaussian vectors and single-hat
/// vectors at the `localized` dofs nearest the boundary.
[[nodiscard]] PoincareReport poincare_report(const OperatorSet& ops, int trials, std::uint64_t seed = 3,
                                             int localized = 20);

/// t0 * sup_{t >= t0} |w(t)|_{X_s}^2 for each t0 in the grid.
[[nodiscard]] std::vector<std::pair<double, double>> smoothing_report(const Trajectory& traj,
                                                                      const std::vector<double>& t0_grid);

struct DualityReport {
    int trials = 0;
    double max_rel_error = 0.0; ///< max | |A v|_{A^-1} - |v|_A | / |v|_A
};

/// |A v|_{A^-1} = |v|_A on Gaussian random vectors.
[[nodiscard]] DualityReport duality_check(const Matrix& a, int trials, std::uint64_t seed = 5);

struct YosidaSuiteReport {
    int samples = 0;
    int bound_violations = 0;     ///< |beta_eps(r)| > |beta(r)|
    int lipschitz_violations = 0; ///< |beta_eps(r1) - beta_eps(r2)| > |r1 - r2| / eps
    int monotone_violations = 0;  ///< beta_eps decreasing on a pair
    int resolvent_violations = 0; ///< |j(r1) - j(r2)| > |r1 - r2|
    int convergence_violations = 0; ///< |beta_eps - beta| not decreasing along the eps ladder
    std::vector<double> eps_ladder;
    std::vector<double> max_error; ///< max |beta_eps - beta| per ladder entry
    [[nodiscard]] int violations() const noexcept
    {
        return bound_violations + lipschitz_violations + monotone_violations + resolvent_violations +
               convergence_violations;
    }
};

/// Samples r uniformly in [-radius, radius] and checks the Yosida properties at
/// `eps`, plus pointwise convergence along eps = 1e-1, 1e-2, 1e-3.
[[nodiscard]] YosidaSuiteReport yosida_suite(const Potential& pot, double eps, int samples, double radius = 3.0,
                                             std::uint64_t seed = 11);

} // namespace fch
