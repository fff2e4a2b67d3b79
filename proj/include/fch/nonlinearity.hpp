#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fch {

/// Outcome of the sampling-based hypothesis checks run when a Potential is
/// built. Violations are recorded (and logged) but never abort.
struct HypothesisReport {
    bool bundle_consistent = true;   ///< finite differences of g_hat match g
    bool lambda_monotone = true;     ///< g'(r) >= -lambda on the sample grid
    double min_g_prime_margin = 0.0; ///< min over the grid of g'(r) + lambda
    double max_bundle_error = 0.0;
    std::vector<std::string> warnings;
};

/// The nonlinearity bundle: g_hat, its derivative g, g', and the monotone
/// split beta(r) = g(r) + lambda r with primitive beta_hat(r) = g_hat(r) + lambda r^2 / 2.
class Potential {
public:
    enum class Kind { double_well, custom };

    using ScalarFn = std::function<double(double)>;

    /// g_hat(r) = |r|^m / m - r^2 / 2. lambda defaults to 1, the smallest
    /// admissible value since g'(r) = (m-1)|r|^{m-2} - 1 >= -1.
    static Potential double_well(double m, std::optional<double> lambda = std::nullopt);

    /// User-supplied g, g', g_hat. g(0) must vanish (checked, throws).
    static Potential custom(ScalarFn g, ScalarFn g_prime, ScalarFn g_hat, double lambda);

    /// g == 0; the energy reduces to its quadratic part.
    static Potential zero();

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double m() const noexcept { return m_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] const HypothesisReport& hypotheses() const noexcept { return report_; }

    /// User-declared analyticity class (e.g. "H1"); recorded, never inferred.
    [[nodiscard]] const std::string& analytic_class() const noexcept { return analytic_class_; }
    void set_analytic_class(std::string cls) { analytic_class_ = std::move(cls); }

    /// All evaluators throw std::range_error on a non-finite result.
    [[nodiscard]] double g(double r) const;
    [[nodiscard]] double g_prime(double r) const;
    [[nodiscard]] double g_hat(double r) const;
    [[nodiscard]] double beta(double r) const;
    [[nodiscard]] double beta_prime(double r) const;
    [[nodiscard]] double beta_hat(double r) const;

private:
    Potential() = default;
    void run_checks();

    Kind kind_ = Kind::custom;
    double m_ = 0.0;
    double lambda_ = 0.0;
    ScalarFn g_;
    ScalarFn g_prime_;
    ScalarFn g_hat_;
    HypothesisReport report_;
    std::string analytic_class_;
};

struct YosidaParams {
    double epsilon = 1e-2;
    double root_tol = 1e-12;
    int max_iter = 100;
};

/// j_eps(r): the unique y with y + eps * beta(y) = r. Safeguarded Newton on
/// a bracketing interval; throws SolverError when the iteration cap is hit
/// (which signals a non-monotone beta).
[[nodiscard]] double yosida_resolvent(const Potential& pot, const YosidaParams& yp, double r);

/// beta_eps(r) = (r - j_eps(r)) / eps.
[[nodiscard]] double yosida_apply(const Potential& pot, const YosidaParams& yp, double r);

/// Derivative of beta_eps: beta'(j) / (1 + eps beta'(j)) with j = j_eps(r).
[[nodiscard]] double yosida_derivative(const Potential& pot, const YosidaParams& yp, double r);

struct DissipativityReport {
    bool holds = false;
    double min_margin = 0.0;
};

/// Scans |r| in [R/2, R] and reports min of g(r) r + (lambda1 - kappa) r^2.
[[nodiscard]] DissipativityReport check_dissipativity(const Potential& pot, double lambda1, double kappa,
                                                      double scan_radius, int samples = 2001);

} // namespace fch
