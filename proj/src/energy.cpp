#include "fch/energy.hpp"

#include "fch/errors.hpp"

#include <cmath>
#include <random>

namespace fch {

EnergyContext::EnergyContext(OperatorSet ops, Potential pot, int quad_order, std::optional<YosidaParams> yosida)
    : ops_(std::move(ops)), pot_(std::move(pot)), yosida_(yosida)
{
    if (quad_order < 2) {
        throw ConfigError("energy: quad_order must be >= 2");
    }
    rule_ = gauss_legendre_unit(quad_order);
}

EnergyContext EnergyContext::with_yosida(std::optional<YosidaParams> yosida) const
{
    EnergyContext out = *this;
    out.yosida_ = yosida;
    return out;
}

double EnergyContext::beta(double r) const
{
    return yosida_ ? yosida_apply(pot_, *yosida_, r) : pot_.beta(r);
}

double EnergyContext::beta_prime(double r) const
{
    return yosida_ ? yosida_derivative(pot_, *yosida_, r) : pot_.beta_prime(r);
}

double EnergyContext::g_hat(double r) const
{
    if (!yosida_) {
        return pot_.g_hat(r);
    }
    const double j = yosida_resolvent(pot_, *yosida_, r);
    const double d = r - j;
    return pot_.beta_hat(j) + d * d / (2.0 * yosida_->epsilon) - 0.5 * lambda() * r * r;
}

namespace {

void check_dim(const EnergyContext& ctx, const FemVector& v)
{
    if (v.size() != ctx.ops().dof_count()) {
        throw NumericalError("energy: state dimension does not match the operators");
    }
}

/// Visits every quadrature point: f(element k, local xi, weight*h, v_h value).
template <typename F>
void for_each_qp(const EnergyContext& ctx, const FemVector& v, F&& f)
{
    const FracMesh& mesh = ctx.ops().mesh();
    const int n = mesh.n_elems();
    const double h = mesh.h();
    const GaussRule& rule = ctx.rule();
    for (int k = 0; k < n; ++k) {
        const double left = FracMesh::nodal_value(v, k, n);
        const double right = FracMesh::nodal_value(v, k + 1, n);
        for (int q = 0; q < rule.size(); ++q) {
            const double xi = rule.points[q];
            const double vh = (1.0 - xi) * left + xi * right;
            f(k, xi, rule.weights[q] * h, vh);
        }
    }
}

template <typename Fn>
FemVector load_with(const EnergyContext& ctx, const FemVector& v, Fn&& fn)
{
    check_dim(ctx, v);
    const int n = ctx.ops().mesh().n_elems();
    FemVector b = FemVector::Zero(v.size());
    for_each_qp(ctx, v, [&](int k, double xi, double wh, double vh) {
        const double val = wh * fn(vh);
        if (k >= 1) {
            b[k - 1] += val * (1.0 - xi);
        }
        if (k + 1 <= n - 1) {
            b[k] += val * xi;
        }
    });
    return b;
}

template <typename Fn>
Matrix weighted_mass(const EnergyContext& ctx, const FemVector& v, Fn&& fn)
{
    check_dim(ctx, v);
    const int n = ctx.ops().mesh().n_elems();
    Matrix b = Matrix::Zero(v.size(), v.size());
    for_each_qp(ctx, v, [&](int k, double xi, double wh, double vh) {
        const double c = wh * fn(vh);
        const double nl = 1.0 - xi;
        const double nr = xi;
        const bool has_l = k >= 1;
        const bool has_r = k + 1 <= n - 1;
        if (has_l) {
            b(k - 1, k - 1) += c * nl * nl;
        }
        if (has_r) {
            b(k, k) += c * nr * nr;
        }
        if (has_l && has_r) {
            b(k - 1, k) += c * nl * nr;
            b(k, k - 1) += c * nl * nr;
        }
    });
    return b;
}

} // namespace

double potential_energy(const EnergyContext& ctx, const FemVector& v)
{
    check_dim(ctx, v);
    double sum = 0.0;
    for_each_qp(ctx, v, [&](int, double, double wh, double vh) { sum += wh * ctx.g_hat(vh); });
    if (!std::isfinite(sum)) {
        throw NumericalError("energy: nonlinear integral overflowed");
    }
    return sum;
}

double energy(const EnergyContext& ctx, const FemVector& v)
{
    check_dim(ctx, v);
    return 0.5 * v.dot(ctx.ops().a_sigma() * v) + potential_energy(ctx, v);
}

FemVector load_g(const EnergyContext& ctx, const FemVector& v)
{
    return load_with(ctx, v, [&](double r) { return ctx.g(r); });
}

FemVector load_beta(const EnergyContext& ctx, const FemVector& v)
{
    return load_with(ctx, v, [&](double r) { return ctx.beta(r); });
}

FemVector energy_gradient(const EnergyContext& ctx, const FemVector& v)
{
    return ctx.ops().a_sigma() * v + load_g(ctx, v);
}

Matrix jacobian_beta(const EnergyContext& ctx, const FemVector& v)
{
    return weighted_mass(ctx, v, [&](double r) { return ctx.beta_prime(r); });
}

Matrix jacobian_g(const EnergyContext& ctx, const FemVector& v)
{
    return weighted_mass(ctx, v, [&](double r) { return ctx.g_prime(r); });
}

double beta_l2_norm(const EnergyContext& ctx, const FemVector& v)
{
    check_dim(ctx, v);
    double sum = 0.0;
    for_each_qp(ctx, v, [&](int, double, double wh, double vh) {
        const double b = ctx.beta(vh);
        sum += wh * b * b;
    });
    return std::sqrt(sum);
}

double coercivity_margin(const EnergyContext& ctx, double kappa0, const FemVector& v)
{
    const double x = ctx.ops().xnorm_sigma(v);
    return energy(ctx, v) - kappa0 * x * x;
}

CoercivityReport coercivity_probe(const EnergyContext& ctx, double lambda1, double kappa, int samples,
                                  std::uint64_t seed)
{
    if (!(kappa > 0.0 && kappa < lambda1)) {
        throw ConfigError("coercivity_probe: need 0 < kappa < lambda1");
    }
    CoercivityReport rep;
    rep.lambda1 = lambda1;
    rep.kappa = kappa;
    rep.kappa0 = kappa / (2.0 * lambda1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> decade(-2.0, 2.0);
    const int n = ctx.ops().dof_count();
    double c = 0.0; // v = 0 needs C >= 0
    for (int k = 0; k < samples; ++k) {
        FemVector d(n);
        for (int i = 0; i < n; ++i) {
            d[i] = normal(rng);
        }
        d /= ctx.ops().xnorm_sigma(d);
        const FemVector v = std::pow(10.0, decade(rng)) * d;
        c = std::max(c, -coercivity_margin(ctx, rep.kappa0, v));
    }
    rep.c = c;
    rep.verified_on = samples;
    return rep;
}

} // namespace fch
