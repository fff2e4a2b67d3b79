#include "fch/nonlinearity.hpp"

#include "fch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fch {

namespace {

double finite_or_throw(double value, const char* what, double r)
{
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << what << "(" << r << ") is not representable";
        throw std::range_error(msg.str());
    }
    return value;
}

} // namespace

Potential Potential::double_well(double m, std::optional<double> lambda)
{
    if (!(m >= 2.0)) {
        throw ConfigError("potential.m must be >= 2");
    }
    Potential p;
    p.kind_ = Kind::double_well;
    p.m_ = m;
    p.lambda_ = lambda.value_or(1.0);
    if (!(p.lambda_ >= 0.0)) {
        throw ConfigError("potential.lambda must be >= 0");
    }
    p.g_ = [m](double r) { return std::pow(std::abs(r), m - 2.0) * r - r; };
    p.g_prime_ = [m](double r) {
        if (m == 2.0) {
            return 0.0;
        }
        return (m - 1.0) * std::pow(std::abs(r), m - 2.0) - 1.0;
    };
    p.g_hat_ = [m](double r) { return std::pow(std::abs(r), m) / m - 0.5 * r * r; };
    p.run_checks();
    return p;
}

Potential Potential::custom(ScalarFn g, ScalarFn g_prime, ScalarFn g_hat, double lambda)
{
    if (!g || !g_prime || !g_hat) {
        throw ConfigError("custom potential needs g, g' and g_hat");
    }
    if (!(lambda >= 0.0)) {
        throw ConfigError("potential.lambda must be >= 0");
    }
    Potential p;
    p.kind_ = Kind::custom;
    p.lambda_ = lambda;
    p.g_ = std::move(g);
    p.g_prime_ = std::move(g_prime);
    p.g_hat_ = std::move(g_hat);
    p.run_checks();
    return p;
}

Potential Potential::zero()
{
    return custom([](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0);
}

void Potential::run_checks()
{
    const double g0 = g_(0.0);
    if (std::abs(g0) > 1e-14) {
        std::ostringstream msg;
        msg << "potential: g(0) must vanish, got " << g0;
        throw ConfigError(msg.str());
    }

    report_ = HypothesisReport{};

    // Bundle consistency: central differences of g_hat against g.
    const double delta = 1e-5;
    for (int k = -1000; k <= 1000; ++k) {
        const double r = 1e-2 * k;
        const double fd = (g_hat_(r + delta) - g_hat_(r - delta)) / (2.0 * delta);
        const double gv = g_(r);
        const double err = std::abs(fd - gv) / std::max(1.0, std::abs(gv));
        report_.max_bundle_error = std::max(report_.max_bundle_error, err);
    }
    if (report_.max_bundle_error > 1e-6) {
        report_.bundle_consistent = false;
        std::ostringstream msg;
        msg << "g_hat' differs from g by " << report_.max_bundle_error << " (relative)";
        report_.warnings.push_back(msg.str());
    }

    // lambda-monotonicity on [-10, 10], step 1e-3.
    double margin = std::numeric_limits<double>::infinity();
    for (int k = -10000; k <= 10000; ++k) {
        const double r = 1e-3 * k;
        margin = std::min(margin, g_prime_(r) + lambda_);
    }
    report_.min_g_prime_margin = margin;
    if (margin < -1e-12) {
        report_.lambda_monotone = false;
        std::ostringstream msg;
        msg << "g'(r) + lambda reaches " << margin << " < 0: beta is not monotone";
        report_.warnings.push_back(msg.str());
    }
    for (const auto& w : report_.warnings) {
        std::cerr << "warning: potential: " << w << '\n';
    }
}

double Potential::g(double r) const { return finite_or_throw(g_(r), "g", r); }
double Potential::g_prime(double r) const { return finite_or_throw(g_prime_(r), "g'", r); }
double Potential::g_hat(double r) const { return finite_or_throw(g_hat_(r), "g_hat", r); }
double Potential::beta(double r) const { return finite_or_throw(g_(r) + lambda_ * r, "beta", r); }
double Potential::beta_prime(double r) const { return finite_or_throw(g_prime_(r) + lambda_, "beta'", r); }
double Potential::beta_hat(double r) const
{
    return finite_or_throw(g_hat_(r) + 0.5 * lambda_ * r * r, "beta_hat", r);
}

double yosida_resolvent(const Potential& pot, const YosidaParams& yp, double r)
{
    if (!(yp.epsilon > 0.0)) {
        throw ConfigError("yosida.epsilon must be > 0");
    }
    if (r == 0.0) {
        return 0.0;
    }
    const double eps = yp.epsilon;
    auto residual = [&](double y) { return y + eps * pot.beta(y) - r; };

    // beta(0) = 0 and beta monotone put the root between 0 and r.
    double lo = std::min(0.0, r);
    double hi = std::max(0.0, r);
    if (residual(lo) > 0.0 || residual(hi) < 0.0) {
        throw SolverError("yosida_resolvent: no bracket; beta is not monotone");
    }
    double y = r / (1.0 + eps * std::max(pot.beta_prime(0.0), 0.0));
    y = std::clamp(y, lo, hi);
    for (int it = 0; it < yp.max_iter; ++it) {
        const double f = residual(y);
        if (std::abs(f) < yp.root_tol) {
            // One polishing Newton step; quadratic convergence takes it to round-off.
            const double df = 1.0 + eps * pot.beta_prime(y);
            const double next = y - f / df;
            return (df > 0.0 && next >= lo && next <= hi && std::abs(residual(next)) <= std::abs(f)) ? next : y;
        }
        if (f > 0.0) {
            hi = y;
        } else {
            lo = y;
        }
        const double df = 1.0 + eps * pot.beta_prime(y);
        double next = y - f / df;
        if (!(df > 0.0) || !(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) {
            return next;
        }
        y = next;
    }
    std::ostringstream msg;
    msg << "yosida_resolvent: no convergence after " << yp.max_iter << " iterations at r = " << r;
    throw SolverError(msg.str());
}

double yosida_apply(const Potential& pot, const YosidaParams& yp, double r)
{
    return (r - yosida_resolvent(pot, yp, r)) / yp.epsilon;
}

double yosida_derivative(const Potential& pot, const YosidaParams& yp, double r)
{
    const double j = yosida_resolvent(pot, yp, r);
    const double bp = pot.beta_prime(j);
    return bp / (1.0 + yp.epsilon * bp);
}

DissipativityReport check_dissipativity(const Potential& pot, double lambda1, double kappa, double scan_radius,
                                        int samples)
{
    if (!(kappa > 0.0)) {
        throw ConfigError("check_dissipativity: kappa must be > 0");
    }
    if (!(scan_radius > 0.0) || samples < 2) {
        throw ConfigError("check_dissipativity: need scan_radius > 0 and samples >= 2");
    }
    DissipativityReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double mag = 0.5 * scan_radius + 0.5 * scan_radius * k / (samples - 1);
        for (const double r : {mag, -mag}) {
            const double v = pot.g(r) * r + (lambda1 - kappa) * r * r;
            rep.min_margin = std::min(rep.min_margin, v);
        }
    }
    rep.holds = rep.min_margin > 0.0;
    return rep;
}

} // namespace fch
