#include "fch/diagnostics.hpp"

#include "fch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace fch {

std::vector<DistanceSample> omega_limit_distances(const Trajectory& traj, const FemVector& phi,
                                                  const OperatorSet& ops)
{
    if (phi.size() != ops.dof_count()) {
        throw NumericalError("omega_limit_distances: dimension mismatch");
    }
    std::vector<DistanceSample> out;
    out.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (traj.states[k].size() != phi.size()) {
            throw NumericalError("omega_limit_distances: dimension mismatch");
        }
        out.push_back({traj.state_times[k], ops.xnorm_sigma(traj.states[k] - phi)});
    }
    return out;
}

const char* to_string(FitMode mode) noexcept
{
    return mode == FitMode::exponential ? "exponential" : "algebraic";
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return f;
}

} // namespace

LojFit decay_fit(const std::vector<double>& t, const std::vector<double>& e, double phi_energy, double theta,
                 const DecayFitOptions& opts)
{
    if (t.size() != e.size()) {
        throw NumericalError("decay_fit: time and energy series differ in length");
    }
    if (!(theta > 0.0 && theta <= 0.5)) {
        throw ConfigError("decay_fit: theta must lie in (0, 1/2]");
    }
    LojFit fit;
    fit.theta = theta;
    fit.e_limit = phi_energy;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double scale = std::abs(phi_energy);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= opts.t_min) {
            scale = std::max(scale, std::abs(e[i]));
        }
    }
    const double floor = 100.0 * eps * scale;
    fit.noise_floor = floor;
    bool any_positive = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < opts.t_min) {
            continue;
        }
        double gap = e[i] - phi_energy;
        if (gap < 0.0) {
            ++fit.clipped;
            gap = 0.0;
        }
        if (gap > 0.0) {
            any_positive = true;
        }
        if (!(gap > floor)) {
            break;
        }
        fit.window_t.push_back(t[i]);
        fit.window_h.push_back(std::pow(gap, theta));
    }
    if (fit.clipped > 0) {
        std::cerr << "warning: decay_fit: clipped " << fit.clipped << " negative energy gaps to zero\n";
    }
    if (!any_positive) {
        fit.degenerate = true;
        return fit;
    }
    fit.samples = static_cast<int>(fit.window_t.size());
    if (fit.samples < opts.min_samples) {
        std::ostringstream msg;
        msg << "decay_fit: window has " << fit.samples << " samples, need " << opts.min_samples;
        throw NumericalError(msg.str());
    }
    const auto [hmin, hmax] = std::minmax_element(fit.window_h.begin(), fit.window_h.end());
    fit.decades = std::log10(*hmax / *hmin);
    if (fit.decades < opts.min_decades) {
        std::ostringstream msg;
        msg << "decay_fit: H spans " << fit.decades << " decades, need " << opts.min_decades;
        throw NumericalError(msg.str());
    }
    fit.t_start = fit.window_t.front();
    fit.t_end = fit.window_t.back();

    std::vector<double> logh(fit.window_h.size());
    std::vector<double> logt(fit.window_h.size());
    for (std::size_t i = 0; i < logh.size(); ++i) {
        logh[i] = std::log(fit.window_h[i]);
        logt[i] = std::log1p(fit.window_t[i] - fit.t_start);
    }
    const LineFit ex = least_squares(fit.window_t, logh);
    const LineFit al = least_squares(logt, logh);
    fit.exponential_rate = -ex.slope;
    fit.exponential_r_squared = ex.r_squared;
    fit.algebraic_exponent = al.slope;
    fit.algebraic_r_squared = al.r_squared;
    fit.exponential_intercept = ex.intercept;
    fit.algebraic_intercept = al.intercept;
    if (ex.r_squared >= al.r_squared) {
        fit.mode = FitMode::exponential;
        fit.rate = fit.exponential_rate;
        fit.r_squared = ex.r_squared;
    } else {
        fit.mode = FitMode::algebraic;
        fit.rate = fit.algebraic_exponent;
        fit.r_squared = al.r_squared;
    }
    return fit;
}

LojFit decay_fit(const Trajectory& traj, double phi_energy, double theta, const DecayFitOptions& opts)
{
    return decay_fit(traj.times(), traj.energies(), phi_energy, theta, opts);
}

PoincareReport poincare_report(const OperatorSet& ops, int trials, std::uint64_t seed, int localized)
{
    const FracMesh& mesh = ops.mesh();
    const double s = ops.exponents().s();
    PoincareReport rep;
    rep.radius = std::max(std::abs(mesh.a()), std::abs(mesh.b()));
    const double shell = 2.0; // |B_{R+1} \ B_R| in one dimension
    rep.bound = shell / std::pow(2.0 * rep.radius + 1.0, 1.0 + 2.0 * s);

    const int n = ops.dof_count();
    const double raw_scale = 2.0 / ops.c_s();
    auto ratio = [&](const FemVector& v, double& out) {
        const double l2 = v.dot(ops.mass() * v);
        if (!(l2 > 0.0)) {
            return false;
        }
        out = raw_scale * v.dot(ops.a_s() * v) / l2;
        return true;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < trials; ++k) {
        FemVector v(n);
        for (int i = 0; i < n; ++i) {
            v[i] = normal(rng);
        }
        double r = 0.0;
        if (!ratio(v, r)) {
            ++rep.skipped;
            continue;
        }
        min_ratio = std::min(min_ratio, r);
        ++rep.trials;
    }
    double min_loc = std::numeric_limits<double>::infinity();
    const int per_side = std::min(localized / 2, n);
    std::vector<int> dofs;
    for (int i = 0; i < per_side; ++i) {
        dofs.push_back(i);
        dofs.push_back(n - 1 - i);
    }
    for (int i : dofs) {
        FemVector v = FemVector::Zero(n);
        v[i] = 1.0;
        double r = 0.0;
        if (ratio(v, r)) {
            min_loc = std::min(min_loc, r);
            ++rep.localized;
        }
    }
    rep.min_ratio_localized = min_loc;
    rep.min_ratio = std::min(min_ratio, min_loc);
    rep.holds = rep.min_ratio >= rep.bound;
    return rep;
}

std::vector<std::pair<double, double>> smoothing_report(const Trajectory& traj, const std::vector<double>& t0_grid)
{
    std::vector<std::pair<double, double>> out;
    for (const double t0 : t0_grid) {
        double sup = 0.0;
        for (const auto& s : traj.steps) {
            if (s.t >= t0 - 1e-12) {
                sup = std::max(sup, s.monitors.w_xnorm * s.monitors.w_xnorm);
            }
        }
        out.emplace_back(t0, t0 * sup);
    }
    return out;
}

DualityReport duality_check(const Matrix& a, int trials, std::uint64_t seed)
{
    const Eigen::LLT<Matrix> llt = factor_spd(a, "duality_check");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    DualityReport rep;
    for (int k = 0; k < trials; ++k) {
        FemVector v(a.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = normal(rng);
        }
        const double primal = xnorm(a, v);
        const double dual = dual_norm(llt, a * v);
        rep.max_rel_error = std::max(rep.max_rel_error, std::abs(dual - primal) / primal);
        ++rep.trials;
    }
    return rep;
}

YosidaSuiteReport yosida_suite(const Potential& pot, double eps, int samples, double radius, std::uint64_t seed)
{
    YosidaSuiteReport rep;
    rep.eps_ladder = {1e-1, 1e-2, 1e-3};
    rep.max_error.assign(rep.eps_ladder.size(), 0.0);
    YosidaParams yp;
    yp.epsilon = eps;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-radius, radius);
    constexpr double slack = 1e-12;
    for (int k = 0; k < samples; ++k) {
        const double r1 = unif(rng);
        const double r2 = unif(rng);
        const double b1 = yosida_apply(pot, yp, r1);
        const double b2 = yosida_apply(pot, yp, r2);
        const double scale = 1.0 + std::abs(b1) + std::abs(b2);
        if (std::abs(b1) > std::abs(pot.beta(r1)) + slack * scale) {
            ++rep.bound_violations;
        }
        if (std::abs(b1 - b2) > std::abs(r1 - r2) / eps + slack * scale) {
            ++rep.lipschitz_violations;
        }
        if ((b1 - b2) * (r1 - r2) < -slack * scale) {
            ++rep.monotone_violations;
        }
        const double j1 = yosida_resolvent(pot, yp, r1);
        const double j2 = yosida_resolvent(pot, yp, r2);
        if (std::abs(j1 - j2) > std::abs(r1 - r2) + slack * (1.0 + std::abs(r1) + std::abs(r2))) {
            ++rep.resolvent_violations;
        }
        const double exact = pot.beta(r1);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < rep.eps_ladder.size(); ++e) {
            YosidaParams ye = yp;
            ye.epsilon = rep.eps_ladder[e];
            const double err = std::abs(yosida_apply(pot, ye, r1) - exact);
            rep.max_error[e] = std::max(rep.max_error[e], err);
            if (err > prev + slack * scale) {
                ++rep.convergence_violations;
            }
            prev = err;
        }
        ++rep.samples;
    }
    return rep;
}

} // namespace fch
