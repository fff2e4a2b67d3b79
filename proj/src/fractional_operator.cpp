#include "fch/fractional_operator.hpp"

#include "fch/errors.hpp"
#include "fch/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fch {

namespace {

void require_open_unit(double value, const char* name)
{
    if (!(value > 0.0 && value < 1.0)) {
        std::ostringstream msg;
        msg << name << " must lie in (0, 1), got " << value;
        throw ConfigError(msg.str());
    }
}

/// Accumulates contributions into the upper triangle of a dof matrix,
/// silently dropping boundary nodes (which carry no dof).
class UpperAccumulator {
public:
    UpperAccumulator(Matrix& target, int n_elems) : target_(target), n_elems_(n_elems) {}

    void add(int node_i, int node_j, double value)
    {
        if (node_i <= 0 || node_i >= n_elems_ || node_j <= 0 || node_j >= n_elems_) {
            return;
        }
        const int i = node_i - 1;
        const int j = node_j - 1;
        if (i <= j) {
            target_(i, j) += value;
        }
    }

private:
    Matrix& target_;
    int n_elems_;
};

void check_finite(double value, int k, int l)
{
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "assemble_gagliardo: non-finite contribution for element pair (" << k << ", " << l << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

FracExponents::FracExponents(double s, double sigma) : s_(s), sigma_(sigma)
{
    require_open_unit(s, "frac.s");
    require_open_unit(sigma, "frac.sigma");
}

double normalization_constant(int dim, double s)
{
    if (dim < 1) {
        throw ConfigError("normalization_constant: dimension must be >= 1");
    }
    require_open_unit(s, "s");
    const double half_n = 0.5 * dim;
    return s * std::pow(2.0, 2.0 * s) * std::tgamma(s + half_n)
        / (std::pow(std::numbers::pi, half_n) * std::tgamma(1.0 - s));
}

Matrix assemble_gagliardo(const FracMesh& mesh, double s, double c_s, const AssemblyOptions& opts)
{
    require_open_unit(s, "s");
    if (opts.regular_order < 2 || opts.singular_order < 2) {
        throw ConfigError("assemble_gagliardo: quadrature orders must be >= 2");
    }
    const int n = mesh.n_elems();
    const int dofs = mesh.dof_count();
    const double h = mesh.h();
    const double p = 1.0 + 2.0 * s;
    const double scale = std::pow(h, 1.0 - 2.0 * s);
    const GaussRule reg = gauss_legendre_unit(opts.regular_order);
    const GaussRule sing = gauss_legendre_unit(opts.singular_order);

    // Identical pair K x K: (phi_a(x) - phi_a(y)) = phi_a' (x - y), and
    // ∫_0^1∫_0^1 |xi - eta|^{1-2s} = 2 / ((2-2s)(3-2s)).
    const double self_integral = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));

    // Touching pair K = [x_{c-1}, x_c], L = [x_c, x_{c+1}] with
    // x = x_c - h xi, y = x_c + h eta. Differences of the three hats
    // (c-1, c, c+1) are xi, eta - xi, -eta. Duffy: split the square along
    // the diagonal, integrate the radial variable exactly.
    std::array<std::array<double, 3>, 3> touch{};
    {
        auto diffs = [](double xi, double eta) {
            return std::array<double, 3>{xi, eta - xi, -eta};
        };
        for (int q = 0; q < sing.size(); ++q) {
            const double t = sing.points[q];
            const double kern = sing.weights[q] * std::pow(1.0 + t, -p);
            const auto lower = diffs(1.0, t);
            const auto upper = diffs(t, 1.0);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    touch[a][b] += kern * (lower[a] * lower[b] + upper[a] * upper[b]);
                }
            }
        }
        for (auto& row : touch) {
            for (double& v : row) {
                v /= (3.0 - 2.0 * s);
            }
        }
    }

    // Disjoint pairs at offset m >= 2, x = x_k + h xi, y = x_{k+m} + h eta.
    // Slots: hats k, k+1 evaluated at x (sign +), hats k+m, k+m+1 at y (sign -).
    std::vector<std::array<std::array<double, 4>, 4>> far(std::max(n, 2));
    for (int m = 2; m < n; ++m) {
        auto& sm = far[m];
        sm = {};
        for (int q = 0; q < reg.size(); ++q) {
            const double xi = reg.points[q];
            const std::array<double, 2> nx{1.0 - xi, xi};
            for (int r = 0; r < reg.size(); ++r) {
                const double eta = reg.points[r];
                const std::array<double, 2> ny{1.0 - eta, eta};
                const double kern = reg.weights[q] * reg.weights[r] * std::pow(m + eta - xi, -p);
                const std::array<double, 4> f{nx[0], nx[1], -ny[0], -ny[1]};
                for (int a = 0; a < 4; ++a) {
                    for (int b = 0; b < 4; ++b) {
                        sm[a][b] += kern * f[a] * f[b];
                    }
                }
            }
        }
    }

    Matrix raw = Matrix::Zero(dofs, dofs);
    UpperAccumulator acc(raw, n);

    for (int k = 0; k < n; ++k) {
        for (int l = k; l < n; ++l) {
            const int m = l - k;
            if (m == 0) {
                const double v = scale * self_integral;
                check_finite(v, k, l);
                acc.add(k, k, v);
                acc.add(k + 1, k + 1, v);
                acc.add(k, k + 1, -v);
                acc.add(k + 1, k, -v);
            } else if (m == 1) {
                const std::array<int, 3> nodes{k, k + 1, k + 2};
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        const double v = 2.0 * scale * touch[a][b];
                        check_finite(v, k, l);
                        acc.add(nodes[a], nodes[b], v);
                    }
                }
            } else {
                const std::array<int, 4> nodes{k, k + 1, l, l + 1};
                const auto& sm = far[m];
                for (int a = 0; a < 4; ++a) {
                    for (int b = 0; b < 4; ++b) {
                        const double v = 2.0 * scale * sm[a][b];
                        check_finite(v, k, l);
                        acc.add(nodes[a], nodes[b], v);
                    }
                }
            }
        }
    }

    // Exterior complement: 2 ∫_Omega phi_i phi_j kappa(x) dx with
    // kappa(x) = ((x - a)^{-2s} + (b - x)^{-2s}) / (2s). On the two boundary
    // elements only the hat vanishing at the boundary survives and the
    // integral ∫_0^1 xi^2 xi^{-2s} = 1 / (3 - 2s) is exact.
    const double comp_scale = 2.0 * scale / (2.0 * s);
    const double edge = 1.0 / (3.0 - 2.0 * s);
    for (int k = 0; k < n; ++k) {
        std::array<std::array<double, 2>, 2> local{};
        if (k == 0) {
            local[1][1] += edge;
        } else {
            for (int q = 0; q < sing.size(); ++q) {
                const double xi = sing.points[q];
                const std::array<double, 2> nx{1.0 - xi, xi};
                const double w = sing.weights[q] * std::pow(k + xi, -2.0 * s);
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        local[a][b] += w * nx[a] * nx[b];
                    }
                }
            }
        }
        if (k == n - 1) {
            local[0][0] += edge;
        } else {
            for (int q = 0; q < sing.size(); ++q) {
                const double xi = sing.points[q];
                const std::array<double, 2> nx{1.0 - xi, xi};
                const double w = sing.weights[q] * std::pow(n - k - xi, -2.0 * s);
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        local[a][b] += w * nx[a] * nx[b];
                    }
                }
            }
        }
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double v = comp_scale * local[a][b];
                check_finite(v, k, -1);
                acc.add(k + a, k + b, v);
            }
        }
    }

    Matrix out(dofs, dofs);
    const double half_c = 0.5 * c_s;
    for (int j = 0; j < dofs; ++j) {
        for (int i = 0; i <= j; ++i) {
            out(i, j) = half_c * raw(i, j);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

Eigen::LLT<Matrix> factor_spd(const Matrix& a, const char* what)
{
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": matrix is not positive definite");
    }
    return llt;
}

OperatorSet::OperatorSet(const FracMesh& mesh, const FracExponents& exps, const AssemblyOptions& opts)
    : mesh_(mesh), exps_(exps),
      c_s_(normalization_constant(1, exps.s())),
      c_sigma_(normalization_constant(1, exps.sigma()))
{
    a_s_ = std::make_shared<const Matrix>(assemble_gagliardo(mesh, exps.s(), c_s_, opts));
    llt_s_ = std::make_shared<const Eigen::LLT<Matrix>>(factor_spd(*a_s_, "A_s"));
    if (exps.sigma() == exps.s()) {
        a_sigma_ = a_s_;
        llt_sigma_ = llt_s_;
    } else {
        a_sigma_ = std::make_shared<const Matrix>(assemble_gagliardo(mesh, exps.sigma(), c_sigma_, opts));
        llt_sigma_ = std::make_shared<const Eigen::LLT<Matrix>>(factor_spd(*a_sigma_, "A_sigma"));
    }
    mass_ = std::make_shared<const Matrix>(mass_matrix(mesh));
    llt_mass_ = std::make_shared<const Eigen::LLT<Matrix>>(factor_spd(*mass_, "M"));
}

double OperatorSet::xnorm_s(const FemVector& v) const { return xnorm(*a_s_, v); }
double OperatorSet::xnorm_sigma(const FemVector& v) const { return xnorm(*a_sigma_, v); }
double OperatorSet::dual_norm_s(const FemVector& f) const { return dual_norm(*llt_s_, f); }
double OperatorSet::dual_norm_sigma(const FemVector& f) const { return dual_norm(*llt_sigma_, f); }
double OperatorSet::dual_norm_mass(const FemVector& f) const { return dual_norm(*llt_mass_, f); }
double OperatorSet::l2_norm(const FemVector& v) const { return xnorm(*mass_, v); }

double xnorm(const Matrix& a, const FemVector& v)
{
    if (a.rows() != v.size() || a.cols() != v.size()) {
        throw NumericalError("xnorm: dimension mismatch");
    }
    const double q = v.dot(a * v);
    return std::sqrt(std::max(q, 0.0));
}

double dual_norm(const Eigen::LLT<Matrix>& factor, const FemVector& f)
{
    if (factor.rows() != f.size()) {
        throw NumericalError("dual_norm: dimension mismatch");
    }
    // f^T A^{-1} f = |L^{-1} f|^2 with A = L L^T.
    const Eigen::VectorXd y = factor.matrixL().solve(f);
    return y.norm();
}

double dual_norm(const Matrix& a, const FemVector& f)
{
    return dual_norm(factor_spd(a, "dual_norm"), f);
}

PencilEigen solve_pencil(const Matrix& a, const Matrix& m, bool with_vectors)
{
    if (a.rows() != m.rows() || a.cols() != m.cols() || a.rows() != a.cols()) {
        throw NumericalError("solve_pencil: dimension mismatch");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
        a, m, with_vectors ? (Eigen::ComputeEigenvectors | Eigen::Ax_lBx) : (Eigen::EigenvaluesOnly | Eigen::Ax_lBx));
    if (es.info() != Eigen::Success) {
        throw SolverError("solve_pencil: generalized eigensolver failed");
    }
    PencilEigen out;
    out.values = es.eigenvalues();
    if (with_vectors) {
        out.vectors = es.eigenvectors();
    }
    return out;
}

double rayleigh_lambda1(const Matrix& a_sigma, const Matrix& mass)
{
    const PencilEigen pe = solve_pencil(a_sigma, mass, false);
    return pe.values[0];
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value)
{
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in)
{
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) {
        throw MissingInputError("read_stiffness: truncated file");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    return std::bit_cast<T>(bytes);
}

constexpr char kMagic[8] = {'F', 'C', 'H', 'G', 'A', 'G', 'L', '1'};

} // namespace

void write_stiffness(const std::filesystem::path& path, const Matrix& a, double s, double c_s)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("write_stiffness: cannot open " + path.string());
    }
    out.write(kMagic, sizeof(kMagic));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(a.rows()));
    put_le<double>(out, s);
    put_le<double>(out, c_s);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            put_le<double>(out, a(i, j));
        }
    }
}

StiffnessDump read_stiffness(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("read_stiffness: cannot open " + path.string());
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw NumericalError("read_stiffness: bad magic in " + path.string());
    }
    const auto n = get_le<std::uint64_t>(in);
    StiffnessDump dump;
    dump.s = get_le<double>(in);
    dump.c_s = get_le<double>(in);
    dump.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < dump.matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < dump.matrix.cols(); ++j) {
            dump.matrix(i, j) = get_le<double>(in);
        }
    }
    return dump;
}

} // namespace fch
