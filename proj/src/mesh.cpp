#include "fch/mesh.hpp"

#include "fch/errors.hpp"

#include <cmath>
#include <sstream>

namespace fch {

FracMesh::FracMesh(double a, double b, int n_elems)
    : a_(a), b_(b), n_elems_(n_elems), h_(0.0)
{
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        std::ostringstream msg;
        msg << "mesh: need a < b, got a = " << a << ", b = " << b;
        throw ConfigError(msg.str());
    }
    if (n_elems < 2) {
        throw ConfigError("mesh: n_elems must be >= 2, got " + std::to_string(n_elems));
    }
    h_ = (b - a) / n_elems;
}

double FracMesh::node(int k) const noexcept
{
    if (k >= n_elems_) {
        return b_;
    }
    return a_ + k * h_;
}

Eigen::VectorXd FracMesh::nodes() const
{
    Eigen::VectorXd x(n_elems_ + 1);
    for (int k = 0; k <= n_elems_; ++k) {
        x[k] = node(k);
    }
    return x;
}

FracMesh build_uniform_mesh(double a, double b, int n_elems)
{
    return FracMesh(a, b, n_elems);
}

Matrix mass_matrix(const FracMesh& mesh)
{
    const int n = mesh.dof_count();
    const double h = mesh.h();
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 2.0 * h / 3.0;
        if (i + 1 < n) {
            m(i, i + 1) = h / 6.0;
            m(i + 1, i) = h / 6.0;
        }
    }
    return m;
}

FemVector interpolate(const FracMesh& mesh, const std::function<double(double)>& f)
{
    FemVector v(mesh.dof_count());
    for (int i = 0; i < mesh.dof_count(); ++i) {
        const double x = mesh.node(i + 1);
        const double fx = f(x);
        if (!std::isfinite(fx)) {
            std::ostringstream msg;
            msg << "interpolate: non-finite sample at x = " << x;
            throw NumericalError(msg.str());
        }
        v[i] = fx;
    }
    return v;
}

double linf_norm(const FracMesh& mesh, const FemVector& v)
{
    if (v.size() != mesh.dof_count()) {
        throw NumericalError("linf_norm: dimension mismatch");
    }
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace fch
