#pragma once

#include <Eigen/Dense>

#include <functional>

namespace fch {

/// Coefficients of a continuous piecewise-linear function on the interior
/// nodes; the function vanishes at both endpoints and outside the interval.
using FemVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform partition of (a, b). Degrees of freedom are the interior nodes
/// x_1, ..., x_{n-1}; dof i sits at node i + 1.
class FracMesh {
public:
    FracMesh(double a, double b, int n_elems);

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] int n_elems() const noexcept { return n_elems_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] int dof_count() const noexcept { return n_elems_ - 1; }
    [[nodiscard]] double length() const noexcept { return b_ - a_; }

    /// Node k, k = 0..n_elems. The last node is exactly b.
    [[nodiscard]] double node(int k) const noexcept;
    [[nodiscard]] Eigen::VectorXd nodes() const;

    /// Value of the P1 function with interior coefficients `v` at node k.
    [[nodiscard]] static double nodal_value(const FemVector& v, int k, int n_elems) noexcept
    {
        return (k <= 0 || k >= n_elems) ? 0.0 : v[k - 1];
    }

private:
    double a_;
    double b_;
    int n_elems_;
    double h_;
};

/// Throws ConfigError unless a < b and n_elems >= 2.
[[nodiscard]] FracMesh build_uniform_mesh(double a, double b, int n_elems);

/// P1 mass matrix on interior dofs: tridiagonal with 2h/3 on the diagonal
/// and h/6 off it. Stored dense to match the stiffness matrices.
[[nodiscard]] Matrix mass_matrix(const FracMesh& mesh);

/// Nodal interpolant; rejects non-finite samples.
[[nodiscard]] FemVector interpolate(const FracMesh& mesh, const std::function<double(double)>& f);

/// Discrete sup-norm: max |coeff|. Exact for P1 functions.
[[nodiscard]] double linf_norm(const FracMesh& mesh, const FemVector& v);

} // namespace fch
