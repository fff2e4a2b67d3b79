#pragma once

#include "fch/mesh.hpp"

#include <Eigen/Cholesky>

#include <filesystem>
#include <memory>

namespace fch {

/// Exponents of the flux operator (s) and of the chemical-potential
/// operator (sigma). Both must lie in the open interval (0, 1).
class FracExponents {
public:
    FracExponents(double s, double sigma);

    [[nodiscard]] double s() const noexcept { return s_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }

private:
    double s_;
    double sigma_;
};

/// C(N, s) = s 2^{2s} Gamma(s + N/2) / (pi^{N/2} Gamma(1 - s)).
[[nodiscard]] double normalization_constant(int dim, double s);

struct AssemblyOptions {
    /// Tensor Gauss points per direction for well-separated element pairs.
    int regular_order = 5;
    /// Gauss points for the smooth factor left after the Duffy transform,
    /// and for the exterior-complement integrals on interior elements.
    int singular_order = 8;
};

/// Stiffness matrix of the bilinear form
///   (C_s / 2) ∬_{R x R} (u(x) - u(y)) (v(x) - v(y)) / |x - y|^{1+2s} dx dy
/// on interior hat functions extended by zero outside (a, b). The result is
/// dense and exactly symmetric. Element pairs are visited in lexicographic
/// order so repeated runs are bit-identical.
[[nodiscard]] Matrix assemble_gagliardo(const FracMesh& mesh, double s, double c_s,
                                        const AssemblyOptions& opts = {});

/// Assembled operators for one mesh and one pair of exponents, together with
/// Cholesky factorizations that are built once and then only read.
class OperatorSet {
public:
    OperatorSet(const FracMesh& mesh, const FracExponents& exps, const AssemblyOptions& opts = {});

    [[nodiscard]] const FracMesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const FracExponents& exponents() const noexcept { return exps_; }
    [[nodiscard]] const Matrix& a_s() const noexcept { return *a_s_; }
    [[nodiscard]] const Matrix& a_sigma() const noexcept { return *a_sigma_; }
    [[nodiscard]] const Matrix& mass() const noexcept { return *mass_; }
    [[nodiscard]] double c_s() const noexcept { return c_s_; }
    [[nodiscard]] double c_sigma() const noexcept { return c_sigma_; }
    [[nodiscard]] int dof_count() const noexcept { return mesh_.dof_count(); }

    [[nodiscard]] const Eigen::LLT<Matrix>& a_s_factor() const noexcept { return *llt_s_; }
    [[nodiscard]] const Eigen::LLT<Matrix>& a_sigma_factor() const noexcept { return *llt_sigma_; }
    [[nodiscard]] const Eigen::LLT<Matrix>& mass_factor() const noexcept { return *llt_mass_; }

    [[nodiscard]] double xnorm_s(const FemVector& v) const;
    [[nodiscard]] double xnorm_sigma(const FemVector& v) const;
    [[nodiscard]] double dual_norm_s(const FemVector& f) const;
    [[nodiscard]] double dual_norm_sigma(const FemVector& f) const;
    /// sqrt(f^T M^{-1} f): the L2 norm of the Riesz representative of f.
    [[nodiscard]] double dual_norm_mass(const FemVector& f) const;
    /// sqrt(v^T M v).
    [[nodiscard]] double l2_norm(const FemVector& v) const;

private:
    FracMesh mesh_;
    FracExponents exps_;
    double c_s_;
    double c_sigma_;
    std::shared_ptr<const Matrix> a_s_;
    std::shared_ptr<const Matrix> a_sigma_;
    std::shared_ptr<const Matrix> mass_;
    std::shared_ptr<const Eigen::LLT<Matrix>> llt_s_;
    std::shared_ptr<const Eigen::LLT<Matrix>> llt_sigma_;
    std::shared_ptr<const Eigen::LLT<Matrix>> llt_mass_;
};

/// sqrt(v^T A v).
[[nodiscard]] double xnorm(const Matrix& a, const FemVector& v);

/// sqrt(f^T A^{-1} f) through a Cholesky factorization of A. Throws
/// NumericalError if A is not positive definite.
[[nodiscard]] double dual_norm(const Matrix& a, const FemVector& f);
[[nodiscard]] double dual_norm(const Eigen::LLT<Matrix>& factor, const FemVector& f);

/// Factor an SPD matrix, throwing NumericalError (with `what`) on failure.
[[nodiscard]] Eigen::LLT<Matrix> factor_spd(const Matrix& a, const char* what);

/// Generalized eigenpairs of the symmetric pencil A v = mu M v, M SPD.
/// Eigenvalues ascend; eigenvectors are M-orthonormal.
struct PencilEigen {
    Eigen::VectorXd values;
    Matrix vectors;
};
[[nodiscard]] PencilEigen solve_pencil(const Matrix& a, const Matrix& m, bool with_vectors = true);

/// Smallest generalized eigenvalue of A_sigma v = lambda M v.
[[nodiscard]] double rayleigh_lambda1(const Matrix& a_sigma, const Matrix& mass);

/// Binary stiffness dump: 32-byte header followed by dof_count^2 row-major
/// little-endian float64 values.
///   bytes  0..7   magic "FCHGAGL1"
///   bytes  8..15  dof_count (uint64)
///   bytes 16..23  s (float64)
///   bytes 24..31  C_s (float64)
struct StiffnessDump {
    Matrix matrix;
    double s = 0.0;
    double c_s = 0.0;
};
void write_stiffness(const std::filesystem::path& path, const Matrix& a, double s, double c_s);
[[nodiscard]] StiffnessDump read_stiffness(const std::filesystem::path& path);

} // namespace fch
