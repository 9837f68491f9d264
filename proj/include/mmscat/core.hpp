#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "mmscat/error.hpp"

namespace mmscat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int max_dimension = 8;
inline constexpr Complex I_unit{0.0, 1.0};

/// Max row-sum norm, ||M|| = max_l sum_s |M_ls|.
template <typename Derived>
typename Derived::RealScalar matrix_norm(const Eigen::MatrixBase<Derived>& m)
{
    if (m.size() == 0)
        return 0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::PlainObject hermitian_part(const Eigen::MatrixBase<Derived>& m)
{
    return (m + m.adjoint()) / typename Derived::Scalar(2);
}

template <typename Derived>
typename Derived::PlainObject anti_hermitian_part(const Eigen::MatrixBase<Derived>& m)
{
    return (m - m.adjoint()) / typename Derived::Scalar(2);
}

template <typename Derived>
typename Derived::RealScalar hermiticity_residual(const Eigen::MatrixBase<Derived>& m)
{
    return matrix_norm(m - m.adjoint());
}

template <typename Derived>
typename Derived::RealScalar unitarity_residual(const Eigen::MatrixBase<Derived>& m)
{
    using Plain = typename Derived::PlainObject;
    return matrix_norm(m.adjoint() * m - Plain::Identity(m.rows(), m.cols()));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
    return m.allFinite();
}

/// Nearest unitary matrix (polar factor W V^dagger of the SVD W S V^dagger).
template <typename Derived>
typename Derived::PlainObject polar_unitary(const Eigen::MatrixBase<Derived>& m)
{
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(
        m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

/// 2-norm condition number; infinity for an exactly singular matrix.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& m)
{
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0)
        return 1.0;
    const double lo = s(s.size() - 1);
    return lo > 0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Boundary condition  -B^dagger Psi(0) + A^dagger Psi'(0) = 0

struct BoundaryCondition {
    ComplexMatrix U;
    ComplexMatrix A;
    ComplexMatrix B;

    Eigen::Index dim() const { return U.rows(); }
};

inline constexpr double unitarity_tolerance = 1e-10;

/// A = (U + I)/2, B = i(U - I)/2. Throws NonUnitary when U is not unitary.
template <typename Derived>
BoundaryCondition boundary_pair(const Eigen::MatrixBase<Derived>& u)
{
    if (u.rows() != u.cols() || u.rows() < 1 || u.rows() > max_dimension)
        throw InvalidInput("boundary matrix must be square with 1 <= n <= 8");
    if (!u.allFinite())
        throw InvalidInput("boundary matrix has non-finite entries");
    const double res = unitarity_residual(u);
    if (res > unitarity_tolerance)
        throw NonUnitary("||U^dagger U - I|| = " + std::to_string(res));

    const auto n = u.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    BoundaryCondition bc;
    bc.U = u;
    bc.A = (bc.U + id) / 2.0;
    bc.B = I_unit * (bc.U - id) / 2.0;
    return bc;
}

/// Residuals of B^dagger A = A^dagger B; the second entry is the smallest
/// eigenvalue of A^dagger A + B^dagger B (positive for a valid pair).
inline std::pair<double, double> boundary_pair_residuals(const BoundaryCondition& bc)
{
    const double sym = matrix_norm(bc.B.adjoint() * bc.A - bc.A.adjoint() * bc.B);
    const ComplexMatrix gram = bc.A.adjoint() * bc.A + bc.B.adjoint() * bc.B;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
    return {sym, es.eigenvalues().minCoeff()};
}

// ---------------------------------------------------------------------------
// Small linear-algebra kernels

template <typename Matrix>
struct NullspaceProjection {
    Matrix projector;
    int deficiency = 0;
    Eigen::VectorXd singular_values;
};

/// Orthogonal projector onto the span of the left singular vectors of `m`
/// whose singular value is below `tol`, i.e. onto ker(m^dagger).
template <typename Derived>
NullspaceProjection<typename Derived::PlainObject>
nullspace_projector(const Eigen::MatrixBase<Derived>& m, double tol)
{
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(m, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    const auto n = m.rows();

    NullspaceProjection<Plain> out;
    out.singular_values = s;
    // singular values beyond min(rows, cols) are structurally zero
    Eigen::Index first_null = 0;
    while (first_null < s.size() && s(first_null) >= tol)
        ++first_null;
    out.deficiency = static_cast<int>(n - first_null);
    const auto null_basis = svd.matrixU().rightCols(out.deficiency);
    out.projector = null_basis * null_basis.adjoint();
    if (out.deficiency == 0)
        out.projector = Plain::Zero(n, n);
    return out;
}

/// Default numerical-rank threshold: `relative` times the largest singular value.
template <typename Derived>
double rank_tolerance(const Eigen::MatrixBase<Derived>& m, double relative = 1e-6)
{
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    return relative * smax;
}

/// R = M^{-1/2} for Hermitian positive definite M.
template <typename Derived>
typename Derived::PlainObject psd_inv_sqrt(const Eigen::MatrixBase<Derived>& m,
                                           double tol = 1e-12)
{
    using Plain = typename Derived::PlainObject;
    if (m.rows() != m.cols())
        throw InvalidInput("psd_inv_sqrt: matrix must be square");
    const Plain h = hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<Plain> es(h);
    const auto& lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    if (lam.minCoeff() <= tol * scale)
        throw NotPositiveDefinite("smallest eigenvalue " + std::to_string(lam.minCoeff()));
    const Eigen::VectorXd inv_sqrt = lam.cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

// ---------------------------------------------------------------------------
// Grids

struct GridSpec {
    double k_max = 40.0;
    int n_k = 1600;
    double x_max = 20.0;
    int n_x = 1001;
    double tol_rank = 1e-6;  ///< relative to the largest singular value
    double tol_tail = 1e-8;

    /// Throws InvalidInput when counts < 2 or cutoffs <= 0.
    void validate() const
    {
        if (!(k_max > 0) || !(x_max > 0) || !std::isfinite(k_max) || !std::isfinite(x_max))
            throw InvalidInput("grid cutoffs must be positive and finite");
        if (n_k < 2 || n_x < 2)
            throw InvalidInput("grid sample counts must be >= 2");
        if (!(tol_rank > 0) || !(tol_tail > 0))
            throw InvalidInput("grid tolerances must be positive");
    }

    double k_step() const { return k_max / n_k; }
    double x_step() const { return x_max / (n_x - 1); }

    /// k_i = K_max (i+1)/n_k, i = 0..n_k-1; zero is never sampled.
    double k_at(int i) const { return k_max * (i + 1) / n_k; }
    double x_at(int i) const { return i == n_x - 1 ? x_max : x_step() * i; }

    std::vector<double> k_grid() const
    {
        std::vector<double> k(n_k);
        for (int i = 0; i < n_k; ++i)
            k[i] = k_at(i);
        return k;
    }

    std::vector<double> x_grid() const
    {
        std::vector<double> x(n_x);
        for (int i = 0; i < n_x; ++i)
            x[i] = x_at(i);
        return x;
    }

    /// Same cutoffs, step sizes halved.
    GridSpec refined() const
    {
        GridSpec g = *this;
        g.n_k = 2 * n_k;
        g.n_x = 2 * n_x - 1;
        return g;
    }
};

} // namespace mmscat
