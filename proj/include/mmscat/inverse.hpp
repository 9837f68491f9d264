#pragma once

#include <vector>

#include "mmscat/core.hpp"
#include "mmscat/direct.hpp"
#include "mmscat/fourier.hpp"
#include "mmscat/marchenko.hpp"
#include "mmscat/potential.hpp"

namespace mmscat {

struct RecoveredPotential {
    std::vector<double> x;
    std::vector<ComplexMatrix> V;
    double anti_hermitian_residual = 0;   ///< before symmetrization

    HermitianPotential as_potential() const { return HermitianPotential::sampled(x, V); }
};

/// V(x) = -2 d/dx K(x, x) by fourth-order differences (one-sided at the ends),
/// then Hermitian part.
RecoveredPotential recover_potential(const std::vector<ComplexMatrix>& diagonal, double h);
RecoveredPotential recover_potential(const MarchenkoKernel& kernel);

struct BoundaryEstimate {
    double k = 0;
    ComplexMatrix U;
    double condition = 0;   ///< cond(G + iG')
};

struct BoundaryRecovery {
    ComplexMatrix U;
    std::vector<BoundaryEstimate> estimates;
    double spread = 0;      ///< max_k ||U_est(k) - U||
    double structure_residual = 0;   ///< ||weighted mean - U||
};

/// k samples used when none are given: the data grid points closest to
/// 0.5, 1, 2 and 4 (deduplicated, inside the grid).
std::vector<double> default_k_samples(const ScatteringDataset& data);

/// U from f(+-k, 0), f'(+-k, 0) built from the kernel rows near x = 0 and
/// Psi = f(-k) + f(k) S(k):  U(k) = (G - iG')(G + iG')^{-1}. Estimates are
/// averaged with weights 1/cond(G + iG'). The result is -1 on the
/// (-1)-eigenspace of U0 and the nearest unitary on its complement.
BoundaryRecovery recover_boundary(const MarchenkoKernel& kernel, const ScatteringDataset& data,
                                  std::vector<double> k_samples = {});

struct InverseOptions {
    FourierOptions fourier;
    MarchenkoOptions marchenko;
    std::vector<double> k_samples;   ///< empty: default_k_samples
};

struct RecoveredModel {
    GridSpec grid;
    RecoveredPotential potential;
    BoundaryRecovery boundary;
    // diagnostics
    double marchenko_residual_on = 0;
    double marchenko_residual_off = 0;
    double marchenko_condition = 1;
    double homogeneous_margin = 1;
    bool margin_flag = false;
    double F_hermiticity = 0;
    std::vector<std::string> notes;

    const ComplexMatrix& U() const { return boundary.U; }
};

/// build_F, solve_marchenko, recover_potential and recover_boundary in turn.
RecoveredModel run_inverse(const ScatteringDataset& data, const GridSpec& grid,
                           const InverseOptions& opt = {});

} // namespace mmscat
