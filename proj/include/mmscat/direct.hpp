#pragma once

#include <vector>

#include "mmscat/core.hpp"
#include "mmscat/ode.hpp"
#include "mmscat/potential.hpp"

namespace mmscat {

/// Jost solution f(k, x) and its x-derivative sampled on the x grid.
struct JostSample {
    Complex k;
    std::vector<double> x;
    std::vector<ComplexMatrix> f;
    std::vector<ComplexMatrix> f_prime;
};

/// f(k, 0) and f'(k, 0).
struct JostOrigin {
    ComplexMatrix f;
    ComplexMatrix f_prime;
};

struct BoundState {
    double kappa = 0;        ///< bound state at k = i kappa, eigenvalue -kappa^2
    int multiplicity = 0;
    ComplexMatrix C;         ///< normalization matrix
};

struct ScatteringDataset {
    int n = 1;
    GridSpec grid;
    std::vector<double> k;          ///< positive wavenumbers, increasing
    std::vector<ComplexMatrix> S;   ///< S(k) per k sample
    ComplexMatrix U0;               ///< high-energy limit of S
    std::vector<BoundState> bound_states;
};

struct BoundStateSearch {
    double kappa_max = 0;        ///< 0 selects default_kappa_max
    int scan_samples = 512;
    double refine_tol = 1e-10;
};

struct DirectOptions {
    OdeOptions ode;
    BoundStateSearch search;
};

/// Integrates -f'' + V f = k^2 f backwards from x_max with f = e^{ikx} I there.
/// The reduced amplitude m = f e^{-ikx} is what is actually integrated.
JostSample jost_solution(const HermitianPotential& v, Complex k, const GridSpec& grid,
                         const OdeOptions& ode = {});
JostOrigin jost_at_origin(const HermitianPotential& v, Complex k, double x_max,
                          const OdeOptions& ode = {});

/// J(k) = f(-conj k, 0)^dagger B - f'(-conj k, 0)^dagger A, Im k >= 0.
ComplexMatrix jost_matrix(const HermitianPotential& v, const BoundaryCondition& bc, Complex k,
                          const GridSpec& grid, const OdeOptions& ode = {});
ComplexMatrix jost_matrix_from_origin(const JostOrigin& reflected, const BoundaryCondition& bc);

/// S(k) = -J(-k) J(k)^{-1} for real k != 0. Throws SingularJostMatrix when
/// cond J(k) > 1e12.
ComplexMatrix scattering_matrix(const HermitianPotential& v, const BoundaryCondition& bc,
                                double k, const GridSpec& grid, const OdeOptions& ode = {});

/// U0 = I - 2 P_D where P_D projects onto the (-1)-eigenspace of U.
ComplexMatrix high_energy_limit(const BoundaryCondition& bc);

/// Multiplicity of the eigenvalue -1 of a unitary matrix.
int minus_one_multiplicity(const ComplexMatrix& u, double tol = 1e-8);

/// Upper bound used when the caller gives no kappa_max: twice the larger of
/// the boundary-induced root tan(theta/2) and sqrt(sup ||V||), plus one.
double default_kappa_max(const HermitianPotential& v, const BoundaryCondition& bc,
                         const GridSpec& grid);

/// Bound-state wavenumbers kappa in (kappa_lo, kappa_max] with det J(i kappa) = 0,
/// kappa increasing. Multiplicity is dim ker J(i kappa).
std::vector<BoundState> find_bound_states(const HermitianPotential& v,
                                          const BoundaryCondition& bc, const GridSpec& grid,
                                          const BoundStateSearch& search = {},
                                          const OdeOptions& ode = {});

/// A_kappa = int_0^inf f(i kappa, x)^dagger f(i kappa, x) dx.
ComplexMatrix bound_state_gram(const HermitianPotential& v, double kappa, double x_max,
                               const OdeOptions& ode = {});

/// C = P (P A P + I - P)^{-1/2}, P the projector onto ker J(i kappa)^dagger.
ComplexMatrix norming_matrix(const HermitianPotential& v, const BoundaryCondition& bc,
                             double kappa, const GridSpec& grid, const OdeOptions& ode = {});

ScatteringDataset scattering_dataset(const HermitianPotential& v, const BoundaryCondition& bc,
                                     const GridSpec& grid, const DirectOptions& opt = {});

} // namespace mmscat
