#pragma once

#include <string>
#include <vector>

#include "mmscat/direct.hpp"
#include "mmscat/fourier.hpp"
#include "mmscat/inverse.hpp"

namespace mmscat {

struct ValidationTolerances {
    double unitarity = 1e-6;        ///< ||S^dagger S - I|| and the U0 checks
    double symmetry = 1e-6;         ///< ||S S^dagger - I||
    double decay_slope = -0.5;      ///< log-log slope of ||S - U0|| over the top decade
    double decay_floor = 1e-10;     ///< ||S - U0|| below this counts as decayed
    double tail_fraction = 0.05;    ///< condition (II) last-quarter increment
    double tail_floor = 1e-3;       ///< increments below this pass regardless
    double hermiticity = 1e-8;      ///< ||C - C^dagger||
};

struct ConditionI {
    bool pass = false;
    double unitarity = 0;        ///< max_k ||S^dagger S - I||
    /// max_k ||S(k) S(-k) - I|| with S(-k) = S(k)^dagger
    double symmetry = 0;
    /// ||S0 - S0^dagger|| for S0 extrapolated to k = 0 from the first four
    /// samples; reported only, S may vary on a scale finer than the grid
    double zero_limit_hermiticity = 0;
    double U0_unitarity = 0;
    double U0_hermiticity = 0;
    double decay_slope = 0;      ///< least-squares slope of log ||S - U0|| vs log k
    double decay_constant = 0;   ///< mean of k ||S(k) - U0|| over the top decade
    double tail = 0;             ///< ||S(K_max) - U0||
};

struct ConditionII {
    bool pass = false;
    double integral = 0;         ///< int (1 + t) ||F'(t)|| dt over the table
    double tail_increment = 0;   ///< contribution of the last quarter
};

struct BoundStateDiagnostic {
    double kappa = 0;
    double min_eigenvalue = 0;
    double hermiticity = 0;
    int rank = 0;
    bool pass = false;
    std::string message;
};

struct ConditionIII {
    bool pass = false;
    std::vector<BoundStateDiagnostic> bound_states;
};

struct ConditionReport {
    ConditionI I;
    ConditionII II;
    ConditionIII III;
    std::vector<std::string> notes;

    bool pass() const { return I.pass && II.pass && III.pass; }
    /// Names of the failed conditions, e.g. {"I", "III"}.
    std::vector<std::string> failed() const;
};

/// Unitarity, consistency of the extension S(-k) = S(k)^dagger, U0 unitary Hermitian
/// and ||S(k) - U0|| = O(1/k) over the top decade of the grid. Never throws.
ConditionI check_condition_I(const ScatteringDataset& data, const ValidationTolerances& tol = {});

/// int (1 + t) ||F'(t)|| dt by central differences and the trapezoid rule;
/// passes when the last quarter of the table adds at most tail_fraction of it
/// (or less than tail_floor in absolute terms).
ConditionII check_condition_II(const FKernel& F, const ValidationTolerances& tol = {});

/// kappa_j > 0 strictly increasing, C_j Hermitian, C_j >= -tol_rank, rank C_j >= 1.
ConditionIII check_condition_III(const ScatteringDataset& data,
                                 const ValidationTolerances& tol = {});

/// All three; F is built from the data on its own grid. A failure to build F
/// fails condition (II) with a note.
ConditionReport check_conditions(const ScatteringDataset& data,
                                 const ValidationTolerances& tol = {});

struct WronskianReport {
    double same = 0;       ///< max ||f(k)^dag f'(k) - f'(k)^dag f(k) - 2ik I||
    double reflected = 0;  ///< max ||f(-k)^dag f'(k) - f'(-k)^dag f(k)||

    double max() const { return std::max(same, reflected); }
};

/// Both Jost Wronskians over every x of the grid and every k in the list.
WronskianReport wronskian_report(const HermitianPotential& v, const GridSpec& grid,
                                 const std::vector<double>& k_list, const OdeOptions& ode = {});

struct RoundTripMetrics {
    double potential_error = 0;   ///< weighted L1, relative unless V = 0
    bool potential_relative = true;
    double potential_sup = 0;     ///< max over the grid of ||V - V_rec||
    double boundary_error = 0;    ///< ||U - U_rec||
    double scattering_error = 0;  ///< max_k ||S(k) - S_rec(k)||
    int bound_states = 0;
    int bound_states_recovered = 0;
    double kappa_error = 0;       ///< max |kappa_j - kappa_rec_j| when the counts agree
};

/// Compares the recovered model with (V, U); S_rec comes from the direct
/// solver applied to the recovered sampled potential and U_rec.
RoundTripMetrics roundtrip_report(const HermitianPotential& v, const ComplexMatrix& U,
                                  const ScatteringDataset& original,
                                  const RecoveredModel& recovered,
                                  const DirectOptions& opt = {});
/// Same, computing the original dataset on the recovered model's grid.
RoundTripMetrics roundtrip_report(const HermitianPotential& v, const ComplexMatrix& U,
                                  const RecoveredModel& recovered,
                                  const DirectOptions& opt = {});

} // namespace mmscat
