#pragma once

#include <vector>

#include "mmscat/core.hpp"
#include "mmscat/fourier.hpp"

namespace mmscat {

enum class Quadrature { trapezoid, gregory };

/// Weights of the composite rule on m equispaced nodes of step h. Gregory is
/// the trapezoid rule with fourth-order end corrections
/// (3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8); it falls back to the
/// trapezoid rule below six nodes.
std::vector<double> window_weights(int m, double h, Quadrature rule);

struct MarchenkoOptions {
    Quadrature rule = Quadrature::gregory;
    double cond_limit = 1e10;      ///< NearSingularSystem above this
    int residual_rows = 12;        ///< rows (besides the first five) re-substituted
    double margin_threshold = 1e-6;
};

/// One row K(x, t), t = x, x + h, ..., x_max, of the Marchenko kernel.
struct MarchenkoRow {
    double x = 0;
    std::vector<double> t;
    std::vector<ComplexMatrix> K;
    double residual_on = 0;    ///< re-substitution residual at the nodes
    double residual_off = 0;   ///< same at the midpoints between nodes
    double condition = 1;

    double residual() const { return std::max(residual_on, residual_off); }
};

/// Dense Nystrom solve of
///   K(x, y) + F(x + y) + int_x^{x_max} K(x, t) F(t + y) dt = 0,  y in [x, x_max]
/// on the grid nodes. x must be a grid node and F tabulated at step h/2 up to
/// 2 x_max. Throws NearSingularSystem when the estimated condition number
/// exceeds the limit.
MarchenkoRow marchenko_solve(const FKernel& F, double x, const GridSpec& grid,
                             const MarchenkoOptions& opt = {});

/// Smallest |eigenvalue| of the symmetrized Nystrom matrix
/// I + W^{1/2} F W^{1/2} at x (equal to the smallest |eigenvalue| of I + F W).
double homogeneous_margin(const FKernel& F, double x, const GridSpec& grid,
                          const MarchenkoOptions& opt = {});

struct MarchenkoKernel {
    GridSpec grid;
    Quadrature rule = Quadrature::gregory;
    std::vector<double> x;
    std::vector<ComplexMatrix> diagonal;                  ///< K(x_i, x_i)
    /// K(x_p, t_a) for p = 0..4 and every node t_a; for t_a < x_p this is the
    /// smooth continuation given by the equation itself.
    std::vector<std::vector<ComplexMatrix>> leading_rows;
    std::vector<int> checked_rows;
    double residual_on = 0;
    double residual_off = 0;
    double condition = 1;
    double margin = 1;              ///< homogeneous margin at x = 0
    bool margin_flag = false;       ///< margin below the threshold

    double step() const { return grid.x_step(); }
    double residual() const { return std::max(residual_on, residual_off); }
};

/// All rows x_i of the grid. One Cholesky factorization of the full-window
/// matrix serves every row: rows differ from its trailing blocks only in the
/// weights of their first few nodes.
MarchenkoKernel solve_marchenko(const FKernel& F, const GridSpec& grid,
                                const MarchenkoOptions& opt = {});

} // namespace mmscat
