#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmscat/core.hpp"
#include "mmscat/direct.hpp"

namespace mmscat {

/// Si(x) = int_0^x sin(t)/t dt and Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt.
double sine_integral(double x);
double cosine_integral(double x);

/// F(t) tabulated at t_i = i * dt, i = 0 .. size()-1.
struct FKernel {
    double dt = 0;
    std::vector<ComplexMatrix> values;
    std::vector<ComplexMatrix> fourier_part;
    std::vector<std::pair<double, ComplexMatrix>> bound_part;   ///< (kappa_j, C_j^2)
    std::vector<std::string> notes;

    int dim() const { return values.empty() ? 0 : int(values.front().rows()); }
    std::size_t size() const { return values.size(); }
    double t_at(std::size_t i) const { return dt * double(i); }
    double t_max() const { return t_at(size() - 1); }
    std::vector<double> t_grid() const;
    const ComplexMatrix& operator[](std::size_t i) const { return values[i]; }
    /// Piecewise-linear interpolation; zero beyond the table.
    ComplexMatrix evaluate(double t) const;
    double hermiticity_residual() const;

    static FKernel tabulate(int n, double dt, std::size_t count,
                            const std::function<ComplexMatrix(double)>& fn);
};

struct FourierOptions {
    /// Number of terms (0 to 4) of the 1/k expansion of S(k) - U0 used for
    /// the analytic tail beyond K_max. Orders 3 and 4 fit the coefficients
    /// from samples at K_max and K_max/2.
    int tail_order = 4;
    /// Filon panels exact for a local cubic in k (false: linear in k).
    bool cubic_panels = true;
    /// TailTooLarge when ||S(K_max) - U0|| exceeds this.
    double tail_limit = 0.5;
};

/// (1/pi) Herm int_0^inf (S(k) - U0) e^{ikt} dk for one t: Filon quadrature
/// on the data grid, a panel across k = 0 using S(-k) = S(k)^dagger, and the
/// analytic tail.
ComplexMatrix fourier_part_at(const ScatteringDataset& data, double t,
                              const FourierOptions& opt = {});

/// F(t) = sum_j C_j^2 e^{-kappa_j t} + F_S(t) on [0, 2 x_max] with step h_x / 2.
FKernel build_F(const ScatteringDataset& data, const GridSpec& grid,
                const FourierOptions& opt = {});

} // namespace mmscat
