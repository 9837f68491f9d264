#pragma once

#include <cmath>
#include <span>
#include <string>

#include "mmscat/core.hpp"

namespace mmscat {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0;  ///< 0 = unbounded
    long max_steps = 5'000'000;
};

/// Dormand-Prince 5(4) integration of y' = rhs(x, y) from x0 to x1 (either
/// direction). Every point of `stops` (ordered along the direction of
/// integration, inside [x0, x1]) is hit exactly and reported through
/// `observe(index, y)`. Throws StepFailure if the step size underflows.
template <typename Rhs, typename Observer>
void integrate_dopri5(Rhs&& rhs, ComplexVector& y, double x0, double x1,
                      std::span<const double> stops, Observer&& observe,
                      const OdeOptions& opt = {})
{
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = x1 - x0;
    const double dir = span >= 0 ? 1.0 : -1.0;
    const Eigen::Index m = y.size();
    ComplexVector k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), tmp(m), ynew(m);

    std::size_t next_stop = 0;
    auto emit_at = [&](double x) {
        while (next_stop < stops.size() && std::abs(stops[next_stop] - x) <= 1e-13 * (1 + std::abs(x))) {
            observe(next_stop, y);
            ++next_stop;
        }
    };

    double x = x0;
    emit_at(x);
    if (span == 0)
        return;

    double h = dir * std::min(std::abs(span), 1e-2);
    if (opt.max_step > 0)
        h = dir * std::min(std::abs(h), opt.max_step);
    rhs(x, y, k1);

    long steps = 0;
    while (dir * (x1 - x) > 0) {
        if (++steps > opt.max_steps)
            throw StepFailure("step budget exhausted at x = " + std::to_string(x));

        double target = x1;
        if (next_stop < stops.size())
            target = stops[next_stop];
        double hs = h;
        bool clamp = false;
        if (dir * (x + hs - target) >= 0) {
            hs = target - x;
            clamp = true;
        }
        if (std::abs(hs) < 1e-14 * std::max(1.0, std::abs(x)) && !clamp)
            throw StepFailure("step size underflow at x = " + std::to_string(x));

        tmp = y + hs * a21 * k1;
        rhs(x + c2 * hs, tmp, k2);
        tmp = y + hs * (a31 * k1 + a32 * k2);
        rhs(x + c3 * hs, tmp, k3);
        tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(x + c4 * hs, tmp, k4);
        tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(x + c5 * hs, tmp, k5);
        tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(x + hs, tmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(x + hs, ynew, k7);
        tmp = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double r = std::abs(tmp(i)) / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(m));
        if (!std::isfinite(err))
            throw StepFailure("non-finite state at x = " + std::to_string(x));

        if (err <= 1.0) {
            x = clamp ? target : x + hs;
            y = ynew;
            k1 = k7;
            emit_at(x);
            const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (!clamp || std::abs(hs) >= std::abs(h))
                h = hs * fac;
        } else {
            h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
        }
        if (opt.max_step > 0 && std::abs(h) > opt.max_step)
            h = dir * opt.max_step;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x)) && dir * (x1 - x) > 1e-13)
            throw StepFailure("step size underflow at x = " + std::to_string(x));
    }
}

} // namespace mmscat
