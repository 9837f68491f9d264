#include "mmscat/fourier.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "mmscat/parallel.hpp"

namespace mmscat {

namespace {

constexpr double euler_gamma = 0.57721566490153286061;

// E1(ix) for x >= 2 by modified Lentz on the continued fraction.
Complex e1_imaginary(double x)
{
    const Complex z(0.0, x);
    constexpr double tiny = 1e-300;
    Complex b = z + 1.0;
    Complex c = 1.0 / tiny;
    Complex d = 1.0 / b;
    Complex h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -double(i) * double(i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const Complex del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            break;
    }
    return h * std::exp(-z);
}

// phi(z) = (e^z - 1)/z and psi(z) = (e^z (z - 1) + 1)/z^2
Complex filon_phi(Complex z)
{
    if (std::abs(z) < 0.5) {
        Complex term = 1.0, sum = 0.0;
        for (int n = 0; n < 25; ++n) {
            sum += term / double(n + 1);
            term *= z / double(n + 1);
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

Complex filon_psi(Complex z)
{
    if (std::abs(z) < 0.5) {
        Complex term = 1.0, sum = 0.0;
        for (int n = 0; n < 25; ++n) {
            sum += term / double(n + 2);
            term *= z / double(n + 1);
        }
        return sum;
    }
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// sin(u)/u and (sin u - u cos u)/u^2
double sinc0(double u)
{
    if (std::abs(u) < 1e-4)
        return 1.0 - u * u / 6.0;
    return std::sin(u) / u;
}

double sinc1(double u)
{
    if (std::abs(u) < 0.5) {
        double sum = 0, term = u;   // (-1)^{n+1} 2n u^{2n-1} / (2n+1)!
        double fact = 6.0;
        for (int n = 1; n < 12; ++n) {
            sum += 2.0 * n * term / fact;
            term *= -u * u;
            fact *= double(2 * n + 2) * double(2 * n + 3);
        }
        return sum;
    }
    return (std::sin(u) - u * std::cos(u)) / (u * u);
}

// mu_m(z) = int_0^1 u^m e^{zu} du, m = 0..3
std::array<Complex, 4> moments(Complex z)
{
    std::array<Complex, 4> mu{};
    if (std::abs(z) < 1.0) {
        for (int m = 0; m < 4; ++m) {
            Complex term = 1.0, sum = 0.0;
            for (int k = 0; k < 30; ++k) {
                sum += term / double(k + m + 1);
                term *= z / double(k + 1);
            }
            mu[m] = sum;
        }
        return mu;
    }
    const Complex ez = std::exp(z);
    mu[0] = (ez - 1.0) / z;
    for (int m = 1; m < 4; ++m)
        mu[m] = (ez - double(m) * mu[m - 1]) / z;
    return mu;
}

// Monomial coefficients of the cubic through (u_o, D_o): P(u) = sum_m c_m u^m.
std::array<ComplexMatrix, 4> cubic_coefficients(const std::array<double, 4>& u,
                                                const std::array<const ComplexMatrix*, 4>& d)
{
    Eigen::Matrix4d vander;
    for (int o = 0; o < 4; ++o)
        for (int m = 0; m < 4; ++m)
            vander(o, m) = std::pow(u[o], m);
    const Eigen::Matrix4d inv = vander.inverse();
    std::array<ComplexMatrix, 4> c;
    for (int m = 0; m < 4; ++m) {
        c[m] = ComplexMatrix::Zero(d[0]->rows(), d[0]->cols());
        for (int o = 0; o < 4; ++o)
            c[m] += inv(m, o) * *d[o];
    }
    return c;
}

struct FourierIntegrand {
    int n = 1;
    double h = 0;           // panel width
    double k_first = 0;
    double k_last = 0;
    ComplexMatrix central_herm, central_anti;   // D(k_first) split
    std::vector<ComplexMatrix> p, q;            // panel value and slope
    bool cubic = true;
    std::array<std::vector<ComplexMatrix>, 4> panel_c;   // cubic panels, per power of u
    std::array<ComplexMatrix, 4> central_c;              // cubic on [-k1, k1], u in [0, 2]
    ComplexMatrix s1, s2, s3, s4;               // tail coefficients

    FourierIntegrand(const ScatteringDataset& data, const FourierOptions& opt)
    {
        const std::size_t nk = data.k.size();
        if (nk < 2 || data.S.size() != nk)
            throw InvalidInput("scattering data needs at least two k samples");
        n = data.n;
        h = data.k[1] - data.k[0];
        k_first = data.k.front();
        k_last = data.k.back();
        for (std::size_t i = 1; i < nk; ++i)
            if (std::abs(data.k[i] - data.k[i - 1] - h) > 1e-9 * h)
                throw InvalidInput("k grid must be uniform");
        if (std::abs(k_first - h) > 1e-9 * h)
            throw InvalidInput("k grid must start at one step from zero");

        std::vector<ComplexMatrix> d(nk);
        for (std::size_t i = 0; i < nk; ++i)
            d[i] = data.S[i] - data.U0;

        cubic = opt.cubic_panels && nk >= 4;
        if (cubic) {
            // nodes -2h, -h, h, 2h with D(-k) = D(k)^dagger; k = -h + u h
            const ComplexMatrix m1 = d[0].adjoint(), m2 = d[1].adjoint();
            central_c = cubic_coefficients({-1.0, 0.0, 2.0, 3.0}, {&m2, &m1, &d[0], &d[1]});
            for (auto& v : panel_c)
                v.resize(nk - 1);
            for (std::size_t j = 0; j + 1 < nk; ++j) {
                const std::size_t s0 = std::min(j > 0 ? j - 1 : 0, nk - 4);
                std::array<double, 4> u;
                std::array<const ComplexMatrix*, 4> dv;
                for (int o = 0; o < 4; ++o) {
                    u[o] = double(s0 + o) - double(j);
                    dv[o] = &d[s0 + o];
                }
                const auto c = cubic_coefficients(u, dv);
                for (int m = 0; m < 4; ++m)
                    panel_c[m][j] = c[m];
            }
        }
        central_herm = hermitian_part(d[0]);
        central_anti = anti_hermitian_part(d[0]);
        p.resize(nk - 1);
        q.resize(nk - 1);
        for (std::size_t j = 0; j + 1 < nk; ++j) {
            p[j] = d[j];
            q[j] = (d[j + 1] - d[j]) / h;
        }

        const double tail_size = matrix_norm(d.back());
        if (tail_size > opt.tail_limit)
            throw TailTooLarge("||S(K_max) - U0|| = " + std::to_string(tail_size) +
                               " at K_max = " + std::to_string(k_last));
        // S(-k) = S(k)^dagger makes the odd coefficients of the 1/k
        // expansion anti-Hermitian and the even ones Hermitian
        for (auto* c : {&s1, &s2, &s3, &s4})
            *c = ComplexMatrix::Zero(n, n);
        const double K = k_last;
        const ComplexMatrix a_hi = K * anti_hermitian_part(d.back());
        const ComplexMatrix b_hi = K * K * hermitian_part(d.back());
        if (opt.tail_order >= 1)
            s1 = a_hi;
        if (opt.tail_order >= 2)
            s2 = b_hi;
        if (opt.tail_order >= 3) {
            // two-point fit of c0 + c2/k^2 between K and about K/2
            const std::size_t ih = nk / 2 - 1;
            const double kh = data.k[ih];
            const ComplexMatrix a_lo = kh * anti_hermitian_part(d[ih]);
            const ComplexMatrix b_lo = kh * kh * hermitian_part(d[ih]);
            const double w = K * K / (K * K - kh * kh);
            const double v = K * K * kh * kh / (kh * kh - K * K);
            s1 = w * a_hi + (1.0 - w) * a_lo;
            s3 = v * (a_hi - a_lo);
            if (opt.tail_order >= 4) {
                s2 = w * b_hi + (1.0 - w) * b_lo;
                s4 = v * (b_hi - b_lo);
            }
        }
    }

    ComplexMatrix operator()(double t) const
    {
        const double pi = std::numbers::pi;
        ComplexMatrix out;
        if (cubic) {
            // [-k1, k1]: half of the full-line integral, already Hermitian
            const auto mc = moments(Complex(0.0, 2 * h * t));
            ComplexMatrix c = ComplexMatrix::Zero(n, n);
            for (int m = 0; m < 4; ++m)
                c += std::pow(2.0, m + 1) * mc[m] * central_c[m];
            out = hermitian_part(ComplexMatrix(0.5 * h * std::polar(1.0, -h * t) * c));

            std::array<ComplexMatrix, 4> acc;
            for (auto& a : acc)
                a = ComplexMatrix::Zero(n, n);
            for (std::size_t j = 0; j < panel_c[0].size(); ++j) {
                const Complex z = std::polar(1.0, (k_first + double(j) * h) * t);
                for (int m = 0; m < 4; ++m)
                    acc[m] += z * panel_c[m][j];
            }
            const auto mu = moments(Complex(0.0, h * t));
            ComplexMatrix panels = ComplexMatrix::Zero(n, n);
            for (int m = 0; m < 4; ++m)
                panels += h * mu[m] * acc[m];
            out += hermitian_part(panels);
        } else {
            // symmetric panel [-k1, k1]
            const double a = k_first;
            out = a * sinc0(a * t) * central_herm + I_unit * (a * sinc1(a * t)) * central_anti;

            // linear panels on [k1, K]
            ComplexMatrix sp = ComplexMatrix::Zero(n, n), sq = ComplexMatrix::Zero(n, n);
            for (std::size_t j = 0; j < p.size(); ++j) {
                const Complex z = std::polar(1.0, (k_first + double(j) * h) * t);
                sp += z * p[j];
                sq += z * q[j];
            }
            const Complex zt(0.0, h * t);
            const ComplexMatrix panels = h * filon_phi(zt) * sp + h * h * filon_psi(zt) * sq;
            out += hermitian_part(panels);
        }

        // int_K^inf sum_j S_j k^{-j} e^{ikt} dk, Hermitian part; with
        // E_j = int_K^inf k^{-j} e^{ikt} dk only Im E_1, Re E_2, Im E_3 and
        // Re E_4 survive
        const double K = k_last;
        const double c = std::cos(K * t), s = std::sin(K * t);
        const double im1 = pi / 2 - sine_integral(K * t);
        const double re2 = c / K - t * im1;
        const double im3 = s / (2 * K * K) + t * re2 / 2;
        const double re4 = c / (3 * K * K * K) - t * im3 / 3;
        out += I_unit * im1 * s1 + re2 * s2 + I_unit * im3 * s3 + re4 * s4;
        return out / pi;
    }
};

} // namespace

double sine_integral(double x)
{
    if (x < 0)
        return -sine_integral(-x);
    if (x < 4.0) {
        double term = x, sum = 0;
        for (int k = 0; k < 40; ++k) {
            const double add = term / double(2 * k + 1);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum))
                break;
            term *= -x * x / (double(2 * k + 2) * double(2 * k + 3));
        }
        return sum;
    }
    return std::numbers::pi / 2 + e1_imaginary(x).imag();
}

double cosine_integral(double x)
{
    if (!(x > 0))
        throw InvalidInput("Ci needs x > 0");
    if (x < 4.0) {
        double term = -x * x / 2, sum = 0;
        for (int k = 1; k < 40; ++k) {
            const double add = term / double(2 * k);
            sum += add;
            if (std::abs(add) < 1e-18)
                break;
            term *= -x * x / (double(2 * k + 1) * double(2 * k + 2));
        }
        return euler_gamma + std::log(x) + sum;
    }
    return -e1_imaginary(x).real();
}

std::vector<double> FKernel::t_grid() const
{
    std::vector<double> t(size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = t_at(i);
    return t;
}

ComplexMatrix FKernel::evaluate(double t) const
{
    const int n = dim();
    if (t < 0)
        throw InvalidInput("F evaluated at negative t");
    const double s = t / dt;
    const auto i = static_cast<std::size_t>(s);
    if (i + 1 >= size())
        return i + 1 == size() && s == double(i) ? values.back() : ComplexMatrix::Zero(n, n);
    const double w = s - double(i);
    return (1 - w) * values[i] + w * values[i + 1];
}

double FKernel::hermiticity_residual() const
{
    double r = 0;
    for (const auto& f : values)
        r = std::max(r, mmscat::hermiticity_residual(f));
    return r;
}

FKernel FKernel::tabulate(int n, double dt, std::size_t count,
                          const std::function<ComplexMatrix(double)>& fn)
{
    if (!(dt > 0) || count < 2)
        throw InvalidInput("F table needs dt > 0 and at least two samples");
    FKernel f;
    f.dt = dt;
    f.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        f.values[i] = fn(dt * double(i));
        if (f.values[i].rows() != n || f.values[i].cols() != n)
            throw DimensionMismatch("tabulated F has the wrong dimension");
    }
    return f;
}

ComplexMatrix fourier_part_at(const ScatteringDataset& data, double t, const FourierOptions& opt)
{
    return FourierIntegrand(data, opt)(t);
}

FKernel build_F(const ScatteringDataset& data, const GridSpec& grid, const FourierOptions& opt)
{
    grid.validate();
    const int n = data.n;
    const FourierIntegrand integrand(data, opt);

    FKernel f;
    f.dt = grid.x_step() / 2;
    const std::size_t count = 4 * std::size_t(grid.n_x - 1) + 1;
    for (const auto& b : data.bound_states) {
        if (b.C.rows() != n)
            throw DimensionMismatch("normalization matrix dimension differs from S");
        if (matrix_norm(b.C) == 0.0) {
            f.notes.push_back("dropped bound state with C = 0 at kappa = " +
                              std::to_string(b.kappa));
            continue;
        }
        f.bound_part.emplace_back(b.kappa, ComplexMatrix(b.C * b.C));
    }

    f.values.resize(count);
    f.fourier_part.resize(count);
    parallel_for(count, [&](std::size_t i) {
        const double t = f.dt * double(i);
        f.fourier_part[i] = integrand(t);
        ComplexMatrix v = f.fourier_part[i];
        for (const auto& [kappa, c2] : f.bound_part)
            v += std::exp(-kappa * t) * c2;
        f.values[i] = hermitian_part(v);
    });
    return f;
}

} // namespace mmscat
