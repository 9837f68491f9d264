#include "mmscat/potential.hpp"

#include <algorithm>
#include <cmath>

namespace mmscat {

namespace {

void check_dimension(int n)
{
    if (n < 1 || n > max_dimension)
        throw InvalidInput("potential dimension must satisfy 1 <= n <= 8");
}

// Fritsch-Carlson slopes for one real series.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t m = x.size();
    std::vector<double> d(m, 0.0);
    if (m < 2)
        return d;
    std::vector<double> delta(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i)
        delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    if (m == 2) {
        d[0] = d[1] = delta[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (delta[i - 1] * delta[i] <= 0) {
            d[i] = 0;
        } else {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            const double w0 = 2 * h1 + h0, w1 = h1 + 2 * h0;
            d[i] = (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i]);
        }
    }
    // three-point end slopes, limited to keep monotonicity
    auto end_slope = [](double h0, double h1, double del0, double del1) {
        double s = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (s * del0 <= 0)
            s = 0;
        else if (del0 * del1 <= 0 && std::abs(s) > std::abs(3 * del0))
            s = 3 * del0;
        return s;
    };
    d[0] = end_slope(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
    d[m - 1] = end_slope(x[m - 1] - x[m - 2], x[m - 2] - x[m - 3], delta[m - 2], delta[m - 3]);
    return d;
}

struct SampledTable {
    std::vector<double> x;
    int n = 1;
    // per entry (row-major, re/im interleaved): values and slopes
    std::vector<std::vector<double>> value, slope;
    ComplexMatrix last;
    double tail_rate = 1.0;

    void eval(double t, Eigen::Ref<ComplexMatrix> out) const
    {
        const std::size_t m = x.size();
        if (t >= x[m - 1]) {
            out = last * std::exp(-tail_rate * (t - x[m - 1]));
            return;
        }
        if (t <= x[0])
            t = x[0];
        const auto it = std::upper_bound(x.begin(), x.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
        const double h = x[i + 1] - x[i];
        const double s = (t - x[i]) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const std::size_t e = 2 * static_cast<std::size_t>(r * n + c);
                double part[2];
                for (int q = 0; q < 2; ++q) {
                    const auto& y = value[e + q];
                    const auto& d = slope[e + q];
                    part[q] = h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
                }
                out(r, c) = Complex(part[0], part[1]);
            }
    }
};

} // namespace

HermitianPotential HermitianPotential::zero(int n)
{
    check_dimension(n);
    HermitianPotential p;
    p.n_ = n;
    p.kind_ = Kind::zero;
    p.name_ = "zero";
    p.eval_ = [](double, Eigen::Ref<ComplexMatrix> out) { out.setZero(); };
    return p;
}

HermitianPotential HermitianPotential::sech2(int n, double kappa)
{
    check_dimension(n);
    if (!(kappa > 0) || !std::isfinite(kappa))
        throw InvalidInput("sech2 potential needs kappa > 0");
    HermitianPotential p;
    p.n_ = n;
    p.kind_ = Kind::sech2;
    p.name_ = "sech2";
    p.kappa_ = kappa;
    p.eval_ = [kappa](double x, Eigen::Ref<ComplexMatrix> out) {
        const double c = std::cosh(kappa * x);
        out.setIdentity();
        out *= -2.0 * kappa * kappa / (c * c);
    };
    return p;
}

HermitianPotential HermitianPotential::exp_decay(const ComplexMatrix& h, double rate)
{
    if (h.rows() != h.cols())
        throw InvalidInput("exp_decay coefficient must be square");
    check_dimension(static_cast<int>(h.rows()));
    if (!(rate > 0) || !std::isfinite(rate))
        throw InvalidInput("exp_decay potential needs rate > 0");
    if (!h.allFinite() || hermiticity_residual(h) > 1e-12 * std::max(1.0, matrix_norm(h)))
        throw InvalidInput("exp_decay coefficient must be Hermitian");
    HermitianPotential p;
    p.n_ = static_cast<int>(h.rows());
    p.kind_ = Kind::exp_decay;
    p.name_ = "exp_decay";
    p.rate_ = rate;
    p.coeff_ = hermitian_part(h);
    p.eval_ = [coeff = p.coeff_, rate](double x, Eigen::Ref<ComplexMatrix> out) {
        out = coeff * std::exp(-rate * x);
    };
    return p;
}

HermitianPotential HermitianPotential::sampled(std::vector<double> x, std::vector<ComplexMatrix> v)
{
    if (x.size() < 3 || x.size() != v.size())
        throw InvalidInput("sampled potential needs >= 3 samples with matching x and v");
    const int n = static_cast<int>(v.front().rows());
    check_dimension(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || (i > 0 && !(x[i] > x[i - 1])))
            throw InvalidInput("sample positions must be finite and strictly increasing");
        if (v[i].rows() != n || v[i].cols() != n || !v[i].allFinite())
            throw InvalidInput("sample matrices must be finite and n x n");
        if (hermiticity_residual(v[i]) > 1e-12 * std::max(1.0, matrix_norm(v[i])))
            throw InvalidInput("sample " + std::to_string(i) + " is not Hermitian");
    }
    if (x.front() < 0)
        throw InvalidInput("sample positions must be >= 0");

    auto table = std::make_shared<SampledTable>();
    table->x = x;
    table->n = n;
    const std::size_t m = x.size();
    table->value.assign(2 * n * n, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const ComplexMatrix vh = hermitian_part(v[i]);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const std::size_t e = 2 * static_cast<std::size_t>(r * n + c);
                table->value[e][i] = vh(r, c).real();
                table->value[e + 1][i] = vh(r, c).imag();
            }
    }
    for (const auto& series : table->value)
        table->slope.push_back(monotone_slopes(x, series));
    table->last = hermitian_part(v.back());

    // exponential tail: fitted from the last two samples, or a fast cutoff
    const double dx = x[m - 1] - x[m - 2];
    const double a = matrix_norm(v[m - 2]), b = matrix_norm(v[m - 1]);
    double rate = 1.0 / dx;
    if (a > 0 && b > 0 && a > b)
        rate = std::log(a / b) / dx;
    table->tail_rate = rate;

    HermitianPotential p;
    p.n_ = n;
    p.kind_ = Kind::sampled;
    p.name_ = "sampled";
    p.tail_rate_ = rate;
    p.xs_ = std::move(x);
    p.vs_ = std::move(v);
    for (auto& vi : p.vs_)
        vi = hermitian_part(vi);
    p.eval_ = [table](double t, Eigen::Ref<ComplexMatrix> out) { table->eval(t, out); };
    return p;
}

HermitianPotential HermitianPotential::custom(int n, Evaluator f, std::string name,
                                              bool check_hermitian)
{
    check_dimension(n);
    HermitianPotential p;
    p.n_ = n;
    p.kind_ = Kind::custom;
    p.name_ = std::move(name);
    p.eval_ = std::move(f);
    if (check_hermitian) {
        ComplexMatrix v(n, n);
        for (int i = 0; i <= 100; ++i) {
            p.eval_(0.1 * i, v);
            if (hermiticity_residual(v) > 1e-12 * std::max(1.0, matrix_norm(v)))
                throw InvalidInput("custom potential is not Hermitian at x = " +
                                   std::to_string(0.1 * i));
        }
    }
    return p;
}

std::string HermitianPotential::kind_name() const { return name_; }

double HermitianPotential::weighted_norm(double x_max, int panels) const
{
    panels += panels % 2;
    const double h = x_max / panels;
    ComplexMatrix v(n_, n_);
    double sum = 0;
    for (int i = 0; i <= panels; ++i) {
        const double x = i * h;
        eval_(x, v);
        const double w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
        sum += w * (1 + x) * matrix_norm(v);
    }
    return sum * h / 3;
}

double HermitianPotential::sup_norm(double x_max, int samples) const
{
    ComplexMatrix v(n_, n_);
    double best = 0;
    for (int i = 0; i < samples; ++i) {
        eval_(x_max * i / (samples - 1), v);
        best = std::max(best, matrix_norm(v));
    }
    return best;
}

} // namespace mmscat
