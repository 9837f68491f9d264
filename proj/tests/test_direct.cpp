#include "doctest.h"

#include <cstdlib>

#include "mmscat/direct.hpp"
#include "test_support.hpp"

using namespace mmscat;
using namespace mmscat::testing;

namespace {

// For V = H e^{-x} the reduced amplitude is an exact series
// m(x) = sum_j C_j e^{-jx}, C_0 = I, C_j = H C_{j-1} / (j (j - 2ik)).
struct ExpSeries {
    Complex k;
    std::vector<ComplexMatrix> c;

    ExpSeries(const ComplexMatrix& h, Complex kk) : k(kk)
    {
        c.push_back(ComplexMatrix::Identity(h.rows(), h.cols()));
        for (int j = 1; j < 200; ++j) {
            c.push_back(h * c.back() / (double(j) * (double(j) - 2.0 * I_unit * k)));
            if (matrix_norm(c.back()) < 1e-20)
                break;
        }
    }

    ComplexMatrix f(double x) const
    {
        ComplexMatrix m = ComplexMatrix::Zero(c[0].rows(), c[0].cols());
        for (std::size_t j = 0; j < c.size(); ++j)
            m += std::exp(-double(j) * x) * c[j];
        return std::exp(I_unit * k * x) * m;
    }

    ComplexMatrix f_prime(double x) const
    {
        ComplexMatrix m = ComplexMatrix::Zero(c[0].rows(), c[0].cols());
        for (std::size_t j = 0; j < c.size(); ++j)
            m += (I_unit * k - double(j)) * std::exp(-double(j) * x) * c[j];
        return std::exp(I_unit * k * x) * m;
    }

    // int_0^inf f^dagger f for k = i kappa
    ComplexMatrix gram() const
    {
        const double kappa = k.imag();
        ComplexMatrix g = ComplexMatrix::Zero(c[0].rows(), c[0].cols());
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b)
                g += c[a].adjoint() * c[b] / (2 * kappa + double(a + b));
        return g;
    }
};

GridSpec small_grid()
{
    GridSpec g;
    g.k_max = 10;
    g.n_k = 40;
    g.x_max = 20;
    g.n_x = 41;
    return g;
}

Complex robin_s(double alpha, double k)
{
    const Complex u = phase(alpha);
    const Complex a = (u + 1.0) / 2.0, b = I_unit * (u - 1.0) / 2.0;
    return -(b + I_unit * k * a) / (b - I_unit * k * a);
}

} // namespace

TEST_CASE("jost_solution matches the exponential-potential series")
{
    const auto v = HermitianPotential::exp_decay(reference_coefficient(), 1.0);
    const auto grid = small_grid();
    for (Complex k : {Complex(2.0, 0.0), Complex(-0.7, 0.0), Complex(0.3, 0.8)}) {
        const ExpSeries oracle(reference_coefficient(), k);
        const auto sample = jost_solution(v, k, grid);
        REQUIRE(sample.x.size() == std::size_t(grid.n_x));
        double err = 0;
        for (std::size_t i = 0; i < sample.x.size(); ++i) {
            const double x = sample.x[i];
            const double scale = std::exp(-k.imag() * x);
            err = std::max(err, matrix_norm(sample.f[i] - oracle.f(x)) / scale);
            err = std::max(err, matrix_norm(sample.f_prime[i] - oracle.f_prime(x)) / scale);
        }
        CHECK(err < 1e-7);
    }
}

TEST_CASE("jost_solution matches the reflectionless sech^2 closed form")
{
    const auto v = HermitianPotential::sech2(1, 1.0);
    const double k = 1.5;
    const auto sample = jost_solution(v, k, small_grid());
    for (std::size_t i = 0; i < sample.x.size(); ++i) {
        const double x = sample.x[i];
        const Complex e = std::exp(I_unit * k * x);
        const Complex f = e * (k + I_unit * std::tanh(x)) / (k + I_unit);
        const Complex fp =
            e * (I_unit * k * (k + I_unit * std::tanh(x)) + I_unit / std::pow(std::cosh(x), 2)) /
            (k + I_unit);
        CHECK(std::abs(sample.f[i](0, 0) - f) < 1e-8);
        CHECK(std::abs(sample.f_prime[i](0, 0) - fp) < 1e-8);
    }
}

TEST_CASE("Wronskians of Jost solutions are constant in x")
{
    // f(k)^dagger f'(k) - f'(k)^dagger f(k) = 2ik and the same with f(-k)^dagger vanishes
    std::mt19937_64 rng(21);
    const auto grid = small_grid();
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 3;
        const auto v = HermitianPotential::exp_decay(random_hermitian(rng, n, 1.5), 1.3);
        const double k = 0.4 + 0.9 * trial;
        const auto plus = jost_solution(v, k, grid);
        const auto minus = jost_solution(v, -k, grid);
        for (std::size_t i = 0; i < plus.x.size(); i += 5) {
            const ComplexMatrix w = plus.f[i].adjoint() * plus.f_prime[i] -
                                    plus.f_prime[i].adjoint() * plus.f[i];
            CHECK(matrix_norm(w - 2.0 * I_unit * k * ComplexMatrix::Identity(n, n)) < 1e-8);
            const ComplexMatrix w0 = minus.f[i].adjoint() * plus.f_prime[i] -
                                     minus.f_prime[i].adjoint() * plus.f[i];
            CHECK(matrix_norm(w0) < 1e-8);
        }
    }
}

TEST_CASE("free S-matrix: Dirichlet, Neumann and Robin closed forms")
{
    const auto grid = small_grid();
    const auto zero2 = HermitianPotential::zero(2);
    const auto id = ComplexMatrix::Identity(2, 2);
    const auto dir = boundary_pair(ComplexMatrix(-id));
    const auto neu = boundary_pair(ComplexMatrix(id));
    for (double k : {0.1, 1.0, 7.5}) {
        CHECK(matrix_norm(scattering_matrix(zero2, dir, k, grid) + id) < 1e-14);
        CHECK(matrix_norm(scattering_matrix(zero2, neu, k, grid) - id) < 1e-14);
    }

    const auto zero1 = HermitianPotential::zero(1);
    for (double alpha : {-2.0, -0.5, 0.7, std::numbers::pi / 2, 3.0}) {
        const auto bc = boundary_pair(scalar_matrix(phase(alpha)));
        for (double k : {0.05, 0.9, 4.0}) {
            const Complex s = scattering_matrix(zero1, bc, k, grid)(0, 0);
            CHECK(std::abs(s - robin_s(alpha, k)) < 1e-13);
            CHECK(std::abs(std::abs(s) - 1.0) < 1e-13);
        }
    }
}

TEST_CASE("sech^2 with Neumann condition: S = (k+i)/(k-i), bound state kappa = 1, C = 2")
{
    const auto v = HermitianPotential::sech2(1, 1.0);
    const auto bc = boundary_pair(scalar_matrix(1.0));
    const auto grid = small_grid();
    for (double k : {0.25, 1.0, 3.0, 9.0}) {
        const Complex s = scattering_matrix(v, bc, k, grid)(0, 0);
        CHECK(std::abs(s - (k + I_unit) / (k - I_unit)) < 1e-8);
    }
    const auto bs = find_bound_states(v, bc, grid);
    REQUIRE(bs.size() == 1);
    CHECK(bs[0].kappa == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(bs[0].multiplicity == 1);
    const auto c = norming_matrix(v, bc, bs[0].kappa, grid);
    CHECK(c(0, 0).real() == doctest::Approx(2.0).epsilon(1e-6));

    // Dirichlet: no bound state
    const auto dir = boundary_pair(scalar_matrix(-1.0));
    CHECK(find_bound_states(v, dir, grid).empty());
}

TEST_CASE("free Robin bound state kappa = tan(alpha/2), C = sqrt(2 kappa)")
{
    const auto zero1 = HermitianPotential::zero(1);
    const auto grid = small_grid();
    for (double alpha : {std::numbers::pi / 3, std::numbers::pi / 2, 2 * std::numbers::pi / 3}) {
        const auto bc = boundary_pair(scalar_matrix(phase(alpha)));
        const auto bs = find_bound_states(zero1, bc, grid);
        REQUIRE(bs.size() == 1);
        const double kappa = std::tan(alpha / 2);
        CHECK(bs[0].kappa == doctest::Approx(kappa).epsilon(1e-9));
        const auto c = norming_matrix(zero1, bc, bs[0].kappa, grid);
        CHECK(std::abs(c(0, 0) - std::sqrt(2 * kappa)) < 1e-8);
    }
    for (double alpha : {-std::numbers::pi / 2, -0.3, 0.0}) {
        const auto bc = boundary_pair(scalar_matrix(phase(alpha)));
        CHECK(find_bound_states(zero1, bc, grid).empty());
    }
}

TEST_CASE("degenerate free bound state: multiplicity 2 for U = e^{i pi/2} I")
{
    const auto bc = boundary_pair(ComplexMatrix(I_unit * ComplexMatrix::Identity(2, 2)));
    const auto bs = find_bound_states(HermitianPotential::zero(2), bc, small_grid());
    REQUIRE(bs.size() == 1);
    CHECK(bs[0].kappa == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bs[0].multiplicity == 2);
    const auto c = norming_matrix(HermitianPotential::zero(2), bc, 1.0, small_grid());
    CHECK(matrix_norm(c - std::sqrt(2.0) * ComplexMatrix::Identity(2, 2)) < 1e-8);
}

TEST_CASE("bound_state_gram equals the exact series Gram integral")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 1 + trial;
        const ComplexMatrix h = random_hermitian(rng, n);
        const auto v = HermitianPotential::exp_decay(h, 1.0);
        for (double kappa : {0.3, 1.7}) {
            const ExpSeries oracle(h, Complex(0, kappa));
            const ComplexMatrix a = bound_state_gram(v, kappa, 30.0);
            INFO("n = " << n << " kappa = " << kappa);
            CHECK(matrix_norm(a - oracle.gram()) < 1e-8 * matrix_norm(oracle.gram()));
        }
    }
}

TEST_CASE("matrix exponential well with Neumann condition: root and C from the series")
{
    const ComplexMatrix h = reference_coefficient();
    const auto v = HermitianPotential::exp_decay(h, 1.0);
    const auto bc = boundary_pair(ComplexMatrix(ComplexMatrix::Identity(2, 2)));
    const auto grid = small_grid();

    // f'(i kappa, 0) commutes with H; the root lives on the negative eigenvector.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const double lambda = es.eigenvalues()(0);
    const ComplexVector e0 = es.eigenvectors().col(0);
    auto g = [&](double kappa) {
        return ExpSeries(scalar_matrix(lambda), Complex(0, kappa)).f_prime(0.0)(0, 0).real();
    };
    double lo = 1e-3, hi = 3.0;
    REQUIRE(g(lo) * g(hi) < 0);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(lo) * g(mid) <= 0 ? hi : lo) = mid;
    }
    const double kappa = 0.5 * (lo + hi);

    const auto bs = find_bound_states(v, bc, grid);
    REQUIRE(bs.size() == 1);
    CHECK(bs[0].kappa == doctest::Approx(kappa).epsilon(1e-8));

    const ComplexMatrix p = e0 * e0.adjoint();
    const ComplexMatrix a = ExpSeries(h, Complex(0, kappa)).gram();
    const Complex pap = e0.dot(a * e0);
    const ComplexMatrix expect = p / std::sqrt(pap.real());
    const ComplexMatrix c = norming_matrix(v, bc, bs[0].kappa, grid);
    CHECK(matrix_norm(c - expect) < 1e-6);
}

TEST_CASE("S is unitary and S(-k) S(k) = I for random data")
{
    std::mt19937_64 rng(99);
    const auto grid = small_grid();
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + trial % 4;
        const auto v = HermitianPotential::exp_decay(random_hermitian(rng, n, 0.8), 1.2);
        const auto bc = boundary_pair(random_unitary(rng, n));
        for (double k : {0.3, 2.1}) {
            const ComplexMatrix s = scattering_matrix(v, bc, k, grid);
            const ComplexMatrix sm = scattering_matrix(v, bc, -k, grid);
            CHECK(unitarity_residual(s) < 1e-8);
            CHECK(matrix_norm(ComplexMatrix(sm * s - ComplexMatrix::Identity(n, n))) < 1e-8);
        }
    }
}

TEST_CASE("S approaches U0 at high energy")
{
    std::mt19937_64 rng(42);
    const auto grid = small_grid();
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + trial % 2;
        // eigenphases kept away from pi, except for one exact Dirichlet direction
        const ComplexMatrix q = random_unitary(rng, n);
        std::uniform_real_distribution<double> ph(-2.0, 2.0);
        ComplexVector ev(n);
        for (int i = 0; i < n; ++i)
            ev(i) = phase(ph(rng));
        if (trial % 2 == 0)
            ev(0) = -1.0;
        const ComplexMatrix u = q * ev.asDiagonal() * q.adjoint();
        const auto v = HermitianPotential::exp_decay(random_hermitian(rng, n), 1.0);
        const auto bc = boundary_pair(u);
        const ComplexMatrix u0 = high_energy_limit(bc);
        const double e1 = matrix_norm(ComplexMatrix(scattering_matrix(v, bc, 200.0, grid) - u0));
        const double e2 = matrix_norm(ComplexMatrix(scattering_matrix(v, bc, 400.0, grid) - u0));
        CHECK(e1 < 0.2);
        CHECK(e2 < 0.75 * e1);
        CHECK(minus_one_multiplicity(u) == (trial % 2 == 0 ? 1 : 0));
    }
}

TEST_CASE("high_energy_limit closed form")
{
    const auto bc = boundary_pair(diag2(-1.0, I_unit));
    CHECK(matrix_norm(high_energy_limit(bc) - diag2(-1.0, 1.0)) < 1e-14);
    CHECK(minus_one_multiplicity(bc.U) == 1);
}

TEST_CASE("near-coincident roots raise ClusterAmbiguity")
{
    // two free Robin channels with kappa = 1 and 1 + 3e-6
    const double k2 = 1.0 + 3e-6;
    const double alpha2 = 2 * std::atan(k2);
    const auto bc = boundary_pair(diag2(phase(std::numbers::pi / 2), phase(alpha2)));
    CHECK_THROWS_AS(find_bound_states(HermitianPotential::zero(2), bc, small_grid()),
                    ClusterAmbiguity);
}

TEST_CASE("dimension mismatch is rejected")
{
    const auto bc = boundary_pair(ComplexMatrix(ComplexMatrix::Identity(2, 2)));
    CHECK_THROWS_AS(scattering_matrix(HermitianPotential::zero(3), bc, 1.0, small_grid()),
                    DimensionMismatch);
    CHECK_THROWS_AS(scattering_matrix(HermitianPotential::zero(2), bc, 0.0, small_grid()),
                    InvalidInput);
}

TEST_CASE("scattering_dataset is independent of the thread count")
{
    const auto v = HermitianPotential::exp_decay(reference_coefficient(), 1.0);
    const auto bc = boundary_pair(diag2(phase(1.0), -1.0));
    auto grid = small_grid();
    setenv("MM_THREADS", "1", 1);
    const auto a = scattering_dataset(v, bc, grid);
    setenv("MM_THREADS", "4", 1);
    const auto b = scattering_dataset(v, bc, grid);
    unsetenv("MM_THREADS");
    REQUIRE(a.S.size() == b.S.size());
    for (std::size_t i = 0; i < a.S.size(); ++i)
        CHECK((a.S[i].array() == b.S[i].array()).all());
    REQUIRE(a.bound_states.size() == b.bound_states.size());
    for (std::size_t i = 0; i < a.bound_states.size(); ++i)
        CHECK(a.bound_states[i].kappa == b.bound_states[i].kappa);
}
