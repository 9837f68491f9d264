#include "doctest.h"

#include "mmscat/core.hpp"
#include "mmscat/potential.hpp"
#include "test_support.hpp"

using namespace mmscat;
using namespace mmscat::testing;

TEST_CASE("boundary_pair: Dirichlet and Neumann")
{
    const auto id = ComplexMatrix::Identity(2, 2);
    auto dir = boundary_pair(ComplexMatrix(-id));
    CHECK(matrix_norm(dir.A) == 0.0);
    CHECK(matrix_norm(dir.B + I_unit * id) < 1e-15);

    auto neu = boundary_pair(ComplexMatrix(id));
    CHECK(matrix_norm(neu.A - id) < 1e-15);
    CHECK(matrix_norm(neu.B) == 0.0);
}

TEST_CASE("boundary_pair: scalar Robin alpha = pi/2")
{
    const double alpha = std::numbers::pi / 2;
    auto bc = boundary_pair(scalar_matrix(phase(alpha)));
    // oracle: plain complex arithmetic on (4)
    const Complex u = phase(alpha);
    const Complex a = (u + 1.0) / 2.0, b = I_unit * (u - 1.0) / 2.0;
    CHECK(std::abs(bc.A(0, 0) - a) < 1e-15);
    CHECK(std::abs(bc.B(0, 0) - b) < 1e-15);
    // closed forms e^{i pi/4} cos(pi/4), -e^{i pi/4} sin(pi/4)
    const Complex e = phase(alpha / 2);
    CHECK(std::abs(bc.A(0, 0) - e * std::cos(alpha / 2)) < 1e-15);
    CHECK(std::abs(bc.B(0, 0) + e * std::sin(alpha / 2)) < 1e-15);
}

TEST_CASE("boundary_pair: rejects non-unitary input")
{
    ComplexMatrix m = ComplexMatrix::Identity(2, 2) * 1.01;
    CHECK_THROWS_AS(boundary_pair(m), NonUnitary);
    CHECK_THROWS_AS(boundary_pair(ComplexMatrix::Identity(2, 3)), InvalidInput);
}

TEST_CASE("boundary_pair: symmetry and positivity hold for random unitary U")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 8;
        auto bc = boundary_pair(random_unitary(rng, n));
        auto [sym, min_eig] = boundary_pair_residuals(bc);
        CHECK(sym <= 1e-12);
        CHECK(min_eig > 0.0);
        // A^dagger A + B^dagger B = I/2 ... up to (U + U^dagger) terms cancelling
        const ComplexMatrix gram = bc.A.adjoint() * bc.A + bc.B.adjoint() * bc.B;
        CHECK(matrix_norm(gram - ComplexMatrix::Identity(n, n)) < 1e-12);
    }
}

TEST_CASE("nullspace_projector: closed-form cases")
{
    auto p0 = nullspace_projector(ComplexMatrix::Identity(2, 2), 1e-8);
    CHECK(p0.deficiency == 0);
    CHECK(matrix_norm(p0.projector) == 0.0);

    auto p2 = nullspace_projector(ComplexMatrix::Zero(2, 2), 1e-8);
    CHECK(p2.deficiency == 2);
    CHECK(matrix_norm(p2.projector - ComplexMatrix::Identity(2, 2)) < 1e-15);

    auto p1 = nullspace_projector(diag2(1.0, 1e-14), 1e-8);
    CHECK(p1.deficiency == 1);
    CHECK(matrix_norm(p1.projector - diag2(0.0, 1.0)) < 1e-14);
}

TEST_CASE("nullspace_projector: projector properties on random rank-deficient matrices")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 7;
        const int rank = 1 + trial % (n - 1);
        ComplexMatrix m = random_matrix(rng, n);
        Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::VectorXd s = svd.singularValues();
        for (int i = rank; i < n; ++i)
            s(i) = 1e-13;
        m = svd.matrixU() * s.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
        const double tol = rank_tolerance(m);
        auto proj = nullspace_projector(m, tol);
        const auto& p = proj.projector;
        CHECK(proj.deficiency == n - rank);
        CHECK(matrix_norm(p * p - p) <= 1e-10);
        CHECK(matrix_norm(p - p.adjoint()) <= 1e-10);
        CHECK(matrix_norm(ComplexMatrix(p.adjoint() * m)) <= n * std::max(tol, 1e-12));
    }
}

TEST_CASE("psd_inv_sqrt: closed forms")
{
    CHECK(matrix_norm(psd_inv_sqrt(ComplexMatrix::Identity(2, 2)) - ComplexMatrix::Identity(2, 2)) <
          1e-15);
    CHECK(matrix_norm(psd_inv_sqrt(diag2(4.0, 9.0)) - diag2(0.5, 1.0 / 3.0)) < 1e-15);

    ComplexMatrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const ComplexMatrix r = psd_inv_sqrt(m);
    CHECK(matrix_norm(r * m * r - ComplexMatrix::Identity(2, 2)) < 1e-12);
    // eigendecomposition oracle: eigenvalues 1 and 3 on (1, -1) and (1, 1)
    ComplexMatrix expect(2, 2);
    const double a = 0.5 * (1.0 + 1.0 / std::sqrt(3.0)), b = 0.5 * (1.0 / std::sqrt(3.0) - 1.0);
    expect << a, b, b, a;
    CHECK(matrix_norm(r - expect) < 1e-14);
}

TEST_CASE("psd_inv_sqrt: random Hermitian positive definite matrices")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 8;
        const ComplexMatrix x = random_matrix(rng, n);
        const ComplexMatrix m = x * x.adjoint() + 0.1 * ComplexMatrix::Identity(n, n);
        const ComplexMatrix r = psd_inv_sqrt(m);
        CHECK(matrix_norm(r * m * r - ComplexMatrix::Identity(n, n)) <= 1e-10);
        CHECK(hermiticity_residual(r) <= 1e-12);
    }
}

TEST_CASE("psd_inv_sqrt: singular or indefinite input is rejected")
{
    CHECK_THROWS_AS(psd_inv_sqrt(diag2(1.0, 0.0)), NotPositiveDefinite);
    CHECK_THROWS_AS(psd_inv_sqrt(diag2(1.0, -0.1)), NotPositiveDefinite);
}

TEST_CASE("GridSpec: k grid excludes zero, validation")
{
    GridSpec g;
    g.k_max = 10;
    g.n_k = 100;
    CHECK(g.k_at(0) == doctest::Approx(0.1));
    CHECK(g.k_at(99) == doctest::Approx(10.0));
    g.validate();
    g.n_x = 1;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    g.n_x = 11;
    g.x_max = -1;
    CHECK_THROWS_AS(g.validate(), InvalidInput);

    GridSpec r = GridSpec{}.refined();
    CHECK(r.x_step() == doctest::Approx(GridSpec{}.x_step() / 2));
    CHECK(r.k_step() == doctest::Approx(GridSpec{}.k_step() / 2));
}

TEST_CASE("potential presets are Hermitian and evaluate in closed form")
{
    auto z = HermitianPotential::zero(3);
    CHECK(matrix_norm(z(1.3)) == 0.0);

    auto s = HermitianPotential::sech2(1, 1.0);
    const double c = std::cosh(0.7);
    CHECK(s(0.7)(0, 0).real() == doctest::Approx(-2.0 / (c * c)).epsilon(1e-15));

    auto e = HermitianPotential::exp_decay(reference_coefficient(), 1.0);
    CHECK(matrix_norm(e(2.0) - std::exp(-2.0) * reference_coefficient()) < 1e-15);
    CHECK(hermiticity_residual(e(0.3)) <= 1e-12);

    // int_0^inf (1+x) e^{-x} dx * ||H|| = 2 * 1.5
    CHECK(e.weighted_norm(40.0) == doctest::Approx(3.0).epsilon(1e-8));

    ComplexMatrix bad(2, 2);
    bad << 1.0, 0.5, 0.2, -1.0;
    CHECK_THROWS_AS(HermitianPotential::exp_decay(bad, 1.0), InvalidInput);
}

TEST_CASE("sampled potential: interpolation, monotonicity and tail")
{
    std::vector<double> xs;
    std::vector<ComplexMatrix> vs;
    for (int i = 0; i <= 200; ++i) {
        const double x = 0.05 * i;
        xs.push_back(x);
        vs.push_back(std::exp(-x) * reference_coefficient());
    }
    auto p = HermitianPotential::sampled(xs, vs);
    // between samples: cubic Hermite accuracy on a smooth profile
    for (double x : {0.012, 1.337, 4.99, 9.97})
        CHECK(matrix_norm(p(x) - std::exp(-x) * reference_coefficient()) < 1e-5);
    // exponential tail continues e^{-x}
    CHECK(p.tail_rate() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(matrix_norm(p(12.0) - std::exp(-12.0) * reference_coefficient()) < 1e-12);

    // monotone data stays monotone between samples (no overshoot)
    std::vector<double> sx{0, 1, 2, 3, 4};
    std::vector<ComplexMatrix> sv;
    for (double y : {0.0, 0.0, 1.0, 1.0, 1.0})
        sv.push_back(scalar_matrix(y));
    auto step = HermitianPotential::sampled(sx, sv);
    double prev = -1;
    for (int i = 0; i <= 400; ++i) {
        const double v = step(0.01 * i)(0, 0).real();
        CHECK(v >= prev - 1e-15);
        CHECK(v <= 1.0 + 1e-15);
        prev = v;
    }

    CHECK_THROWS_AS(HermitianPotential::sampled({0, 1, 1}, {sv[0], sv[1], sv[2]}), InvalidInput);
}
