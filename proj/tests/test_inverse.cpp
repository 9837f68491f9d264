#include "doctest.h"

#include "mmscat/inverse.hpp"
#include "test_support.hpp"

using namespace mmscat;
using namespace mmscat::testing;

namespace {

double sech2(double x)
{
    const double c = std::cosh(x);
    return 1 / (c * c);
}

// S(k) = (k + i)/(k - i) with one bound state at kappa = 1 and C^2 = c2.
// c2 = 4: Neumann, V = -2 sech^2.  c2 = 2: Robin U = i, V = 0.
ScatteringDataset soliton_data(const GridSpec& g, double c2)
{
    ScatteringDataset d;
    d.n = 1;
    d.grid = g;
    d.k = g.k_grid();
    d.U0 = ComplexMatrix::Identity(1, 1);
    for (double k : d.k)
        d.S.push_back(scalar_matrix((k + I_unit) / (k - I_unit)));
    d.bound_states.push_back({1.0, 1, scalar_matrix(std::sqrt(c2))});
    return d;
}

GridSpec inverse_grid()
{
    GridSpec g;
    g.k_max = 40;
    g.n_k = 800;
    g.x_max = 8;
    g.n_x = 401;
    return g;
}

} // namespace

TEST_CASE("recover_potential differentiates the diagonal")
{
    const double h = 0.01;
    std::vector<ComplexMatrix> d;
    for (int i = 0; i <= 600; ++i) {
        const double x = h * i;
        d.push_back(scalar_matrix(-2 * std::exp(-2 * x) / (1 + std::exp(-2 * x))));
    }
    const auto V = recover_potential(d, h);
    double err = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        err = std::max(err, std::abs(V.V[i](0, 0) + 2 * sech2(V.x[i])));
    CHECK(err < 1e-5);
    CHECK(V.anti_hermitian_residual == 0.0);
}

TEST_CASE("recover_potential is exact on quartics and keeps the Hermitian part")
{
    std::mt19937_64 rng(2);
    const ComplexMatrix a = random_matrix(rng, 2), b = random_matrix(rng, 2);
    const double h = 0.05;
    std::vector<ComplexMatrix> d;
    for (int i = 0; i < 40; ++i) {
        const double x = h * i;
        d.push_back(x * x * x * x * a + x * b);
    }
    const auto V = recover_potential(d, h);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = h * double(i);
        const ComplexMatrix dk = 4 * x * x * x * a + b;
        CHECK(matrix_norm(ComplexMatrix(V.V[i] + 2.0 * hermitian_part(dk))) < 1e-9);
    }
    CHECK(V.anti_hermitian_residual > 0.1);
    CHECK_THROWS_AS(recover_potential(std::vector<ComplexMatrix>(4, a), h), InvalidInput);
}

TEST_CASE("default k samples snap to the grid")
{
    GridSpec g;
    g.k_max = 3;
    g.n_k = 30;
    ScatteringDataset d;
    d.k = g.k_grid();
    const auto ks = default_k_samples(d);
    CHECK(ks.size() == 3);
    CHECK(ks[0] == doctest::Approx(0.5));
    CHECK(ks[2] == doctest::Approx(2.0));
}

TEST_CASE("soliton data: bound-state weight decides between two models")
{
    const auto g = inverse_grid();

    SUBCASE("C^2 = 4 gives the Neumann sech^2 well")
    {
        const auto m = run_inverse(soliton_data(g, 4.0), g);
        double err = 0;
        for (std::size_t i = 0; i < m.potential.x.size(); ++i)
            err = std::max(err, std::abs(m.potential.V[i](0, 0) + 2 * sech2(m.potential.x[i])));
        CHECK(err < 1e-3);
        CHECK(std::abs(m.U()(0, 0) - 1.0) < 1e-4);
        CHECK(m.marchenko_residual_on < 1e-6);
        CHECK_FALSE(m.margin_flag);
    }

    SUBCASE("C^2 = 2 gives V = 0 with Robin U = i")
    {
        const auto m = run_inverse(soliton_data(g, 2.0), g);
        double err = 0;
        for (const auto& v : m.potential.V)
            err = std::max(err, matrix_norm(v));
        CHECK(err < 1e-3);
        CHECK(std::abs(m.U()(0, 0) - I_unit) < 1e-4);
        CHECK(m.boundary.spread < 1e-3);
    }
}

TEST_CASE("S = -1 with bound state (1, sqrt 2): F = 2 e^{-t} gives the sech^2 well")
{
    const auto g = inverse_grid();
    ScatteringDataset d;
    d.n = 1;
    d.grid = g;
    d.k = g.k_grid();
    d.U0 = scalar_matrix(-1.0);
    d.S.assign(d.k.size(), d.U0);
    d.bound_states.push_back({1.0, 1, scalar_matrix(std::sqrt(2.0))});
    const auto m = run_inverse(d, g);
    double err = 0;
    for (std::size_t i = 0; i < m.potential.x.size() && m.potential.x[i] <= 6; ++i)
        err = std::max(err, std::abs(m.potential.V[i](0, 0) + 2 * sech2(m.potential.x[i])));
    CHECK(err < 1e-3);
}

TEST_CASE("constant scattering matrices give V = 0 and U = U0")
{
    GridSpec g = inverse_grid();
    g.n_x = 201;
    for (double sign : {1.0, -1.0}) {
        ScatteringDataset d;
        d.n = 2;
        d.grid = g;
        d.k = g.k_grid();
        d.U0 = sign * ComplexMatrix::Identity(2, 2);
        d.S.assign(d.k.size(), d.U0);
        const auto m = run_inverse(d, g);
        for (const auto& v : m.potential.V)
            CHECK(matrix_norm(v) < 1e-12);
        CHECK(matrix_norm(ComplexMatrix(m.U() - d.U0)) < 1e-12);
        for (const auto& e : m.boundary.estimates)
            CHECK(e.condition < 1.0 + 1e-12);
    }
}

TEST_CASE("free matrix round trip with mixed boundary phases")
{
    std::mt19937_64 rng(8);
    const ComplexMatrix Q = random_unitary(rng, 3);
    const ComplexMatrix phases =
        Eigen::Vector3cd(phase(-1.0), phase(1.2), phase(std::numbers::pi)).asDiagonal();
    const ComplexMatrix U = Q * phases * Q.adjoint();
    GridSpec g = inverse_grid();
    g.x_max = 10;
    g.n_x = 501;
    const auto data = scattering_dataset(HermitianPotential::zero(3), boundary_pair(U), g);
    REQUIRE(data.bound_states.size() == 1);
    const auto m = run_inverse(data, g);
    CHECK(matrix_norm(ComplexMatrix(m.U() - U)) < 1e-4);
    double err = 0;
    for (const auto& v : m.potential.V)
        err = std::max(err, matrix_norm(v));
    CHECK(err < 1e-3);
    CHECK(m.F_hermiticity < 1e-12);
}

TEST_CASE("boundary recovery input checks")
{
    const auto g = inverse_grid();
    const auto d1 = soliton_data(g, 2.0);
    const auto F = build_F(d1, g);
    const auto K = solve_marchenko(F, g);
    CHECK_THROWS_AS(recover_boundary(K, d1, {-1.0}), InvalidInput);
    CHECK_THROWS_AS(recover_boundary(K, d1, {100.0}), InvalidInput);

    ScatteringDataset d2 = d1;
    d2.n = 2;
    CHECK_THROWS_AS(recover_boundary(K, d2), DimensionMismatch);

    const auto b = recover_boundary(K, d1, {1.0, 3.0});
    CHECK(b.estimates.size() == 2);
    CHECK(unitarity_residual(b.U) < 1e-12);
}
