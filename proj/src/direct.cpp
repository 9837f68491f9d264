#include "mmscat/direct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmscat/parallel.hpp"

namespace mmscat {

namespace {

// State layout: [vec(m) ; vec(m') ; vec(g)?] with m = f e^{-ikx}.
struct ReducedJostSystem {
    const HermitianPotential& v;
    Complex k;
    int n;
    bool with_gram = false;
    mutable ComplexMatrix vx;

    ReducedJostSystem(const HermitianPotential& pot, Complex kk, bool gram)
        : v(pot), k(kk), n(pot.dim()), with_gram(gram), vx(pot.dim(), pot.dim())
    {
    }

    Eigen::Index size() const { return (with_gram ? 3 : 2) * n * n; }

    void operator()(double x, const ComplexVector& y, ComplexVector& dy) const
    {
        const auto nn = static_cast<Eigen::Index>(n) * n;
        Eigen::Map<const ComplexMatrix> m(y.data(), n, n);
        Eigen::Map<const ComplexMatrix> mp(y.data() + nn, n, n);
        Eigen::Map<ComplexMatrix> dm(dy.data(), n, n);
        Eigen::Map<ComplexMatrix> dmp(dy.data() + nn, n, n);
        v.evaluate(x, vx);
        dm = mp;
        dmp.noalias() = vx * m;
        dmp -= (2.0 * I_unit * k) * mp;
        if (with_gram) {
            Eigen::Map<ComplexMatrix> dg(dy.data() + 2 * nn, n, n);
            // |e^{ikx}|^2 = e^{-2 Im(k) x}
            dg.noalias() = std::exp(-2.0 * k.imag() * x) * (m.adjoint() * m);
        }
    }

    ComplexVector initial_state() const
    {
        ComplexVector y = ComplexVector::Zero(size());
        Eigen::Map<ComplexMatrix>(y.data(), n, n).setIdentity();
        return y;
    }
};

void check_k(Complex k)
{
    if (k.imag() < 0)
        throw InvalidInput("Jost solution requires Im k >= 0");
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag()))
        throw InvalidInput("non-finite wavenumber");
}

// f and f' from the reduced amplitude.
void expand(Complex k, double x, Eigen::Map<const ComplexMatrix> m,
            Eigen::Map<const ComplexMatrix> mp, ComplexMatrix& f, ComplexMatrix& fp)
{
    const Complex phase = std::exp(I_unit * k * x);
    f = phase * m;
    fp = phase * (I_unit * k * m + mp);
}

// Singular values of J(i kappa) relative to ||[f, f']||.
struct JostRankProbe {
    double ratio = 0;
    Eigen::VectorXd relative;
};

JostRankProbe probe(const HermitianPotential& v, const BoundaryCondition& bc, double kappa,
                    double x_max, const OdeOptions& ode)
{
    const auto origin = jost_at_origin(v, Complex(0, kappa), x_max, ode);
    const ComplexMatrix j = jost_matrix_from_origin(origin, bc);
    Eigen::JacobiSVD<ComplexMatrix> svd(j);
    // ||J|| <= ||[f, f']|| because [B; A] is an isometry, so this scale
    // does not vanish when J does
    ComplexMatrix stacked(j.rows(), 2 * j.cols());
    stacked << origin.f, origin.f_prime;
    Eigen::JacobiSVD<ComplexMatrix> scale(stacked);
    JostRankProbe p;
    const auto& s = svd.singularValues();
    const double smax = scale.singularValues()(0) > 0 ? scale.singularValues()(0) : 1.0;
    p.relative = s / smax;
    p.ratio = p.relative(s.size() - 1);
    return p;
}

} // namespace

JostSample jost_solution(const HermitianPotential& v, Complex k, const GridSpec& grid,
                         const OdeOptions& ode)
{
    check_k(k);
    grid.validate();
    const int n = v.dim();
    const auto nn = static_cast<Eigen::Index>(n) * n;
    ReducedJostSystem sys(v, k, false);
    ComplexVector y = sys.initial_state();

    JostSample out;
    out.k = k;
    out.x = grid.x_grid();
    const std::size_t nx = out.x.size();
    out.f.resize(nx);
    out.f_prime.resize(nx);
    std::vector<double> stops(out.x.rbegin(), out.x.rend());

    integrate_dopri5(sys, y, grid.x_max, 0.0, stops,
                     [&](std::size_t idx, const ComplexVector& state) {
                         const std::size_t i = nx - 1 - idx;
                         Eigen::Map<const ComplexMatrix> m(state.data(), n, n);
                         Eigen::Map<const ComplexMatrix> mp(state.data() + nn, n, n);
                         expand(k, out.x[i], m, mp, out.f[i], out.f_prime[i]);
                     },
                     ode);
    return out;
}

JostOrigin jost_at_origin(const HermitianPotential& v, Complex k, double x_max,
                          const OdeOptions& ode)
{
    check_k(k);
    const int n = v.dim();
    const auto nn = static_cast<Eigen::Index>(n) * n;
    JostOrigin out;
    if (v.is_zero()) {
        out.f = ComplexMatrix::Identity(n, n);
        out.f_prime = I_unit * k * ComplexMatrix::Identity(n, n);
        return out;
    }
    ReducedJostSystem sys(v, k, false);
    ComplexVector y = sys.initial_state();
    integrate_dopri5(sys, y, x_max, 0.0, std::span<const double>{},
                     [](std::size_t, const ComplexVector&) {}, ode);
    Eigen::Map<const ComplexMatrix> m(y.data(), n, n);
    Eigen::Map<const ComplexMatrix> mp(y.data() + nn, n, n);
    expand(k, 0.0, m, mp, out.f, out.f_prime);
    return out;
}

ComplexMatrix jost_matrix_from_origin(const JostOrigin& reflected, const BoundaryCondition& bc)
{
    return reflected.f.adjoint() * bc.B - reflected.f_prime.adjoint() * bc.A;
}

ComplexMatrix jost_matrix(const HermitianPotential& v, const BoundaryCondition& bc, Complex k,
                          const GridSpec& grid, const OdeOptions& ode)
{
    check_k(k);
    if (bc.dim() != v.dim())
        throw DimensionMismatch("potential and boundary matrix dimensions differ");
    const Complex reflected = -std::conj(k);
    return jost_matrix_from_origin(jost_at_origin(v, reflected, grid.x_max, ode), bc);
}

ComplexMatrix scattering_matrix(const HermitianPotential& v, const BoundaryCondition& bc,
                                double k, const GridSpec& grid, const OdeOptions& ode)
{
    if (k == 0 || !std::isfinite(k))
        throw InvalidInput("scattering matrix needs real k != 0");
    if (bc.dim() != v.dim())
        throw DimensionMismatch("potential and boundary matrix dimensions differ");
    const ComplexMatrix j_plus = jost_matrix_from_origin(jost_at_origin(v, -k, grid.x_max, ode), bc);
    const ComplexMatrix j_minus = jost_matrix_from_origin(jost_at_origin(v, k, grid.x_max, ode), bc);
    const double cond = condition_number(j_plus);
    if (cond > 1e12)
        throw SingularJostMatrix("cond J(" + std::to_string(k) + ") = " + std::to_string(cond));
    return -j_minus * j_plus.partialPivLu().inverse();
}

int minus_one_multiplicity(const ComplexMatrix& u, double tol)
{
    const ComplexMatrix shifted = u + ComplexMatrix::Identity(u.rows(), u.cols());
    return nullspace_projector(shifted, tol).deficiency;
}

ComplexMatrix high_energy_limit(const BoundaryCondition& bc)
{
    const auto n = bc.dim();
    const ComplexMatrix shifted = bc.U + ComplexMatrix::Identity(n, n);
    const auto proj = nullspace_projector(shifted, 1e-8);
    const ComplexMatrix u0 = ComplexMatrix::Identity(n, n) - 2.0 * proj.projector;
    return hermitian_part(u0);
}

double default_kappa_max(const HermitianPotential& v, const BoundaryCondition& bc,
                         const GridSpec& grid)
{
    Eigen::ComplexEigenSolver<ComplexMatrix> es(bc.U, false);
    double kb = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double theta = std::arg(es.eigenvalues()(i));
        if (theta > 1e-12 && theta < std::numbers::pi - 1e-8)
            kb = std::max(kb, std::tan(theta / 2));
    }
    const double kv = std::sqrt(v.sup_norm(grid.x_max, 4001));
    return 2.0 * std::max(kb, kv) + 1.0;
}

std::vector<BoundState> find_bound_states(const HermitianPotential& v,
                                          const BoundaryCondition& bc, const GridSpec& grid,
                                          const BoundStateSearch& search, const OdeOptions& ode)
{
    if (bc.dim() != v.dim())
        throw DimensionMismatch("potential and boundary matrix dimensions differ");
    const double kappa_max =
        search.kappa_max > 0 ? search.kappa_max : default_kappa_max(v, bc, grid);
    const double kappa_lo = 1e-3 * kappa_max;
    const int ns = std::max(8, search.scan_samples);
    const double tol = grid.tol_rank;

    std::vector<double> kap(ns), g(ns);
    for (int i = 0; i < ns; ++i)
        kap[i] = kappa_lo * std::pow(kappa_max / kappa_lo, double(i) / (ns - 1));
    parallel_for(ns, [&](std::size_t i) { g[i] = probe(v, bc, kap[i], grid.x_max, ode).ratio; });

    auto objective = [&](double kappa) { return probe(v, bc, kappa, grid.x_max, ode).ratio; };

    std::vector<BoundState> roots;
    for (int i = 0; i < ns; ++i) {
        const bool left_ok = i == 0 || g[i] <= g[i - 1];
        const bool right_ok = i == ns - 1 || g[i] < g[i + 1];
        if (!left_ok || !right_ok)
            continue;
        // golden-section refinement inside the neighbouring samples
        double a = kap[std::max(0, i - 1)], b = kap[std::min(ns - 1, i + 1)];
        constexpr double inv_phi = 0.6180339887498949;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        double fc = objective(c), fd = objective(d);
        while (b - a > search.refine_tol) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective(d);
            }
        }
        const double kappa = 0.5 * (a + b);
        const auto p = probe(v, bc, kappa, grid.x_max, ode);
        if (p.ratio > 10 * tol)
            continue;
        if (p.ratio > tol / 10)
            throw ClusterAmbiguity("near-root at kappa = " + std::to_string(kappa) +
                                   " with relative singular value " + std::to_string(p.ratio));
        int mult = 0;
        for (Eigen::Index s = 0; s < p.relative.size(); ++s) {
            const double r = p.relative(s);
            if (r >= tol / 10 && r <= 10 * tol)
                throw ClusterAmbiguity("singular value " + std::to_string(r) +
                                       " within a factor 10 of the rank threshold at kappa = " +
                                       std::to_string(kappa));
            if (r < tol)
                ++mult;
        }
        if (!roots.empty() && kappa - roots.back().kappa < 10 * search.refine_tol) {
            // same root reached from two adjacent samples
            if (kappa - roots.back().kappa < 1e3 * search.refine_tol)
                continue;
            throw ClusterAmbiguity("roots closer than 10x the refinement tolerance");
        }
        roots.push_back({kappa, mult, {}});
    }
    return roots;
}

ComplexMatrix bound_state_gram(const HermitianPotential& v, double kappa, double x_max,
                               const OdeOptions& ode)
{
    if (!(kappa > 0))
        throw InvalidInput("bound_state_gram needs kappa > 0");
    const int n = v.dim();
    const auto nn = static_cast<Eigen::Index>(n) * n;
    ReducedJostSystem sys(v, Complex(0, kappa), true);
    ComplexVector y = sys.initial_state();
    integrate_dopri5(sys, y, x_max, 0.0, std::span<const double>{},
                     [](std::size_t, const ComplexVector&) {}, ode);
    Eigen::Map<const ComplexMatrix> g(y.data() + 2 * nn, n, n);
    // beyond x_max the solution is e^{-kappa x} I exactly
    const ComplexMatrix tail =
        std::exp(-2 * kappa * x_max) / (2 * kappa) * ComplexMatrix::Identity(n, n);
    return hermitian_part(ComplexMatrix(-g + tail));
}

ComplexMatrix norming_matrix(const HermitianPotential& v, const BoundaryCondition& bc,
                             double kappa, const GridSpec& grid, const OdeOptions& ode)
{
    if (bc.dim() != v.dim())
        throw DimensionMismatch("potential and boundary matrix dimensions differ");
    const auto origin = jost_at_origin(v, Complex(0, kappa), grid.x_max, ode);
    const ComplexMatrix j = jost_matrix_from_origin(origin, bc);
    ComplexMatrix stacked(j.rows(), 2 * j.cols());
    stacked << origin.f, origin.f_prime;
    const auto proj = nullspace_projector(j, rank_tolerance(stacked, grid.tol_rank));
    if (proj.deficiency == 0)
        throw InvalidInput("J(i kappa) is not singular at kappa = " + std::to_string(kappa));
    const auto n = j.rows();
    const ComplexMatrix& p = proj.projector;
    const ComplexMatrix a = bound_state_gram(v, kappa, grid.x_max, ode);
    const ComplexMatrix core = p * a * p + ComplexMatrix::Identity(n, n) - p;
    return hermitian_part(ComplexMatrix(p * psd_inv_sqrt(core)));
}

ScatteringDataset scattering_dataset(const HermitianPotential& v, const BoundaryCondition& bc,
                                     const GridSpec& grid, const DirectOptions& opt)
{
    grid.validate();
    if (bc.dim() != v.dim())
        throw DimensionMismatch("potential and boundary matrix dimensions differ");
    ScatteringDataset data;
    data.n = v.dim();
    data.grid = grid;
    data.k = grid.k_grid();
    data.S.resize(data.k.size());
    parallel_for(data.k.size(), [&](std::size_t i) {
        data.S[i] = scattering_matrix(v, bc, data.k[i], grid, opt.ode);
    });
    data.U0 = high_energy_limit(bc);
    data.bound_states = find_bound_states(v, bc, grid, opt.search, opt.ode);
    for (auto& b : data.bound_states)
        b.C = norming_matrix(v, bc, b.kappa, grid, opt.ode);
    return data;
}

} // namespace mmscat
