#include "mmscat/validate.hpp"

#include <cmath>

#include "mmscat/parallel.hpp"

namespace mmscat {

std::vector<std::string> ConditionReport::failed() const
{
    std::vector<std::string> out;
    if (!I.pass)
        out.push_back("I");
    if (!II.pass)
        out.push_back("II");
    if (!III.pass)
        out.push_back("III");
    return out;
}

namespace {

bool well_formed(const ScatteringDataset& d)
{
    if (d.n < 1 || d.k.size() < 4 || d.k.size() != d.S.size())
        return false;
    if (d.U0.rows() != d.n || d.U0.cols() != d.n)
        return false;
    for (std::size_t i = 0; i < d.k.size(); ++i) {
        if (!(d.k[i] > 0) || (i > 0 && !(d.k[i] > d.k[i - 1])))
            return false;
        if (d.S[i].rows() != d.n || d.S[i].cols() != d.n || !d.S[i].allFinite())
            return false;
    }
    return true;
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : HUGE_VAL; }

} // namespace

ConditionI check_condition_I(const ScatteringDataset& data, const ValidationTolerances& tol)
{
    ConditionI out;
    if (!well_formed(data)) {
        out.unitarity = out.symmetry = HUGE_VAL;
        return out;
    }
    const ComplexMatrix id = ComplexMatrix::Identity(data.n, data.n);
    for (const auto& s : data.S) {
        out.unitarity = std::max(out.unitarity, unitarity_residual(s));
        out.symmetry = std::max(out.symmetry, matrix_norm(ComplexMatrix(s * s.adjoint() - id)));
    }

    const double h = data.k[0];
    bool equispaced = true;
    for (std::size_t i = 1; i < 4; ++i)
        equispaced &= std::abs(data.k[i] - h * double(i + 1)) <= 1e-9 * data.k[3];
    const ComplexMatrix s0 = equispaced
        ? ComplexMatrix(4.0 * data.S[0] - 6.0 * data.S[1] + 4.0 * data.S[2] - data.S[3])
        : data.S[0];
    out.zero_limit_hermiticity = hermiticity_residual(s0);

    out.U0_unitarity = unitarity_residual(data.U0);
    out.U0_hermiticity = hermiticity_residual(data.U0);

    // top decade [K/10, K]
    const double K = data.k.back();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, sc = 0, peak = 0;
    int m = 0;
    for (std::size_t i = 0; i < data.k.size(); ++i) {
        if (data.k[i] < K / 10)
            continue;
        const double r = matrix_norm(ComplexMatrix(data.S[i] - data.U0));
        peak = std::max(peak, r);
        sc += data.k[i] * r;
        ++m;
        const double lx = std::log(data.k[i]), ly = std::log(std::max(r, 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    out.tail = matrix_norm(ComplexMatrix(data.S.back() - data.U0));
    out.decay_constant = m ? sc / m : 0.0;
    const double den = m * sxx - sx * sx;
    out.decay_slope = (m >= 2 && den > 0) ? (m * sxy - sx * sy) / den : 0.0;
    const bool decays = peak <= tol.decay_floor || out.decay_slope <= tol.decay_slope;

    out.pass = out.unitarity <= tol.unitarity && out.symmetry <= tol.symmetry &&
               out.U0_unitarity <= tol.unitarity && out.U0_hermiticity <= tol.unitarity &&
               decays;
    out.unitarity = finite_or_inf(out.unitarity);
    out.symmetry = finite_or_inf(out.symmetry);
    return out;
}

ConditionII check_condition_II(const FKernel& F, const ValidationTolerances& tol)
{
    ConditionII out;
    const std::size_t N = F.size();
    if (N < 3) {
        out.pass = N > 0;
        return out;
    }
    const double dt = F.dt;
    std::vector<double> g(N);
    for (std::size_t i = 0; i < N; ++i) {
        ComplexMatrix d;
        if (i == 0)
            d = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2 * dt);
        else if (i == N - 1)
            d = (3.0 * F[N - 1] - 4.0 * F[N - 2] + F[N - 3]) / (2 * dt);
        else
            d = (F[i + 1] - F[i - 1]) / (2 * dt);
        g[i] = (1 + F.t_at(i)) * matrix_norm(d);
    }
    const std::size_t q = (3 * (N - 1)) / 4;
    double head = 0, tail = 0;
    for (std::size_t i = 0; i + 1 < N; ++i)
        (i < q ? head : tail) += 0.5 * dt * (g[i] + g[i + 1]);
    out.integral = head + tail;
    out.tail_increment = tail;
    if (!std::isfinite(out.integral)) {
        out.integral = out.tail_increment = HUGE_VAL;
        return out;
    }
    out.pass = tail <= tol.tail_floor || tail <= tol.tail_fraction * out.integral;
    return out;
}

ConditionIII check_condition_III(const ScatteringDataset& data, const ValidationTolerances& tol)
{
    ConditionIII out;
    out.pass = true;
    const double tol_rank = data.grid.tol_rank;
    double prev = 0;
    for (const auto& b : data.bound_states) {
        BoundStateDiagnostic d;
        d.kappa = b.kappa;
        d.pass = true;
        auto fail = [&](const std::string& why) {
            d.pass = false;
            d.message += (d.message.empty() ? "" : "; ") + why;
        };
        if (!(b.kappa > 0))
            fail("kappa must be positive");
        else if (!(b.kappa > prev))
            fail("kappa values must be strictly increasing");
        prev = std::max(prev, b.kappa);
        if (b.C.rows() != data.n || b.C.cols() != data.n || !b.C.allFinite()) {
            fail("normalization matrix has the wrong shape or non-finite entries");
        } else {
            d.hermiticity = hermiticity_residual(b.C);
            if (d.hermiticity > tol.hermiticity)
                fail("C is not Hermitian");
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(b.C),
                                                            Eigen::EigenvaluesOnly);
            const auto& lam = es.eigenvalues();
            d.min_eigenvalue = lam.minCoeff();
            const double scale = lam.cwiseAbs().maxCoeff();
            if (d.min_eigenvalue < -tol_rank)
                fail("C has eigenvalue " + std::to_string(d.min_eigenvalue));
            for (Eigen::Index i = 0; i < lam.size(); ++i)
                d.rank += lam(i) > tol_rank * std::max(scale, 1e-300) ? 1 : 0;
            if (d.rank < 1)
                fail("C has rank 0");
        }
        out.pass &= d.pass;
        out.bound_states.push_back(std::move(d));
    }
    return out;
}

ConditionReport check_conditions(const ScatteringDataset& data, const ValidationTolerances& tol)
{
    ConditionReport r;
    if (!well_formed(data))
        r.notes.push_back("dataset is malformed (sizes, ordering or non-finite entries)");
    r.I = check_condition_I(data, tol);
    r.III = check_condition_III(data, tol);
    try {
        r.II = check_condition_II(build_F(data, data.grid), tol);
    } catch (const Error& e) {
        r.II = ConditionII{};
        r.notes.push_back(std::string("F could not be built: ") + e.what());
    }
    return r;
}

WronskianReport wronskian_report(const HermitianPotential& v, const GridSpec& grid,
                                 const std::vector<double>& k_list, const OdeOptions& ode)
{
    WronskianReport out;
    const int n = v.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    std::vector<WronskianReport> per_k(k_list.size());
    parallel_for(k_list.size(), [&](std::size_t i) {
        const double k = k_list[i];
        if (!(k != 0) || !std::isfinite(k))
            throw InvalidInput("Wronskian wavenumbers must be real and nonzero");
        const auto p = jost_solution(v, k, grid, ode);
        const auto m = jost_solution(v, -k, grid, ode);
        for (std::size_t j = 0; j < p.x.size(); ++j) {
            const ComplexMatrix w1 = p.f[j].adjoint() * p.f_prime[j] -
                                     p.f_prime[j].adjoint() * p.f[j] - 2.0 * I_unit * k * id;
            const ComplexMatrix w2 =
                m.f[j].adjoint() * p.f_prime[j] - m.f_prime[j].adjoint() * p.f[j];
            per_k[i].same = std::max(per_k[i].same, matrix_norm(w1));
            per_k[i].reflected = std::max(per_k[i].reflected, matrix_norm(w2));
        }
    });
    for (const auto& r : per_k) {
        out.same = std::max(out.same, r.same);
        out.reflected = std::max(out.reflected, r.reflected);
    }
    return out;
}

RoundTripMetrics roundtrip_report(const HermitianPotential& v, const ComplexMatrix& U,
                                  const ScatteringDataset& original,
                                  const RecoveredModel& rec, const DirectOptions& opt)
{
    const int n = v.dim();
    if (U.rows() != n || original.n != n || rec.U().rows() != n ||
        (!rec.potential.V.empty() && rec.potential.V[0].rows() != n))
        throw DimensionMismatch("original and recovered models have different dimensions");

    RoundTripMetrics out;
    const auto& xs = rec.potential.x;
    const std::size_t N = xs.size();
    const double h = N > 1 ? xs[1] - xs[0] : 1.0;
    const auto w = window_weights(int(N), h, Quadrature::gregory);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const ComplexMatrix vi = v(xs[i]);
        const double e = matrix_norm(ComplexMatrix(vi - rec.potential.V[i]));
        out.potential_sup = std::max(out.potential_sup, e);
        num += w[i] * (1 + xs[i]) * e;
        den += w[i] * (1 + xs[i]) * matrix_norm(vi);
    }
    out.potential_relative = den > 0;
    out.potential_error = den > 0 ? num / den : num;
    out.boundary_error = matrix_norm(ComplexMatrix(U - rec.U()));

    const auto recovered = scattering_dataset(rec.potential.as_potential(),
                                              boundary_pair(rec.U()), original.grid, opt);
    for (std::size_t i = 0; i < original.S.size() && i < recovered.S.size(); ++i)
        out.scattering_error =
            std::max(out.scattering_error,
                     matrix_norm(ComplexMatrix(original.S[i] - recovered.S[i])));
    if (original.S.size() != recovered.S.size())
        throw DimensionMismatch("original and recovered k grids differ");

    out.bound_states = int(original.bound_states.size());
    out.bound_states_recovered = int(recovered.bound_states.size());
    if (out.bound_states == out.bound_states_recovered)
        for (std::size_t j = 0; j < original.bound_states.size(); ++j)
            out.kappa_error = std::max(out.kappa_error,
                                       std::abs(original.bound_states[j].kappa -
                                                recovered.bound_states[j].kappa));
    return out;
}

RoundTripMetrics roundtrip_report(const HermitianPotential& v, const ComplexMatrix& U,
                                  const RecoveredModel& recovered, const DirectOptions& opt)
{
    const auto original = scattering_dataset(v, boundary_pair(U), recovered.grid, opt);
    return roundtrip_report(v, U, original, recovered, opt);
}

} // namespace mmscat
