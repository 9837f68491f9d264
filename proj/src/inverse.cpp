#include "mmscat/inverse.hpp"

#include <algorithm>
#include <cmath>

namespace mmscat {

RecoveredPotential recover_potential(const std::vector<ComplexMatrix>& d, double h)
{
    const std::size_t N = d.size();
    if (N < 5)
        throw InvalidInput("potential recovery needs at least five kernel rows");
    if (!(h > 0))
        throw InvalidInput("grid step must be positive");
    RecoveredPotential out;
    out.x.resize(N);
    out.V.resize(N);
    const double scale = -2.0 / (12.0 * h);
    for (std::size_t i = 0; i < N; ++i) {
        ComplexMatrix dk;
        if (i == 0)
            dk = -25.0 * d[0] + 48.0 * d[1] - 36.0 * d[2] + 16.0 * d[3] - 3.0 * d[4];
        else if (i == 1)
            dk = -3.0 * d[0] - 10.0 * d[1] + 18.0 * d[2] - 6.0 * d[3] + d[4];
        else if (i == N - 2)
            dk = 3.0 * d[N - 1] + 10.0 * d[N - 2] - 18.0 * d[N - 3] + 6.0 * d[N - 4] - d[N - 5];
        else if (i == N - 1)
            dk = 25.0 * d[N - 1] - 48.0 * d[N - 2] + 36.0 * d[N - 3] - 16.0 * d[N - 4] +
                 3.0 * d[N - 5];
        else
            dk = d[i - 2] - 8.0 * d[i - 1] + 8.0 * d[i + 1] - d[i + 2];
        const ComplexMatrix v = scale * dk;
        out.anti_hermitian_residual = std::max(out.anti_hermitian_residual, hermiticity_residual(v));
        out.V[i] = hermitian_part(v);
        out.x[i] = h * double(i);
    }
    return out;
}

RecoveredPotential recover_potential(const MarchenkoKernel& kernel)
{
    auto out = recover_potential(kernel.diagonal, kernel.step());
    out.x = kernel.x;
    return out;
}

std::vector<double> default_k_samples(const ScatteringDataset& data)
{
    std::vector<double> ks;
    if (data.k.empty())
        return ks;
    for (double target : {0.5, 1.0, 2.0, 4.0}) {
        if (target > data.k.back())
            continue;
        auto it = std::min_element(data.k.begin(), data.k.end(), [&](double a, double b) {
            return std::abs(a - target) < std::abs(b - target);
        });
        if (ks.empty() || ks.back() != *it)
            ks.push_back(*it);
    }
    if (ks.empty())
        ks.push_back(data.k.back());
    return ks;
}

BoundaryRecovery recover_boundary(const MarchenkoKernel& kernel, const ScatteringDataset& data,
                                  std::vector<double> k_samples)
{
    if (kernel.leading_rows.size() < 5)
        throw InvalidInput("boundary recovery needs the first five kernel rows");
    const int n = data.n;
    const auto& rows = kernel.leading_rows;
    const std::size_t N = rows[0].size();
    if (rows[0][0].rows() != n)
        throw DimensionMismatch("kernel and scattering data dimensions differ");
    if (k_samples.empty())
        k_samples = default_k_samples(data);
    const double h = kernel.step();
    const auto w = window_weights(int(N), h, kernel.rule);

    // K(0, t) and K_x(0, t) on the nodes
    std::vector<ComplexMatrix> kx(N);
    for (std::size_t a = 0; a < N; ++a)
        kx[a] = (-25.0 * rows[0][a] + 48.0 * rows[1][a] - 36.0 * rows[2][a] +
                 16.0 * rows[3][a] - 3.0 * rows[4][a]) /
                (12.0 * h);

    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    BoundaryRecovery out;
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    double weight = 0;
    for (double kreq : k_samples) {
        if (!(kreq > 0))
            throw InvalidInput("k samples must be positive");
        const auto it = std::min_element(data.k.begin(), data.k.end(), [&](double a, double b) {
            return std::abs(a - kreq) < std::abs(b - kreq);
        });
        const std::size_t ik = std::size_t(it - data.k.begin());
        const double k = *it;
        const double step = data.k.size() > 1 ? data.k[1] - data.k[0] : k;
        if (std::abs(k - kreq) > 0.5 * step + 1e-12)
            throw InvalidInput("k sample " + std::to_string(kreq) + " outside the data grid");

        ComplexMatrix fp = id, fm = id;
        ComplexMatrix dp = I_unit * k * id - rows[0][0], dm = -I_unit * k * id - rows[0][0];
        for (std::size_t a = 0; a < N; ++a) {
            const Complex e = std::polar(w[a], k * h * double(a));
            const Complex ec = std::conj(e);
            fp += e * rows[0][a];
            fm += ec * rows[0][a];
            dp += e * kx[a];
            dm += ec * kx[a];
        }
        const ComplexMatrix& S = data.S[ik];
        const ComplexMatrix G = fm + fp * S;
        const ComplexMatrix Gp = dm + dp * S;
        const ComplexMatrix den = G + I_unit * Gp;
        BoundaryEstimate est;
        est.k = k;
        est.condition = condition_number(den);
        est.U = (G - I_unit * Gp) * den.partialPivLu().inverse();
        if (est.condition <= 1e10 && std::isfinite(est.condition)) {
            sum += est.U / est.condition;
            weight += 1.0 / est.condition;
        }
        out.estimates.push_back(std::move(est));
    }
    if (weight == 0)
        throw IllConditionedRecovery("cond(G + iG') > 1e10 at every k sample");
    const ComplexMatrix mean = sum / weight;

    // the (-1)-eigenspace of U is fixed by U0 = I - 2 P_D
    const ComplexMatrix pd = (id - data.U0) / 2.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(pd));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (es.eigenvalues()(i) < 0.5)
            keep.push_back(i);
    ComplexMatrix E(n, Eigen::Index(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        E.col(Eigen::Index(j)) = es.eigenvectors().col(keep[j]);
    out.U = -(id - E * E.adjoint());
    if (E.cols() > 0)
        out.U += E * polar_unitary(ComplexMatrix(E.adjoint() * mean * E)) * E.adjoint();
    out.structure_residual = matrix_norm(ComplexMatrix(mean - out.U));
    for (const auto& e : out.estimates)
        out.spread = std::max(out.spread, matrix_norm(ComplexMatrix(e.U - out.U)));
    return out;
}

RecoveredModel run_inverse(const ScatteringDataset& data, const GridSpec& grid,
                           const InverseOptions& opt)
{
    RecoveredModel model;
    model.grid = grid;
    const FKernel F = build_F(data, grid, opt.fourier);
    model.F_hermiticity = F.hermiticity_residual();
    model.notes = F.notes;
    const MarchenkoKernel kernel = solve_marchenko(F, grid, opt.marchenko);
    model.marchenko_residual_on = kernel.residual_on;
    model.marchenko_residual_off = kernel.residual_off;
    model.marchenko_condition = kernel.condition;
    model.homogeneous_margin = kernel.margin;
    model.margin_flag = kernel.margin_flag;
    if (kernel.margin_flag)
        model.notes.push_back("homogeneous margin " + std::to_string(kernel.margin) +
                              " below threshold at x = 0");
    model.potential = recover_potential(kernel);
    model.boundary = recover_boundary(kernel, data, opt.k_samples);
    return model;
}

} // namespace mmscat
