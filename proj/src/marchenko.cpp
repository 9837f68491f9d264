#include "mmscat/marchenko.hpp"

#include <cmath>
#include <optional>
#include <set>

#include "mmscat/parallel.hpp"

namespace mmscat {

namespace {

constexpr int leading_count = 5;

struct Layout {
    int N = 0;       // nodes on [0, x_max]
    int n = 0;       // matrix dimension
    double h = 0;
};

Layout check_layout(const FKernel& F, const GridSpec& grid)
{
    grid.validate();
    Layout l{grid.n_x, F.dim(), grid.x_step()};
    if (l.n < 1)
        throw InvalidInput("empty F table");
    if (std::abs(F.dt - l.h / 2) > 1e-12 * l.h)
        throw InvalidInput("F must be tabulated at half the x step");
    if (F.size() < 4 * std::size_t(l.N - 1) + 1)
        throw InvalidInput("F must be tabulated up to 2 x_max");
    return l;
}

int node_index(double x, const Layout& l)
{
    const double s = x / l.h;
    const long p = std::lround(s);
    if (p < 0 || p >= l.N || std::abs(s - double(p)) > 1e-9)
        throw InvalidInput("x = " + std::to_string(x) + " is not a grid node");
    return int(p);
}

// Solution of one row on its window, K[a - p] = K(x_p, t_a).
struct Row {
    int p = 0;
    std::vector<double> w;
    std::vector<ComplexMatrix> K;
    double condition = 1;
};

// Symmetrized Nystrom matrix for the window starting at node p.
ComplexMatrix window_matrix(const FKernel& F, int p, const Layout& l, const std::vector<double>& w)
{
    const int m = l.N - p, n = l.n;
    ComplexMatrix H(n * m, n * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b <= a; ++b) {
            ComplexMatrix blk = std::sqrt(w[a] * w[b]) * F[2 * (2 * p + a + b)];
            if (a == b)
                blk += ComplexMatrix::Identity(n, n);
            H.block(n * a, n * b, n, n) = blk;
            if (a != b)
                H.block(n * b, n * a, n, n) = blk.adjoint();
        }
    return H;
}

Row dense_row(const FKernel& F, int p, const Layout& l, const MarchenkoOptions& opt)
{
    const int m = l.N - p, n = l.n;
    Row row;
    row.p = p;
    row.w = window_weights(m, l.h, opt.rule);
    const ComplexMatrix H = window_matrix(F, p, l, row.w);
    ComplexMatrix b(n * m, n);
    for (int a = 0; a < m; ++a)
        b.block(n * a, 0, n, n) = -std::sqrt(row.w[a]) * F[2 * (2 * p + a)];
    Eigen::PartialPivLU<ComplexMatrix> lu(H);
    const double rc = lu.rcond();
    row.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (row.condition > opt.cond_limit)
        throw NearSingularSystem("condition number " + std::to_string(row.condition) +
                                 " at x = " + std::to_string(p * l.h));
    const ComplexMatrix z = lu.solve(b);
    row.K.resize(m);
    for (int a = 0; a < m; ++a)
        row.K[a] = row.w[a] > 0 ? ComplexMatrix(z.block(n * a, 0, n, n).adjoint() / std::sqrt(row.w[a]))
                                : ComplexMatrix(-F[2 * (2 * p + a)]);
    return row;
}

// K(x_p, y) at y = s dt from the equation itself.
ComplexMatrix nystrom_value(const FKernel& F, const Row& row, int s)
{
    const int p = row.p;
    ComplexMatrix v = -F[2 * p + s];
    for (std::size_t a = 0; a < row.K.size(); ++a)
        if (row.w[a] != 0)
            v -= row.w[a] * row.K[a] * F[2 * (p + int(a)) + s];
    return v;
}

// Re-substitution on the half-step grid.
std::pair<double, double> row_residual(const FKernel& F, const Row& row, const Layout& l,
                                       Quadrature rule)
{
    const int p = row.p;
    const int m = l.N - p;
    const int M = 2 * m - 1;
    std::vector<ComplexMatrix> k(M);
    for (int j = 0; j < M; ++j)
        k[j] = nystrom_value(F, row, 2 * p + j);
    const auto w = window_weights(M, l.h / 2, rule);
    double on = 0, off = 0;
    for (int j = 0; j < M; ++j) {
        ComplexMatrix r = k[j] + F[4 * p + j];
        for (int i = 0; i < M; ++i)
            r += w[i] * k[i] * F[4 * p + i + j];
        const double v = matrix_norm(r);
        (j % 2 == 0 ? on : off) = std::max(j % 2 == 0 ? on : off, v);
    }
    return {on, off};
}

// Reverse-order factorization G_rev = L diag(d) L^dagger of the full window
// matrix; trailing windows of G are leading blocks of L.
struct Factor {
    ComplexMatrix L;
    Eigen::VectorXd d;
    double condition = 1;
};

Factor factorize(const FKernel& F, const Layout& l, const std::vector<double>& wg)
{
    const int N = l.N, n = l.n;
    Factor fac;
    fac.L.resize(n * N, n * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) {
            const int a = N - 1 - i, b = N - 1 - j;
            ComplexMatrix blk = std::sqrt(wg[a] * wg[b]) * F[2 * (a + b)];
            if (i == j)
                blk += ComplexMatrix::Identity(n, n);
            fac.L.block(n * i, n * j, n, n) = blk;
            if (i != j)
                fac.L.block(n * j, n * i, n, n) = blk.adjoint();
        }
    const Eigen::Index M = fac.L.rows();

    ComplexMatrix backup = fac.L;
    Eigen::LLT<Eigen::Ref<ComplexMatrix>> llt(fac.L);
    if (llt.info() == Eigen::Success) {
        fac.L.triangularView<Eigen::StrictlyUpper>().setZero();
        fac.d = Eigen::VectorXd::Ones(M);
        const Eigen::VectorXd diag = fac.L.diagonal().real();
        fac.condition = std::pow(diag.maxCoeff() / diag.minCoeff(), 2);
        return fac;
    }

    // indefinite: unpivoted LDL^dagger keeps the leading-block structure
    fac.L = std::move(backup);
    fac.d.resize(M);
    for (Eigen::Index j = 0; j < M; ++j) {
        const double dj = fac.L(j, j).real();
        if (dj == 0 || !std::isfinite(dj))
            throw NearSingularSystem("zero pivot in the Marchenko factorization");
        fac.d(j) = dj;
        const Eigen::Index r = M - j - 1;
        if (r > 0) {
            const ComplexVector col = fac.L.col(j).tail(r);
            fac.L.bottomRightCorner(r, r).template triangularView<Eigen::Lower>() -=
                (col / dj) * col.adjoint();
            fac.L.col(j).tail(r) = col / dj;
        }
        fac.L(j, j) = 1.0;
    }
    fac.L.triangularView<Eigen::StrictlyUpper>().setZero();
    const Eigen::VectorXd ad = fac.d.cwiseAbs();
    fac.condition = ad.maxCoeff() / ad.minCoeff();
    return fac;
}

// Solves G_RR z = v where R is the leading block of size r (rows of L).
void solve_leading(const Factor& fac, Eigen::Index r, ComplexMatrix& v)
{
    const auto L = fac.L.topLeftCorner(r, r);
    L.triangularView<Eigen::Lower>().solveInPlace(v);
    v.array().colwise() /= fac.d.head(r).cast<Complex>().array();
    L.adjoint().triangularView<Eigen::Upper>().solveInPlace(v);
}

struct FastRow {
    ComplexMatrix K_diag;
};

// Row p from the global factor; optionally the full row.
FastRow fast_row(const FKernel& F, const Factor& fac, const std::vector<double>& wg, int p,
                 const Layout& l, Quadrature rule, Row* full)
{
    const int N = l.N, n = l.n;
    const int m = N - p;
    const int e = rule == Quadrature::gregory ? 3 : 1;
    const auto wp = window_weights(m, l.h, rule);
    const int rb = N - p - e;   // first reversed block of E

    // Q = G_EE - L_EE D L_EE^dagger, reversed order
    const auto LEE = fac.L.block(n * rb, n * rb, n * e, n * e);
    const ComplexMatrix sigma =
        LEE * fac.d.segment(n * rb, n * e).cast<Complex>().asDiagonal() * LEE.adjoint();

    auto G = [&](int a, int b) {
        ComplexMatrix blk = std::sqrt(wg[a] * wg[b]) * F[2 * (a + b)];
        if (a == b)
            blk += ComplexMatrix::Identity(n, n);
        return blk;
    };
    // original-order index i in E (node p + i) <-> reversed block e - 1 - i
    ComplexMatrix M(n * e, n * e), rhs(n * e, n);
    std::vector<double> s(e);
    for (int i = 0; i < e; ++i)
        s[i] = std::sqrt(wp[i] / wg[p + i]);
    auto Q = [&](int i, int j) {
        return ComplexMatrix(G(p + i, p + j) -
                             sigma.block(n * (e - 1 - i), n * (e - 1 - j), n, n));
    };
    for (int i = 0; i < e; ++i) {
        for (int j = 0; j < e; ++j) {
            ComplexMatrix h = std::sqrt(wp[i] * wp[j]) * F[2 * (2 * p + i + j)];
            if (i == j)
                h += ComplexMatrix::Identity(n, n);
            M.block(n * i, n * j, n, n) = h - s[i] * s[j] * Q(i, j);
        }
        rhs.block(n * i, 0, n, n) =
            -std::sqrt(wp[i]) * F[2 * (2 * p + i)] + s[i] * Q(i, 0) / std::sqrt(wg[p]);
    }
    const ComplexMatrix ze = M.partialPivLu().solve(rhs);

    FastRow out;
    out.K_diag = ze.topRows(n).adjoint() / std::sqrt(wp[0]);
    if (!full)
        return out;

    // Z_R = G_RR^{-1} (-G_Rp / sqrt(wg_p) - G_RE S Z_E), reversed order
    const int r = N - p - e;
    ComplexMatrix v(n * r, n);
    for (int i = 0; i < r; ++i) {
        const int b = N - 1 - i;
        ComplexMatrix acc = -G(b, p) / std::sqrt(wg[p]);
        for (int j = 0; j < e; ++j)
            acc -= G(b, p + j) * (s[j] * ze.block(n * j, 0, n, n));
        v.block(n * i, 0, n, n) = acc;
    }
    solve_leading(fac, n * r, v);

    full->p = p;
    full->w = wp;
    full->K.resize(m);
    full->condition = fac.condition;
    for (int j = 0; j < e; ++j)
        full->K[j] = ze.block(n * j, 0, n, n).adjoint() / std::sqrt(wp[j]);
    for (int i = 0; i < r; ++i) {
        const int a = N - 1 - i;
        full->K[a - p] = v.block(n * i, 0, n, n).adjoint() / std::sqrt(wp[a - p]);
    }
    return out;
}

// Smallest |eigenvalue| of G by inverse power iteration on the factor.
double factor_margin(const Factor& fac)
{
    const Eigen::Index M = fac.L.rows();
    ComplexMatrix v = ComplexMatrix::Ones(M, 1) / std::sqrt(double(M));
    double lambda = 0;
    for (int it = 0; it < 200; ++it) {
        ComplexMatrix u = v;
        solve_leading(fac, M, u);
        const double norm = u.norm();
        if (!(norm > 0))
            break;
        const double next = std::abs(v.col(0).dot(u.col(0)));
        v = u / norm;
        if (it > 5 && std::abs(next - lambda) <= 1e-10 * next)
            break;
        lambda = next;
    }
    return lambda > 0 ? 1.0 / lambda : 0.0;
}

} // namespace

std::vector<double> window_weights(int m, double h, Quadrature rule)
{
    if (m < 1)
        throw InvalidInput("window needs at least one node");
    std::vector<double> w(m, h);
    if (m == 1) {
        w[0] = 0;
        return w;
    }
    if (rule == Quadrature::gregory && m >= 6) {
        constexpr double c[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
        for (int i = 0; i < 3; ++i) {
            w[i] = c[i] * h;
            w[m - 1 - i] = c[i] * h;
        }
        return w;
    }
    w.front() = w.back() = h / 2;
    return w;
}

MarchenkoRow marchenko_solve(const FKernel& F, double x, const GridSpec& grid,
                             const MarchenkoOptions& opt)
{
    const Layout l = check_layout(F, grid);
    const int p = node_index(x, l);
    const Row row = dense_row(F, p, l, opt);
    MarchenkoRow out;
    out.x = p * l.h;
    out.K = row.K;
    out.t.resize(row.K.size());
    for (std::size_t a = 0; a < out.t.size(); ++a)
        out.t[a] = (p + double(a)) * l.h;
    out.condition = row.condition;
    std::tie(out.residual_on, out.residual_off) = row_residual(F, row, l, opt.rule);
    return out;
}

double homogeneous_margin(const FKernel& F, double x, const GridSpec& grid,
                          const MarchenkoOptions& opt)
{
    const Layout l = check_layout(F, grid);
    const int p = node_index(x, l);
    const auto w = window_weights(l.N - p, l.h, opt.rule);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(window_matrix(F, p, l, w),
                                                    Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
}

MarchenkoKernel solve_marchenko(const FKernel& F, const GridSpec& grid,
                                const MarchenkoOptions& opt)
{
    const Layout l = check_layout(F, grid);
    const int N = l.N;
    MarchenkoKernel out;
    out.grid = grid;
    out.rule = opt.rule;
    out.x = grid.x_grid();
    out.diagonal.resize(N);

    constexpr int fast_min = 8;
    const auto wg = window_weights(N, l.h, opt.rule);
    std::optional<Factor> fac;
    if (N >= fast_min) {
        fac = factorize(F, l, wg);
        out.condition = fac->condition;
        if (out.condition > opt.cond_limit)
            throw NearSingularSystem("condition number estimate " +
                                     std::to_string(out.condition));
        out.margin = factor_margin(*fac);
    } else {
        out.margin = homogeneous_margin(F, 0.0, grid, opt);
    }
    out.margin_flag = out.margin < opt.margin_threshold;

    const int fast_rows = fac ? N - fast_min + 1 : 0;
    parallel_for(std::size_t(N), [&](std::size_t i) {
        const int p = int(i);
        if (p < fast_rows)
            out.diagonal[p] = fast_row(F, *fac, wg, p, l, opt.rule, nullptr).K_diag;
        else
            out.diagonal[p] = dense_row(F, p, l, opt).K.front();
    });

    // full rows: the first five (boundary recovery) and a spread for residuals
    std::set<int> rows;
    for (int p = 0; p < std::min(leading_count, N); ++p)
        rows.insert(p);
    const int extra = std::max(0, opt.residual_rows);
    for (int i = 1; i <= extra; ++i)
        rows.insert(int(std::lround(double(i) * (N - 2) / extra)));
    out.checked_rows.assign(rows.begin(), rows.end());

    std::vector<Row> full(out.checked_rows.size());
    std::vector<std::pair<double, double>> res(full.size());
    parallel_for(full.size(), [&](std::size_t i) {
        const int p = out.checked_rows[i];
        if (p < fast_rows)
            fast_row(F, *fac, wg, p, l, opt.rule, &full[i]);
        else
            full[i] = dense_row(F, p, l, opt);
        res[i] = row_residual(F, full[i], l, opt.rule);
    });
    for (std::size_t i = 0; i < full.size(); ++i) {
        out.residual_on = std::max(out.residual_on, res[i].first);
        out.residual_off = std::max(out.residual_off, res[i].second);
        out.condition = std::max(out.condition, full[i].condition);
    }

    const int lead = std::min(leading_count, N);
    out.leading_rows.resize(lead);
    for (int p = 0; p < lead; ++p) {
        const Row& row = full[p];   // checked_rows starts with 0..lead-1
        auto& dst = out.leading_rows[p];
        dst.resize(N);
        for (int a = 0; a < N; ++a)
            dst[a] = a >= p ? row.K[a - p] : nystrom_value(F, row, 2 * a);
    }
    return out;
}

} // namespace mmscat
