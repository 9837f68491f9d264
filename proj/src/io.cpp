#include "mmscat/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmscat::io {

namespace {

const Json& member(const Json& j, const char* key, const std::string& what)
{
    if (!j.is_object() || !j.contains(key))
        throw InvalidInput(what + ": missing \"" + key + "\"");
    return j.at(key);
}

double number(const Json& j, const std::string& what)
{
    if (!j.is_number())
        throw InvalidInput(what + ": expected a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& what)
{
    if (!j.is_number_integer())
        throw InvalidInput(what + ": expected an integer");
    return j.get<int>();
}

std::vector<double> numbers(const Json& j, const std::string& what)
{
    if (!j.is_array())
        throw InvalidInput(what + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<ComplexMatrix> matrices(const Json& j, const std::string& what)
{
    if (!j.is_array())
        throw InvalidInput(what + ": expected an array of matrices");
    std::vector<ComplexMatrix> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(matrix_from_json(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

Json array(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v)
        a.push_back(x);
    return a;
}

Json array(const std::vector<ComplexMatrix>& v)
{
    Json a = Json::array();
    for (const auto& m : v)
        a.push_back(to_json(m));
    return a;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void matrix_header(std::ostringstream& os, const std::string& name, int n)
{
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            os << ',' << name << '_' << a << b << "_re," << name << '_' << a << b << "_im";
}

void matrix_row(std::ostringstream& os, const ComplexMatrix& m)
{
    for (Eigen::Index a = 0; a < m.rows(); ++a)
        for (Eigen::Index b = 0; b < m.cols(); ++b)
            os << ',' << fmt(m(a, b).real()) << ',' << fmt(m(a, b).imag());
}

} // namespace

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const ComplexMatrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b)
            row.push_back(to_json(m(a, b)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Complex complex_from_json(const Json& j, const std::string& what)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InvalidInput(what + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& what)
{
    if (!j.is_array() || j.empty())
        throw InvalidInput(what + ": expected a nonempty array of rows");
    const auto n = Eigen::Index(j.size());
    ComplexMatrix m(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const Json& row = j[std::size_t(a)];
        if (!row.is_array() || Eigen::Index(row.size()) != n)
            throw InvalidInput(what + ": matrix must be square");
        for (Eigen::Index b = 0; b < n; ++b)
            m(a, b) = complex_from_json(row[std::size_t(b)], what + "[" + std::to_string(a) +
                                                                 "][" + std::to_string(b) + "]");
    }
    return m;
}

HermitianPotential potential_from_json(const Json& j)
{
    const std::string what = "potential";
    const Json& kind_j = member(j, "kind", what);
    if (!kind_j.is_string())
        throw InvalidInput(what + ": \"kind\" must be a string");
    const std::string kind = kind_j.get<std::string>();
    if (kind == "sampled")
        return HermitianPotential::sampled(numbers(member(j, "x", what), what + ".x"),
                                           matrices(member(j, "v", what), what + ".v"));
    const Json params = j.contains("params") ? j.at("params") : Json::object();
    const std::string pw = what + ".params";
    if (kind == "zero")
        return HermitianPotential::zero(integer(member(params, "n", pw), pw + ".n"));
    if (kind == "sech2") {
        const int n = params.contains("n") ? integer(params.at("n"), pw + ".n") : 1;
        const double kappa =
            params.contains("kappa") ? number(params.at("kappa"), pw + ".kappa") : 1.0;
        return HermitianPotential::sech2(n, kappa);
    }
    if (kind == "exp_decay") {
        const double rate = params.contains("rate") ? number(params.at("rate"), pw + ".rate") : 1.0;
        return HermitianPotential::exp_decay(matrix_from_json(member(params, "H", pw), pw + ".H"),
                                             rate);
    }
    throw InvalidInput(what + ": unknown kind \"" + kind + "\"");
}

Json potential_to_json(const HermitianPotential& v)
{
    Json j;
    switch (v.kind()) {
    case HermitianPotential::Kind::zero:
        j["kind"] = "zero";
        j["params"] = {{"n", v.dim()}};
        break;
    case HermitianPotential::Kind::sech2:
        j["kind"] = "sech2";
        j["params"] = {{"n", v.dim()}, {"kappa", v.kappa()}};
        break;
    case HermitianPotential::Kind::exp_decay:
        j["kind"] = "exp_decay";
        j["params"] = {{"H", to_json(v.coefficient())}, {"rate", v.rate()}};
        break;
    case HermitianPotential::Kind::sampled:
        j["kind"] = "sampled";
        j["x"] = array(v.sample_x());
        j["v"] = array(v.sample_v());
        break;
    case HermitianPotential::Kind::custom:
        throw InvalidInput("custom potentials cannot be serialized");
    }
    return j;
}

ComplexMatrix boundary_from_json(const Json& j)
{
    if (j.is_object() && j.contains("phases")) {
        const auto a = numbers(j.at("phases"), "boundary.phases");
        if (a.empty())
            throw InvalidInput("boundary.phases: expected at least one phase");
        ComplexMatrix u = ComplexMatrix::Zero(Eigen::Index(a.size()), Eigen::Index(a.size()));
        for (std::size_t i = 0; i < a.size(); ++i)
            u(Eigen::Index(i), Eigen::Index(i)) = std::polar(1.0, a[i]);
        return u;
    }
    return matrix_from_json(member(j, "U", "boundary"), "boundary.U");
}

Json boundary_to_json(const ComplexMatrix& U) { return {{"U", to_json(U)}}; }

Json grid_to_json(const GridSpec& g)
{
    return {{"k_max", g.k_max}, {"n_k", g.n_k},       {"x_max", g.x_max},
            {"n_x", g.n_x},     {"tol_rank", g.tol_rank}, {"tol_tail", g.tol_tail}};
}

GridSpec grid_from_json(const Json& j, GridSpec g)
{
    if (!j.is_object())
        throw InvalidInput("grid: expected an object");
    if (j.contains("k_max"))
        g.k_max = number(j.at("k_max"), "grid.k_max");
    if (j.contains("n_k"))
        g.n_k = integer(j.at("n_k"), "grid.n_k");
    if (j.contains("x_max"))
        g.x_max = number(j.at("x_max"), "grid.x_max");
    if (j.contains("n_x"))
        g.n_x = integer(j.at("n_x"), "grid.n_x");
    if (j.contains("tol_rank"))
        g.tol_rank = number(j.at("tol_rank"), "grid.tol_rank");
    if (j.contains("tol_tail"))
        g.tol_tail = number(j.at("tol_tail"), "grid.tol_tail");
    g.validate();
    return g;
}

Json dataset_to_json(const ScatteringDataset& d)
{
    Json j;
    j["format"] = "mmscat.scattering_data";
    j["n"] = d.n;
    j["grid"] = grid_to_json(d.grid);
    j["U0"] = to_json(d.U0);
    Json bs = Json::array();
    for (const auto& b : d.bound_states)
        bs.push_back({{"kappa", b.kappa}, {"multiplicity", b.multiplicity}, {"C", to_json(b.C)}});
    j["bound_states"] = std::move(bs);
    j["k"] = array(d.k);
    j["S"] = array(d.S);
    return j;
}

ScatteringDataset dataset_from_json(const Json& j)
{
    const std::string what = "scattering data";
    ScatteringDataset d;
    d.n = integer(member(j, "n", what), what + ".n");
    d.grid = grid_from_json(member(j, "grid", what));
    d.k = numbers(member(j, "k", what), what + ".k");
    d.S = matrices(member(j, "S", what), what + ".S");
    d.U0 = matrix_from_json(member(j, "U0", what), what + ".U0");
    if (j.contains("bound_states")) {
        const Json& bs = j.at("bound_states");
        if (!bs.is_array())
            throw InvalidInput(what + ".bound_states: expected an array");
        for (std::size_t i = 0; i < bs.size(); ++i) {
            const std::string w = what + ".bound_states[" + std::to_string(i) + "]";
            BoundState b;
            b.kappa = number(member(bs[i], "kappa", w), w + ".kappa");
            b.C = matrix_from_json(member(bs[i], "C", w), w + ".C");
            b.multiplicity = bs[i].contains("multiplicity")
                ? integer(bs[i].at("multiplicity"), w + ".multiplicity")
                : 0;
            d.bound_states.push_back(std::move(b));
        }
    }
    if (d.k.size() != d.S.size())
        throw DimensionMismatch(what + ": k and S have different lengths");
    for (const auto& s : d.S)
        if (s.rows() != d.n)
            throw DimensionMismatch(what + ": S dimension differs from n");
    if (d.U0.rows() != d.n)
        throw DimensionMismatch(what + ": U0 dimension differs from n");
    return d;
}

Json model_to_json(const RecoveredModel& m)
{
    Json j;
    j["format"] = "mmscat.recovered_model";
    j["grid"] = grid_to_json(m.grid);
    j["potential"] = {{"kind", "sampled"}, {"x", array(m.potential.x)}, {"v", array(m.potential.V)}};
    j["boundary"] = boundary_to_json(m.U());
    Json est = Json::array();
    for (const auto& e : m.boundary.estimates)
        est.push_back({{"k", e.k}, {"condition", e.condition}, {"U", to_json(e.U)}});
    j["diagnostics"] = {
        {"marchenko_residual_on", m.marchenko_residual_on},
        {"marchenko_residual_off", m.marchenko_residual_off},
        {"marchenko_condition", m.marchenko_condition},
        {"homogeneous_margin_min", m.homogeneous_margin},
        {"margin_flag", m.margin_flag},
        {"F_hermiticity", m.F_hermiticity},
        {"potential_anti_hermitian_residual", m.potential.anti_hermitian_residual},
        {"boundary_spread", m.boundary.spread},
        {"boundary_structure_residual", m.boundary.structure_residual},
        {"boundary_estimates", std::move(est)},
    };
    j["notes"] = m.notes;
    return j;
}

Json conditions_to_json(const ConditionReport& r)
{
    Json bs = Json::array();
    for (const auto& b : r.III.bound_states)
        bs.push_back({{"kappa", b.kappa},
                      {"pass", b.pass},
                      {"min_eigenvalue", b.min_eigenvalue},
                      {"hermiticity", b.hermiticity},
                      {"rank", b.rank},
                      {"message", b.message}});
    return {
        {"pass", r.pass()},
        {"failed", r.failed()},
        {"condition_I",
         {{"pass", r.I.pass},
          {"unitarity", r.I.unitarity},
          {"symmetry", r.I.symmetry},
          {"zero_limit_hermiticity", r.I.zero_limit_hermiticity},
          {"U0_unitarity", r.I.U0_unitarity},
          {"U0_hermiticity", r.I.U0_hermiticity},
          {"decay_slope", r.I.decay_slope},
          {"decay_constant", r.I.decay_constant},
          {"tail", r.I.tail}}},
        {"condition_II",
         {{"pass", r.II.pass},
          {"integral", r.II.integral},
          {"tail_increment", r.II.tail_increment}}},
        {"condition_III", {{"pass", r.III.pass}, {"bound_states", std::move(bs)}}},
        {"notes", r.notes},
    };
}

Json metrics_to_json(const RoundTripMetrics& r)
{
    return {{"potential_error", r.potential_error},
            {"potential_error_relative", r.potential_relative},
            {"potential_sup_error", r.potential_sup},
            {"boundary_error", r.boundary_error},
            {"scattering_error", r.scattering_error},
            {"bound_states", r.bound_states},
            {"bound_states_recovered", r.bound_states_recovered},
            {"kappa_error", r.kappa_error}};
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InvalidInput(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                           ": JSON syntax error");
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InvalidInput(path + ": cannot write file");
    out << text;
    if (!out)
        throw InvalidInput(path + ": write failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string dataset_csv(const ScatteringDataset& d)
{
    std::ostringstream os;
    os << 'k';
    matrix_header(os, "S", d.n);
    os << '\n';
    for (std::size_t i = 0; i < d.k.size(); ++i) {
        os << fmt(d.k[i]);
        matrix_row(os, d.S[i]);
        os << '\n';
    }
    return os.str();
}

std::string model_csv(const RecoveredModel& m)
{
    std::ostringstream os;
    const int n = m.potential.V.empty() ? 0 : int(m.potential.V[0].rows());
    os << 'x';
    matrix_header(os, "V", n);
    os << '\n';
    for (std::size_t i = 0; i < m.potential.x.size(); ++i) {
        os << fmt(m.potential.x[i]);
        matrix_row(os, m.potential.V[i]);
        os << '\n';
    }
    return os.str();
}

std::string potential_comparison_csv(const HermitianPotential& v, const RecoveredModel& m)
{
    std::ostringstream os;
    const int n = v.dim();
    os << 'x';
    matrix_header(os, "V", n);
    matrix_header(os, "Vrec", n);
    os << ",err\n";
    for (std::size_t i = 0; i < m.potential.x.size(); ++i) {
        const ComplexMatrix vi = v(m.potential.x[i]);
        os << fmt(m.potential.x[i]);
        matrix_row(os, vi);
        matrix_row(os, m.potential.V[i]);
        os << ',' << fmt(matrix_norm(ComplexMatrix(vi - m.potential.V[i]))) << '\n';
    }
    return os.str();
}

} // namespace mmscat::io
