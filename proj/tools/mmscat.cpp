#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mmscat/io.hpp"

using namespace mmscat;
using io::Json;

namespace {

constexpr const char* version = "1.0.0";

enum Exit { ok = 0, solver_error = 1, validation_failure = 2, usage_error = 64 };

struct GridOverrides {
    std::optional<double> k_max, x_max, tol_rank, tol_tail;
    std::optional<int> n_k, n_x;

    void add(CLI::App* cmd, bool k_options)
    {
        if (k_options) {
            cmd->add_option("--kmax", k_max, "wavenumber cutoff K_max")->check(CLI::PositiveNumber);
            cmd->add_option("--nk", n_k, "number of k samples")->check(CLI::Range(2, 1 << 24));
        }
        cmd->add_option("--xmax", x_max, "spatial cutoff X_max")->check(CLI::PositiveNumber);
        cmd->add_option("--nx", n_x, "number of x samples")->check(CLI::Range(2, 1 << 24));
        cmd->add_option("--tol", tol_rank, "relative numerical-rank threshold")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--tol-tail", tol_tail, "truncation tolerance")->check(CLI::PositiveNumber);
    }

    GridSpec apply(GridSpec g) const
    {
        if (k_max)
            g.k_max = *k_max;
        if (n_k)
            g.n_k = *n_k;
        if (x_max)
            g.x_max = *x_max;
        if (n_x)
            g.n_x = *n_x;
        if (tol_rank)
            g.tol_rank = *tol_rank;
        if (tol_tail)
            g.tol_tail = *tol_tail;
        g.validate();
        return g;
    }
};

struct Thresholds {
    double potential = 0.05;
    double boundary = 1e-3;
    double scattering = 1e-3;
};

Json options_json(const DirectOptions& d, const InverseOptions* inv, const ValidationTolerances& v)
{
    Json o;
    o["ode"] = {{"rtol", d.ode.rtol},
                {"atol", d.ode.atol},
                {"max_step", d.ode.max_step},
                {"max_steps", d.ode.max_steps}};
    o["bound_state_search"] = {{"kappa_max", d.search.kappa_max},
                               {"scan_samples", d.search.scan_samples},
                               {"refine_tol", d.search.refine_tol}};
    if (inv) {
        o["fourier"] = {{"tail_order", inv->fourier.tail_order},
                        {"cubic_panels", inv->fourier.cubic_panels},
                        {"tail_limit", inv->fourier.tail_limit}};
        o["marchenko"] = {
            {"rule", inv->marchenko.rule == Quadrature::gregory ? "gregory" : "trapezoid"},
            {"cond_limit", inv->marchenko.cond_limit},
            {"residual_rows", inv->marchenko.residual_rows},
            {"margin_threshold", inv->marchenko.margin_threshold}};
        Json ks = Json::array();
        for (double k : inv->k_samples)
            ks.push_back(k);
        o["boundary_k_samples"] = ks.empty() ? Json("default") : ks;
    }
    o["validation"] = {{"unitarity", v.unitarity},
                       {"symmetry", v.symmetry},
                       {"decay_slope", v.decay_slope},
                       {"decay_floor", v.decay_floor},
                       {"tail_fraction", v.tail_fraction},
                       {"tail_floor", v.tail_floor},
                       {"hermiticity", v.hermiticity}};
    return o;
}

Json header(const std::string& command, const Json& inputs, const GridSpec& grid,
            const Json& options)
{
    return {{"tool", "mmscat"},
            {"version", version},
            {"command", command},
            {"inputs", inputs},
            {"grid", io::grid_to_json(grid)},
            {"options", options}};
}

std::string csv_path(const std::string& out, const std::string& given)
{
    if (!given.empty())
        return given;
    return std::filesystem::path(out).replace_extension(".csv").string();
}

void report_conditions(const ConditionReport& r, const std::string& what)
{
    std::string failed;
    for (const auto& f : r.failed())
        failed += (failed.empty() ? "" : ", ") + f;
    std::cerr << what << ": conditions failed: (" << failed << ")\n";
    for (const auto& b : r.III.bound_states)
        if (!b.pass)
            std::cerr << "  (III) kappa = " << b.kappa << ": " << b.message << "\n";
    for (const auto& n : r.notes)
        std::cerr << "  " << n << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Direct and inverse scattering for the matrix Schrodinger operator on the half line"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    DirectOptions direct_opt;
    InverseOptions inverse_opt;
    ValidationTolerances tol;
    Thresholds thresholds;

    std::string potential_path, boundary_path, data_path, out_path, csv;
    bool force = false;

    auto* direct = app.add_subcommand("direct", "potential + boundary matrix -> scattering data");
    direct->add_option("--potential", potential_path, "potential JSON")->required()->check(CLI::ExistingFile);
    direct->add_option("--boundary", boundary_path, "boundary JSON")->required()->check(CLI::ExistingFile);
    direct->add_option("--out", out_path, "scattering data JSON to write")->required();
    direct->add_option("--csv", csv, "plot data (default: --out with .csv)");
    direct->add_option("--kappa-max", direct_opt.search.kappa_max, "bound-state search bound (0: automatic)")
        ->check(CLI::NonNegativeNumber);
    GridOverrides direct_grid;
    direct_grid.add(direct, true);

    auto* inverse = app.add_subcommand("inverse", "scattering data -> potential + boundary matrix");
    inverse->add_option("--data", data_path, "scattering data JSON")->required()->check(CLI::ExistingFile);
    inverse->add_option("--out", out_path, "recovered model JSON to write")->required();
    inverse->add_option("--csv", csv, "plot data (default: --out with .csv)");
    inverse->add_flag("--force", force, "run even when conditions (I)-(III) fail");
    inverse->add_option("--k-samples", inverse_opt.k_samples, "wavenumbers used to recover U");
    GridOverrides inverse_grid;
    inverse_grid.add(inverse, false);

    auto* roundtrip = app.add_subcommand("roundtrip", "direct, inverse and comparison");
    roundtrip->add_option("--potential", potential_path, "potential JSON")->required()->check(CLI::ExistingFile);
    roundtrip->add_option("--boundary", boundary_path, "boundary JSON")->required()->check(CLI::ExistingFile);
    roundtrip->add_option("--out", out_path, "report JSON to write")->required();
    roundtrip->add_option("--csv", csv, "plot data (default: --out with .csv)");
    roundtrip->add_option("--max-potential-error", thresholds.potential, "weighted-L1 potential error bound")
        ->capture_default_str();
    roundtrip->add_option("--max-boundary-error", thresholds.boundary, "||U - U_rec|| bound")
        ->capture_default_str();
    roundtrip->add_option("--max-scattering-error", thresholds.scattering, "max_k ||S - S_rec|| bound")
        ->capture_default_str();
    GridOverrides roundtrip_grid;
    roundtrip_grid.add(roundtrip, true);

    auto* validate = app.add_subcommand("validate", "check conditions (I)-(III) on scattering data");
    validate->add_option("--data", data_path, "scattering data JSON")->required()->check(CLI::ExistingFile);
    validate->add_option("--out", out_path, "report JSON to write (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (*direct) {
            const auto v = io::potential_from_json(io::read_json_file(potential_path));
            const auto U = io::boundary_from_json(io::read_json_file(boundary_path));
            const GridSpec grid = direct_grid.apply(GridSpec{});
            const auto data = scattering_dataset(v, boundary_pair(U), grid, direct_opt);
            const auto cond = check_conditions(data, tol);

            Json out;
            out["header"] = header("direct", {{"potential", potential_path}, {"boundary", boundary_path}},
                                   grid, options_json(direct_opt, nullptr, tol));
            Json body = io::dataset_to_json(data);
            for (auto& [key, value] : body.items())
                out[key] = value;
            out["conditions"] = io::conditions_to_json(cond);
            io::write_text_file(out_path, io::dump(out));
            io::write_text_file(csv_path(out_path, csv), io::dataset_csv(data));
            std::cout << "direct: n = " << data.n << ", " << data.bound_states.size()
                      << " bound state(s), conditions " << (cond.pass() ? "pass" : "FAIL") << "\n";
            if (!cond.pass()) {
                report_conditions(cond, "direct");
                return validation_failure;
            }
            return ok;
        }

        if (*inverse) {
            const auto data = io::dataset_from_json(io::read_json_file(data_path));
            const GridSpec grid = inverse_grid.apply(data.grid);
            const auto cond = check_conditions(data, tol);
            if (!cond.pass()) {
                report_conditions(cond, "inverse");
                if (!force) {
                    std::cerr << "ConditionsFailed: rerun with --force to invert anyway\n";
                    return validation_failure;
                }
            }
            const auto model = run_inverse(data, grid, inverse_opt);

            Json out;
            out["header"] = header("inverse", {{"data", data_path}, {"force", force}}, grid,
                                   options_json(direct_opt, &inverse_opt, tol));
            Json body = io::model_to_json(model);
            for (auto& [key, value] : body.items())
                out[key] = value;
            out["conditions"] = io::conditions_to_json(cond);
            io::write_text_file(out_path, io::dump(out));
            io::write_text_file(csv_path(out_path, csv), io::model_csv(model));
            std::cout << "inverse: " << model.potential.x.size() << " potential samples, margin "
                      << model.homogeneous_margin << ", residual "
                      << std::max(model.marchenko_residual_on, model.marchenko_residual_off) << "\n";
            return ok;
        }

        if (*roundtrip) {
            const auto v = io::potential_from_json(io::read_json_file(potential_path));
            const auto U = io::boundary_from_json(io::read_json_file(boundary_path));
            const GridSpec grid = roundtrip_grid.apply(GridSpec{});
            const auto data = scattering_dataset(v, boundary_pair(U), grid, direct_opt);
            const auto cond = check_conditions(data, tol);
            const auto model = run_inverse(data, grid, inverse_opt);
            const auto metrics = roundtrip_report(v, U, data, model, direct_opt);
            const bool pass = cond.pass() && metrics.potential_error <= thresholds.potential &&
                              metrics.boundary_error <= thresholds.boundary &&
                              metrics.scattering_error <= thresholds.scattering;

            Json opts = options_json(direct_opt, &inverse_opt, tol);
            opts["thresholds"] = {{"potential", thresholds.potential},
                                  {"boundary", thresholds.boundary},
                                  {"scattering", thresholds.scattering}};
            Json out;
            out["header"] = header("roundtrip", {{"potential", potential_path}, {"boundary", boundary_path}},
                                   grid, opts);
            out["pass"] = pass;
            out["metrics"] = io::metrics_to_json(metrics);
            out["conditions"] = io::conditions_to_json(cond);
            out["original"] = {{"potential", io::potential_to_json(v)},
                               {"boundary", io::boundary_to_json(U)},
                               {"U0", io::to_json(data.U0)},
                               {"bound_states", io::dataset_to_json(data)["bound_states"]}};
            out["recovered"] = io::model_to_json(model);
            io::write_text_file(out_path, io::dump(out));
            io::write_text_file(csv_path(out_path, csv), io::potential_comparison_csv(v, model));
            std::cout << "roundtrip: potential error " << metrics.potential_error
                      << ", boundary error " << metrics.boundary_error << ", scattering error "
                      << metrics.scattering_error << ", " << (pass ? "pass" : "FAIL") << "\n";
            if (!pass && !cond.pass())
                report_conditions(cond, "roundtrip");
            return pass ? ok : validation_failure;
        }

        if (*validate) {
            const auto data = io::dataset_from_json(io::read_json_file(data_path));
            const auto cond = check_conditions(data, tol);
            Json out;
            out["header"] = header("validate", {{"data", data_path}}, data.grid,
                                   options_json(direct_opt, nullptr, tol));
            out["conditions"] = io::conditions_to_json(cond);
            if (out_path.empty())
                std::cout << io::dump(out);
            else
                io::write_text_file(out_path, io::dump(out));
            if (!cond.pass()) {
                report_conditions(cond, "validate");
                return validation_failure;
            }
            return ok;
        }
    } catch (const InvalidInput& e) {
        std::cerr << e.what() << "\n";
        return usage_error;
    } catch (const NonUnitary& e) {
        std::cerr << e.what() << "\n";
        return usage_error;
    } catch (const DimensionMismatch& e) {
        std::cerr << e.what() << "\n";
        return usage_error;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return solver_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solver_error;
    }
    return usage_error;
}
