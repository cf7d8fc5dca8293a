#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harvest/config.hpp"
#include "harvest/csv.hpp"
#include "harvest/policy.hpp"
#include "harvest/solver.hpp"

namespace {

namespace fs = std::filesystem;
using namespace harvest;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;
constexpr int kExitNumerical = 5;

struct Options {
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::string out_dir = ".";
    bool override_cfl = false;
    std::optional<int> quad_points;
    std::vector<std::string> mu_list;
    std::vector<double> terminal_values;
};

double parse_mu_flag(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw ConfigError("bad mu value: " + text);
    return value;
}

config::RunConfig build_config(const Options& opt) {
    config::RunConfig cfg;
    if (opt.config_path) cfg = config::load_file(*opt.config_path);
    if (opt.preset) cfg.growth = config::preset(*opt.preset).growth;
    if (opt.override_cfl) cfg.override_cfl = true;
    if (opt.quad_points) {
        cfg.quad_points = *opt.quad_points;
        cfg.distort.quad_points = *opt.quad_points;
    }
    if (!opt.mu_list.empty()) {
        cfg.distort.mu_list.clear();
        for (const std::string& text : opt.mu_list)
            cfg.distort.mu_list.push_back(parse_mu_flag(text));
    }
    if (!opt.terminal_values.empty()) cfg.terminal_values = opt.terminal_values;
    return cfg;
}

void print_report(const config::ValidationReport& report) {
    for (const config::Check& check : report.checks)
        std::cout << "check " << check.name << ": " << (check.pass ? "pass" : "FAIL") << " ("
                  << check.detail << ")\n";
}

// Prints the report; returns false when the run must not proceed.
bool validated(const config::RunConfig& cfg) {
    config::ValidationReport report = config::validate(cfg);
    print_report(report);
    if (report.ok(cfg.override_cfl)) {
        if (!report.cfl_pass)
            std::cerr << "warning: time step exceeds the stability bound; override active\n";
        return true;
    }
    std::cout << "validation: FAIL\n";
    return false;
}

solver::ValueField run_solve(const config::RunConfig& cfg) {
    growth::QuadratureGrid quad = cfg.make_quad();
    growth::HeterogeneityDensity density = cfg.make_density(quad);
    solver::SolveOptions options;
    options.allow_cfl_violation = cfg.override_cfl;
    return solver::solve(cfg.objective, cfg.growth, density, quad, cfg.grid, options);
}

int cmd_validate(const Options& opt) {
    config::RunConfig cfg = build_config(opt);
    config::ValidationReport report = config::validate(cfg);
    print_report(report);
    bool ok = report.ok(cfg.override_cfl);
    std::cout << "validation: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : kExitValidation;
}

int cmd_solve(const Options& opt) {
    config::RunConfig cfg = build_config(opt);
    if (!validated(cfg)) return kExitValidation;
    auto start = std::chrono::steady_clock::now();
    solver::ValueField field = run_solve(cfg);
    double solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                               .count();

    fs::create_directories(opt.out_dir);
    for (const std::string& output : cfg.outputs) {
        fs::path path = fs::path(opt.out_dir) / (output + ".csv");
        if (output == "value_field")
            io::write_value_field_csv(path, field);
        else if (output == "policy_field")
            io::write_policy_field_csv(path, field);
        else
            throw ConfigError("unknown output kind: " + output);
        std::cout << output << ": " << path.string() << "\n";
    }

    double lo = field.values[0], hi = field.values[0];
    for (double v : field.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::cout << "phi_min: " << io::format_double(lo) << "\n";
    std::cout << "phi_max: " << io::format_double(hi) << "\n";
    std::cout << "cfl_bound: " << io::format_double(field.cfl_bound) << "\n";
    std::cout << "cfl_overridden: " << (field.cfl_overridden ? "true" : "false") << "\n";
    std::cout << "solve_seconds: " << solve_seconds << "\n";
    return kExitOk;
}

int cmd_paths(const Options& opt) {
    config::RunConfig cfg = build_config(opt);
    if (!validated(cfg)) return kExitValidation;
    fs::create_directories(opt.out_dir);

    auto emit_backward = [&](const policy::Trajectory& traj, double v) {
        fs::path path = fs::path(opt.out_dir) /
                        ("path_backward_nT=" + io::format_double(v) + ".csv");
        io::write_trajectory_csv(path, traj);
        std::cout << "backward " << io::format_double(v) << ": " << path.string()
                  << (traj.truncated ? " (truncated at the domain cap)" : "") << "\n";
    };

    if (cfg.initial_values.empty()) {
        // Backward-only runs integrate during the sweep and keep two levels.
        growth::QuadratureGrid quad = cfg.make_quad();
        growth::HeterogeneityDensity density = cfg.make_density(quad);
        solver::SolveOptions options;
        options.allow_cfl_violation = cfg.override_cfl;
        std::vector<policy::Trajectory> paths = policy::integrate_backward_streaming(
            cfg.objective, cfg.growth, density, quad, cfg.grid, cfg.terminal_values, options);
        for (size_t p = 0; p < paths.size(); ++p) emit_backward(paths[p], cfg.terminal_values[p]);
        return kExitOk;
    }

    solver::ValueField field = run_solve(cfg);
    for (double v : cfg.terminal_values) emit_backward(policy::integrate_backward(field, v), v);
    for (double v : cfg.initial_values) {
        policy::Trajectory traj = policy::integrate_forward(field, v);
        fs::path path =
            fs::path(opt.out_dir) / ("path_forward_n0=" + io::format_double(v) + ".csv");
        io::write_trajectory_csv(path, traj);
        std::cout << "forward " << io::format_double(v) << ": " << path.string() << " (final n = "
                  << io::format_double(traj.n.back()) << ")\n";
    }
    return kExitOk;
}

int cmd_distort(const Options& opt) {
    config::RunConfig cfg = build_config(opt);
    if (!validated(cfg)) return kExitValidation;

    growth::QuadratureGrid export_quad(cfg.distort.quad_points);
    growth::HeterogeneityDensity export_density = cfg.make_density(export_quad);
    growth::WeightSamples samples =
        growth::sample_weights(cfg.growth, export_quad, cfg.distort.t);

    io::DensityTable table;
    table.u.assign(export_quad.nodes().begin(), export_quad.nodes().end());
    table.p = export_density.weights;
    for (double mu : cfg.distort.mu_list) {
        config::RunConfig variant = cfg;
        variant.objective.mu = mu;
        solver::ValueField field = run_solve(variant);
        int level = static_cast<int>(
            std::lround((cfg.distort.t - cfg.grid.t0) / cfg.grid.dt()));
        level = std::clamp(level, 0, cfg.grid.time_steps);
        double z = policy::gradient_n(field, level, cfg.distort.n);
        robust::DistortionField distortion = robust::worst_case_distortion(
            variant.objective, samples, export_density, export_quad, z);
        std::vector<double> column(distortion.samples.size());
        for (size_t m = 0; m < column.size(); ++m)
            column[m] = distortion.samples[m] * export_density.weights[m];
        table.distorted.emplace_back("p_distorted_mu=" + io::format_double(mu),
                                     std::move(column));
        std::cout << "mu = " << io::format_double(mu) << ": z(" << cfg.distort.t << ", "
                  << cfg.distort.n << ") = " << io::format_double(z) << "\n";
    }
    fs::create_directories(opt.out_dir);
    fs::path path = fs::path(opt.out_dir) / "densities.csv";
    io::write_density_csv(path, table);
    std::cout << "densities: " << path.string() << "\n";
    return kExitOk;
}

int cmd_fit(const Options& opt) {
    config::RunConfig cfg = build_config(opt);
    if (!cfg.fit) throw ConfigError("fit requires a \"fit\" section with an observations path");
    calibrate::ObservationSet obs = io::read_observations_csv(cfg.fit->observations_path);
    growth::QuadratureGrid quad = cfg.make_quad();
    auto start = std::chrono::steady_clock::now();
    calibrate::FitResult result = calibrate::grid_search_fit(obs, cfg.fit->ranges, quad);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(opt.out_dir);
    fs::path path = fs::path(opt.out_dir) / "fit_report.txt";
    io::write_fit_report(path, result);
    std::cout << "fit_report: " << path.string() << "\n";
    std::cout << "best: r = " << io::format_double(result.best.r)
              << ", x = " << io::format_double(result.best.x)
              << ", K_lo = " << io::format_double(result.best.k_lo)
              << ", K_hi = " << io::format_double(result.best.k_hi) << "\n";
    std::cout << "loss: " << io::format_double(result.loss) << " (ties: " << result.ties
              << ", evaluated: " << result.evaluated << ")\n";
    std::cout << "fit_seconds: " << seconds << "\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON run configuration");
    cmd->add_option("--preset", opt.preset, "growth preset year (2021 or 2022)")
        ->check(CLI::IsMember({"2021", "2022"}));
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_flag("--override-cfl", opt.override_cfl,
                  "run even when dt exceeds the stability bound");
    cmd->add_option("--quad-points", opt.quad_points, "quadrature node count");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust harvesting policies for a heterogeneous population"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* validate = app.add_subcommand("validate", "check a configuration");
    add_common(validate, opt);
    CLI::App* solve = app.add_subcommand("solve", "solve the value surface and export it");
    add_common(solve, opt);
    CLI::App* paths = app.add_subcommand("paths", "integrate controlled population paths");
    add_common(paths, opt);
    paths->add_option("--terminal-values", opt.terminal_values,
                      "terminal populations for backward paths")
        ->delimiter(',');
    CLI::App* distort = app.add_subcommand("distort", "export worst-case densities");
    add_common(distort, opt);
    distort->add_option("--mu", opt.mu_list, "uncertainty weights (numbers or inf)")
        ->delimiter(',');
    CLI::App* fit = app.add_subcommand("fit", "calibrate the growth model from observations");
    add_common(fit, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(opt);
        if (solve->parsed()) return cmd_solve(opt);
        if (paths->parsed()) return cmd_paths(opt);
        if (distort->parsed()) return cmd_distort(opt);
        if (fit->parsed()) return cmd_fit(opt);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const CflError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
