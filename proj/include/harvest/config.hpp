#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/calibrate.hpp"
#include "harvest/solver.hpp"

namespace harvest::config {

// Worst-case density export request: distortions are evaluated at (t, n) for
// each listed mu, on a dedicated (finer) quadrature grid.
struct DistortRequest {
    double t = 61.0;
    double n = 5.0;
    std::vector<double> mu_list{0.01, 0.1, std::numeric_limits<double>::infinity()};
    int quad_points = 300;
};

struct FitRequest {
    std::string observations_path;
    calibrate::FitRanges ranges;
};

// Everything a run needs; parsed from one JSON document, flag-overridable.
struct RunConfig {
    growth::GrowthSpec growth{6.8, 0.040, 0.040, 8.0, 205.0};
    growth::DensityKind density_kind = growth::DensityKind::Uniform;
    double beta_a = 0;
    double beta_b = 0;
    int quad_points = 150;
    robust::ObjectiveSpec objective;
    solver::SolveGrid grid{120000, 1000, 10.0, 61.0, 181.0};
    bool override_cfl = false;
    std::vector<std::string> outputs{"value_field", "policy_field"};
    std::vector<double> terminal_values{0.5, 1.0, 2.0, 4.0};
    std::vector<double> initial_values;
    DistortRequest distort;
    std::optional<FitRequest> fit;

    growth::QuadratureGrid make_quad() const;
    growth::HeterogeneityDensity make_density(const growth::QuadratureGrid& quad) const;
};

// Table-driven year presets for the growth model; objective and grid keep
// their defaults.
RunConfig preset(std::string_view year);  // "2021" or "2022"

RunConfig parse_json(const std::string& text);
RunConfig load_file(const std::string& path);

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<Check> checks;
    bool cfl_pass = true;
    bool others_pass = true;
    // The CFL check is the only overridable one.
    bool ok(bool cfl_override) const { return others_pass && (cfl_pass || cfl_override); }
};

ValidationReport validate(const RunConfig& cfg);

}  // namespace harvest::config
