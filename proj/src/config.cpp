#include "harvest/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace harvest::config {

namespace {

using nlohmann::json;

double parse_mu(const json& value) {
    if (value.is_string()) {
        if (value.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ConfigError("mu must be a positive number or \"inf\"");
    }
    return value.get<double>();
}

growth::GrowthSpec parse_growth(const json& node) {
    if (node.contains("preset")) return preset(node.at("preset").get<std::string>()).growth;
    growth::GrowthSpec g;
    g.x = node.at("x").get<double>();
    if (node.contains("r")) {
        g.r_lo = g.r_hi = node.at("r").get<double>();
    } else {
        g.r_lo = node.at("r_lo").get<double>();
        g.r_hi = node.at("r_hi").get<double>();
    }
    g.k_lo = node.at("K_lo").get<double>();
    g.k_hi = node.at("K_hi").get<double>();
    return g;
}

robust::PiecewiseLinear parse_piecewise(const json& node) {
    auto knots = node.at("n").get<std::vector<double>>();
    auto values = node.at("value").get<std::vector<double>>();
    return robust::PiecewiseLinear(std::move(knots), std::move(values));
}

robust::PiecewiseLinear parse_terminal_utility(const json& node, double pop_max) {
    std::string kind = node.at("kind").get<std::string>();
    if (kind == "zero") return robust::PiecewiseLinear::zero();
    if (kind == "capped_linear")
        return robust::PiecewiseLinear::capped_linear(node.at("eta").get<double>(), pop_max);
    if (kind == "piecewise_linear") return parse_piecewise(node);
    throw ConfigError("unknown terminal utility kind: " + kind);
}

robust::PiecewiseLinear parse_mortality(const json& node) {
    std::string kind = node.at("kind").get<std::string>();
    if (kind == "constant")
        return robust::PiecewiseLinear::constant(node.at("value").get<double>());
    if (kind == "piecewise_linear") return parse_piecewise(node);
    throw ConfigError("unknown mortality kind: " + kind);
}

std::vector<double> parse_mu_list(const json& node) {
    std::vector<double> list;
    for (const json& item : node) list.push_back(parse_mu(item));
    return list;
}

calibrate::Range parse_range(const json& node) {
    auto triple = node.get<std::vector<double>>();
    if (triple.size() != 3) throw ConfigError("fit range must be [min, max, step]");
    return {triple[0], triple[1], triple[2]};
}

RunConfig parse_document(const json& doc) {
    RunConfig cfg;
    if (doc.contains("growth")) cfg.growth = parse_growth(doc.at("growth"));
    if (doc.contains("density")) {
        const json& d = doc.at("density");
        std::string kind = d.at("kind").get<std::string>();
        if (kind == "uniform") {
            cfg.density_kind = growth::DensityKind::Uniform;
        } else if (kind == "beta") {
            cfg.density_kind = growth::DensityKind::Beta;
            cfg.beta_a = d.at("a").get<double>();
            cfg.beta_b = d.at("b").get<double>();
        } else {
            throw ConfigError("unknown density kind: " + kind);
        }
    }
    if (doc.contains("quad_points")) cfg.quad_points = doc.at("quad_points").get<int>();

    bool auto_steps = false;
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (g.contains("I")) {
            if (g.at("I").is_string() && g.at("I").get<std::string>() == "auto")
                auto_steps = true;
            else
                cfg.grid.time_steps = g.at("I").get<int>();
        }
        if (g.contains("J")) cfg.grid.pop_steps = g.at("J").get<int>();
        if (g.contains("M")) cfg.grid.pop_max = g.at("M").get<double>();
        if (g.contains("t0")) cfg.grid.t0 = g.at("t0").get<double>();
        if (g.contains("t1")) cfg.grid.t1 = g.at("t1").get<double>();
    }

    if (doc.contains("objective")) {
        const json& o = doc.at("objective");
        if (o.contains("alpha")) cfg.objective.alpha = o.at("alpha").get<double>();
        if (o.contains("gamma")) cfg.objective.gamma = o.at("gamma").get<double>();
        if (o.contains("mu")) cfg.objective.mu = parse_mu(o.at("mu"));
        if (o.contains("c_bar")) cfg.objective.c_bar = o.at("c_bar").get<double>();
        if (o.contains("h"))
            cfg.objective.h = parse_terminal_utility(o.at("h"), cfg.grid.pop_max);
        if (o.contains("mortality")) cfg.objective.mortality = parse_mortality(o.at("mortality"));
    }

    if (doc.contains("run")) {
        const json& r = doc.at("run");
        if (r.contains("override_cfl")) cfg.override_cfl = r.at("override_cfl").get<bool>();
        if (r.contains("outputs")) cfg.outputs = r.at("outputs").get<std::vector<std::string>>();
        if (r.contains("terminal_values"))
            cfg.terminal_values = r.at("terminal_values").get<std::vector<double>>();
        if (r.contains("initial_values"))
            cfg.initial_values = r.at("initial_values").get<std::vector<double>>();
        if (r.contains("distort")) {
            const json& d = r.at("distort");
            if (d.contains("t")) cfg.distort.t = d.at("t").get<double>();
            if (d.contains("n")) cfg.distort.n = d.at("n").get<double>();
            if (d.contains("mu")) cfg.distort.mu_list = parse_mu_list(d.at("mu"));
            if (d.contains("quad_points"))
                cfg.distort.quad_points = d.at("quad_points").get<int>();
        }
    }

    if (doc.contains("fit")) {
        const json& f = doc.at("fit");
        FitRequest fit;
        fit.observations_path = f.at("observations").get<std::string>();
        if (f.contains("ranges")) {
            const json& rg = f.at("ranges");
            if (rg.contains("r")) fit.ranges.r = parse_range(rg.at("r"));
            if (rg.contains("x")) fit.ranges.x = parse_range(rg.at("x"));
            if (rg.contains("k_lo")) fit.ranges.k_lo = parse_range(rg.at("k_lo"));
            if (rg.contains("k_hi")) fit.ranges.k_hi = parse_range(rg.at("k_hi"));
            if (rg.contains("k_gap")) fit.ranges.k_gap = rg.at("k_gap").get<double>();
        }
        cfg.fit = std::move(fit);
    }

    if (auto_steps) {
        solver::SolveGrid probe = cfg.grid;
        probe.time_steps = 1;
        double bound = solver::cfl_max_dt(probe, cfg.objective, cfg.growth);
        cfg.grid.time_steps =
            static_cast<int>(std::ceil((cfg.grid.t1 - cfg.grid.t0) / (0.9 * bound)));
    }
    return cfg;
}

}  // namespace

growth::QuadratureGrid RunConfig::make_quad() const { return growth::QuadratureGrid(quad_points); }

growth::HeterogeneityDensity RunConfig::make_density(const growth::QuadratureGrid& quad) const {
    return growth::density_weights(density_kind, quad, beta_a, beta_b);
}

RunConfig preset(std::string_view year) {
    RunConfig cfg;
    if (year == "2021") {
        cfg.growth = {6.8, 0.040, 0.040, 8.0, 205.0};
    } else if (year == "2022") {
        cfg.growth = {12.8, 0.027, 0.027, 53.0, 149.0};
    } else {
        throw ConfigError("unknown preset year: " + std::string(year));
    }
    return cfg;
}

RunConfig parse_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    try {
        return parse_document(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

RunConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_json(buffer.str());
}

namespace {

std::string num(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

ValidationReport validate(const RunConfig& cfg) {
    ValidationReport report;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
        if (name == "cfl")
            report.cfl_pass = pass;
        else
            report.others_pass = report.others_pass && pass;
    };

    const growth::GrowthSpec& g = cfg.growth;
    bool growth_ok = g.x > 0.0 && g.x <= g.k_lo && g.r_lo > 0.0 && g.r_lo <= g.r_hi &&
                     g.k_lo > 0.0 && g.k_lo <= g.k_hi;
    add("growth_bounds", growth_ok,
        "x = " + num(g.x) + ", r = [" + num(g.r_lo) + ", " + num(g.r_hi) + "], K = [" +
            num(g.k_lo) + ", " + num(g.k_hi) + "], requires 0 < x <= K(0) and ordered bounds");

    const robust::ObjectiveSpec& o = cfg.objective;
    bool weights_ok = o.alpha >= 0.0 && std::isfinite(o.alpha) && o.gamma > 0.0 && o.mu > 0.0;
    add("objective_weights", weights_ok,
        "alpha = " + num(o.alpha) + ", gamma = " + num(o.gamma) + ", mu = " + num(o.mu));

    double needed = o.alpha * o.alpha / (4.0 * o.gamma * o.gamma) * g.k_hi;
    double cap = o.harvest_cap(g);
    add("harvest_cap", needed <= cap,
        "alpha^2 K(1)/(4 gamma^2) = " + num(needed) + ", c_bar = " + num(cap));

    bool h_ok = o.h(0.0) == 0.0 && o.h.nondecreasing() && std::isfinite(o.h.max_value()) &&
                o.h.max_value() >= 0.0;
    add("terminal_utility", h_ok, "h(0) = " + num(o.h(0.0)) + ", max h = " + num(o.h.max_value()));

    add("mortality", o.mortality.positive() && o.mortality.nondecreasing(),
        "R(0) = " + num(o.mortality(0.0)) + ", R(M) = " + num(o.mortality(cfg.grid.pop_max)));

    bool grid_ok = cfg.grid.time_steps >= 1 && cfg.grid.pop_steps >= 1 &&
                   cfg.grid.pop_max > 0.0 && cfg.grid.t0 >= 0.0 && cfg.grid.t1 > cfg.grid.t0;
    add("grid", grid_ok,
        "I = " + std::to_string(cfg.grid.time_steps) + ", J = " +
            std::to_string(cfg.grid.pop_steps) + ", M = " + num(cfg.grid.pop_max) +
            ", window = [" + num(cfg.grid.t0) + ", " + num(cfg.grid.t1) + "]");

    if (growth_ok && weights_ok && grid_ok) {
        double bound = solver::cfl_max_dt(cfg.grid, o, g);
        double dt = cfg.grid.dt();
        add("cfl", dt <= bound, "dt = " + num(dt) + ", bound = " + num(bound));
    } else {
        add("cfl", false, "skipped: prerequisite checks failed");
    }
    return report;
}

}  // namespace harvest::config
