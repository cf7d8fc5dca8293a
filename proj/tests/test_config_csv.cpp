#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "harvest/config.hpp"
#include "harvest/csv.hpp"

using namespace harvest;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "harvest_io_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("presets carry the fitted year parameters") {
    config::RunConfig y2021 = config::preset("2021");
    CHECK(y2021.growth.x == 6.8);
    CHECK(y2021.growth.r_lo == 0.040);
    CHECK(y2021.growth.k_lo == 8.0);
    CHECK(y2021.growth.k_hi == 205.0);
    config::RunConfig y2022 = config::preset("2022");
    CHECK(y2022.growth.x == 12.8);
    CHECK(y2022.growth.r_lo == 0.027);
    CHECK(y2022.growth.k_lo == 53.0);
    CHECK(y2022.growth.k_hi == 149.0);
    CHECK_THROWS_AS(config::preset("2020"), ConfigError);

    CHECK(y2021.grid.time_steps == 120000);
    CHECK(y2021.grid.pop_steps == 1000);
    CHECK(y2021.grid.pop_max == 10.0);
    CHECK(y2021.grid.t0 == 61.0);
    CHECK(y2021.grid.t1 == 181.0);
    CHECK(y2021.objective.alpha == 0.05);
    CHECK(y2021.objective.gamma == 0.1);
    CHECK(y2021.objective.mu == 0.01);
    CHECK(y2021.objective.mortality(3.0) == 0.01);
}

TEST_CASE("json parsing covers the whole schema") {
    std::string text = R"({
        "growth": {"x": 9.0, "r": 0.03, "K_lo": 40, "K_hi": 90},
        "density": {"kind": "beta", "a": 2, "b": 5},
        "quad_points": 80,
        "objective": {
            "alpha": 0.04, "gamma": 0.2, "mu": "inf", "c_bar": 5.5,
            "h": {"kind": "capped_linear", "eta": 1.5},
            "mortality": {"kind": "constant", "value": 0.02}
        },
        "grid": {"I": 500, "J": 40, "M": 8, "t0": 10, "t1": 40},
        "run": {
            "override_cfl": true,
            "outputs": ["value_field"],
            "terminal_values": [1, 3],
            "initial_values": [2],
            "distort": {"t": 12, "n": 4, "mu": [0.5, "inf"], "quad_points": 120}
        },
        "fit": {"observations": "obs.csv",
                "ranges": {"r": [0.02, 0.04, 0.01], "k_gap": 2}}
    })";
    config::RunConfig cfg = config::parse_json(text);
    CHECK(cfg.growth.x == 9.0);
    CHECK(cfg.growth.r_lo == 0.03);
    CHECK(cfg.growth.r_hi == 0.03);
    CHECK(cfg.density_kind == growth::DensityKind::Beta);
    CHECK(cfg.beta_a == 2.0);
    CHECK(cfg.quad_points == 80);
    CHECK(std::isinf(cfg.objective.mu));
    CHECK(cfg.objective.c_bar.value() == 5.5);
    CHECK(cfg.objective.h(8.0) == 12.0);
    CHECK(cfg.objective.h(20.0) == 12.0);
    CHECK(cfg.objective.mortality(1.0) == 0.02);
    CHECK(cfg.grid.time_steps == 500);
    CHECK(cfg.grid.pop_max == 8.0);
    CHECK(cfg.override_cfl);
    CHECK(cfg.outputs == std::vector<std::string>{"value_field"});
    CHECK(cfg.terminal_values == std::vector<double>{1.0, 3.0});
    CHECK(cfg.initial_values == std::vector<double>{2.0});
    CHECK(cfg.distort.t == 12.0);
    CHECK(cfg.distort.mu_list.size() == 2);
    CHECK(std::isinf(cfg.distort.mu_list[1]));
    CHECK(cfg.distort.quad_points == 120);
    REQUIRE(cfg.fit.has_value());
    CHECK(cfg.fit->observations_path == "obs.csv");
    CHECK(cfg.fit->ranges.r.step == 0.01);
    CHECK(cfg.fit->ranges.k_gap == 2.0);
    CHECK(cfg.fit->ranges.x.count() == 11);  // untouched default

    CHECK_THROWS_AS(config::parse_json("{ not json"), ConfigError);
    CHECK_THROWS_AS(config::parse_json(R"({"density": {"kind": "gamma"}})"), ConfigError);
    CHECK_THROWS_AS(config::parse_json(R"({"objective": {"mu": "huge"}})"), ConfigError);
}

TEST_CASE("auto time steps land just inside the stability bound") {
    std::string text = R"({
        "growth": {"preset": "2021"},
        "grid": {"I": "auto", "J": 200, "M": 10, "t0": 61, "t1": 181}
    })";
    config::RunConfig cfg = config::parse_json(text);
    double bound = solver::cfl_max_dt(cfg.grid, cfg.objective, cfg.growth);
    CHECK(cfg.grid.dt() <= bound);
    CHECK(cfg.grid.dt() > 0.8 * bound);
}

TEST_CASE("validation reproduces the preset stability arithmetic") {
    config::RunConfig cfg = config::preset("2022");
    config::ValidationReport report = config::validate(cfg);
    CHECK(report.cfl_pass);  // dt = 1e-3 <= 1.0624e-3
    CHECK(report.others_pass);
    CHECK(report.ok(false));

    config::RunConfig tight = config::preset("2021");
    report = config::validate(tight);
    CHECK(!report.cfl_pass);  // dt = 1e-3 > 7.745e-4
    CHECK(report.others_pass);
    CHECK(!report.ok(false));
    CHECK(report.ok(true));
    bool found = false;
    for (const config::Check& check : report.checks)
        if (check.name == "cfl") {
            found = true;
            CHECK(!check.pass);
            CHECK(check.detail.find("0.0007744433688") != std::string::npos);
        }
    CHECK(found);

    config::RunConfig capped = config::preset("2021");
    capped.objective.c_bar = 1.0;  // needs at least 12.8125
    report = config::validate(capped);
    CHECK(!report.others_pass);
    for (const config::Check& check : report.checks)
        if (check.name == "harvest_cap") {
            CHECK(!check.pass);
            CHECK(check.detail.find("12.8125") != std::string::npos);
        }
}

TEST_CASE("doubles round-trip through the shortest formatter") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
    std::uniform_int_distribution<int> exponent(-300, 300);
    for (int k = 0; k < 2000; ++k) {
        double value = std::ldexp(mantissa(rng), exponent(rng));
        std::string text = io::format_double(value);
        CHECK(std::strtod(text.c_str(), nullptr) == value);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("atomic writes leave no temporary behind") {
    fs::path dir = temp_dir();
    fs::path target = dir / "atomic.txt";
    io::atomic_write_text(target, "payload\n");
    CHECK(slurp(target) == "payload\n");
    CHECK(!fs::exists(target.string() + ".tmp"));
}

TEST_CASE("observation files parse and reject malformed rows") {
    fs::path dir = temp_dir();
    fs::path good = dir / "obs_good.csv";
    io::atomic_write_text(good, "t,w\n0,6.8\n30,25.5\n61.5,48\n");
    calibrate::ObservationSet obs = io::read_observations_csv(good);
    REQUIRE(obs.records.size() == 3);
    CHECK(obs.records[1].t == 30.0);
    CHECK(obs.records[1].w == 25.5);

    fs::path missing_header = dir / "obs_header.csv";
    io::atomic_write_text(missing_header, "0,6.8\n");
    CHECK_THROWS_AS(io::read_observations_csv(missing_header), ConfigError);

    fs::path bad_number = dir / "obs_bad.csv";
    io::atomic_write_text(bad_number, "t,w\n0,abc\n");
    CHECK_THROWS_AS(io::read_observations_csv(bad_number), ConfigError);

    fs::path negative = dir / "obs_neg.csv";
    io::atomic_write_text(negative, "t,w\n-3,10\n");
    CHECK_THROWS_AS(io::read_observations_csv(negative), InputError);

    CHECK_THROWS_AS(io::read_observations_csv(dir / "no_such_file.csv"), IoError);
}

TEST_CASE("trajectory and density tables serialize with stable headers") {
    fs::path dir = temp_dir();

    policy::Trajectory traj;
    traj.t = {61.0, 61.5};
    traj.n = {2.0, 1.9};
    traj.c = {0.1, 0.09};
    traj.z = {0.5, 0.55};
    traj.xbar = {30.0, 31.0};
    fs::path tpath = dir / "traj.csv";
    io::write_trajectory_csv(tpath, traj);
    std::string text = slurp(tpath);
    CHECK(text.find("t,n,c,z,xbar_distorted\n") == 0);
    CHECK(text.find("61.5,1.9,0.09,0.55,31\n") != std::string::npos);

    io::DensityTable table;
    table.u = {0.25, 0.75};
    table.p = {1.0, 1.0};
    table.distorted.emplace_back("p_distorted_mu=inf", std::vector<double>{1.0, 1.0});
    fs::path dpath = dir / "density.csv";
    io::write_density_csv(dpath, table);
    text = slurp(dpath);
    CHECK(text.find("u,p,p_distorted_mu=inf\n") == 0);
    CHECK(text.find("0.25,1,1\n") != std::string::npos);

    calibrate::FitResult result;
    result.best = {0.03, 10.0, 50.0, 150.0};
    result.loss = 0.0;
    result.ties = 1;
    result.evaluated = 14641;
    fs::path fpath = dir / "fit.txt";
    io::write_fit_report(fpath, result);
    text = slurp(fpath);
    CHECK(text.find("r: 0.03\n") == 0);
    CHECK(text.find("ties: 1\n") != std::string::npos);
    CHECK(text.find("candidates_evaluated: 14641\n") != std::string::npos);
}
