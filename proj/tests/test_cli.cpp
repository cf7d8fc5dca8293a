#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/calibrate.hpp"
#include "harvest/csv.hpp"

using namespace harvest;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "harvest_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const std::string& args) {
    fs::path log = work_dir() / "last_run.log";
    std::string cmd =
        std::string(HARVEST_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(log)};
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::path path = work_dir() / name;
    io::atomic_write_text(path, text);
    return path;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) parts.push_back(item);
    return parts;
}

const std::string kSmallDriftConfig = R"({
    "growth": {"preset": "2021"},
    "objective": {"alpha": 0.0, "mu": 0.01, "h": {"kind": "zero"}},
    "grid": {"I": 1200, "J": 10, "M": 10, "t0": 61, "t1": 181},
    "run": {"outputs": ["value_field", "policy_field"], "initial_values": [1],
            "terminal_values": []}
})";

}  // namespace

TEST_CASE("validate reflects the preset stability margins in its exit code") {
    CHECK(run_cli("validate --preset 2022").exit_code == 0);

    RunResult tight = run_cli("validate --preset 2021");
    CHECK(tight.exit_code == 3);
    CHECK(tight.output.find("check cfl: FAIL") != std::string::npos);
    CHECK(tight.output.find("0.0007744433688") != std::string::npos);

    CHECK(run_cli("validate --preset 2021 --override-cfl").exit_code == 0);
}

TEST_CASE("solve refuses an unstable grid without the override") {
    fs::path cfg = write_config("unstable.json", R"({
        "growth": {"preset": "2021"},
        "grid": {"I": 100, "J": 200, "M": 10, "t0": 61, "t1": 181}
    })");
    fs::path out = work_dir() / "unstable_out";
    RunResult run = run_cli("solve --config " + cfg.string() + " --out-dir " + out.string());
    CHECK(run.exit_code == 3);
    CHECK(run.output.find("validation: FAIL") != std::string::npos);
}

TEST_CASE("zero-utility solve writes an all-zero field, byte-stable across reruns") {
    fs::path cfg = write_config("drift.json", kSmallDriftConfig);
    fs::path out1 = work_dir() / "drift_run1";
    fs::path out2 = work_dir() / "drift_run2";
    REQUIRE(run_cli("solve --config " + cfg.string() + " --out-dir " + out1.string())
                .exit_code == 0);
    REQUIRE(run_cli("solve --config " + cfg.string() + " --out-dir " + out2.string())
                .exit_code == 0);

    std::string field = slurp(out1 / "value_field.csv");
    std::vector<std::string> lines = split(field, '\n');
    CHECK(lines[0] == "i,j,t,n,phi");
    for (size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        std::vector<std::string> cells = split(lines[k], ',');
        REQUIRE(cells.size() == 5);
        CHECK(cells[4] == "0");
    }

    CHECK(slurp(out1 / "value_field.csv") == slurp(out2 / "value_field.csv"));
    CHECK(slurp(out1 / "policy_field.csv") == slurp(out2 / "policy_field.csv"));
}

TEST_CASE("paths command reproduces the harvest-free exponential decay") {
    fs::path cfg = write_config("drift_paths.json", kSmallDriftConfig);
    fs::path out = work_dir() / "paths_out";
    RunResult run = run_cli("paths --config " + cfg.string() + " --out-dir " + out.string());
    REQUIRE(run.exit_code == 0);
    std::vector<std::string> lines = split(slurp(out / "path_forward_n0=1.csv"), '\n');
    CHECK(lines[0] == "t,n,c,z,xbar_distorted");
    std::string last;
    for (size_t k = lines.size(); k-- > 1;)
        if (!lines[k].empty()) {
            last = lines[k];
            break;
        }
    std::vector<std::string> cells = split(last, ',');
    REQUIRE(cells.size() == 5);
    CHECK(std::stod(cells[0]) == 181.0);
    CHECK(std::stod(cells[1]) == doctest::Approx(0.3012).epsilon(4e-3));
}

TEST_CASE("backward-only paths use the rolling sweep and match the stored-field run") {
    std::string base = R"({
        "growth": {"preset": "2021"},
        "objective": {"mu": 0.01, "h": {"kind": "capped_linear", "eta": 1.5}},
        "grid": {"I": "auto", "J": 30, "M": 10, "t0": 61, "t1": 91},
        "run": {"terminal_values": [0.5, 2])";
    fs::path rolling_cfg = write_config("paths_rolling.json", base + R"(, "initial_values": []}})");
    fs::path stored_cfg = write_config("paths_stored.json", base + R"(, "initial_values": [1]}})");
    fs::path out_rolling = work_dir() / "paths_rolling";
    fs::path out_stored = work_dir() / "paths_stored";
    REQUIRE(run_cli("paths --config " + rolling_cfg.string() + " --out-dir " +
                    out_rolling.string())
                .exit_code == 0);
    REQUIRE(run_cli("paths --config " + stored_cfg.string() + " --out-dir " +
                    out_stored.string())
                .exit_code == 0);
    for (const char* name : {"path_backward_nT=0.5.csv", "path_backward_nT=2.csv"})
        CHECK(slurp(out_rolling / name) == slurp(out_stored / name));
    CHECK(fs::exists(out_stored / "path_forward_n0=1.csv"));
    CHECK(!fs::exists(out_rolling / "path_forward_n0=1.csv"));
}

TEST_CASE("distort exports one density column per mu with the inf column undistorted") {
    fs::path cfg = write_config("distort.json", R"({
        "growth": {"preset": "2021"},
        "density": {"kind": "beta", "a": 2, "b": 2},
        "grid": {"I": "auto", "J": 40, "M": 10, "t0": 61, "t1": 181},
        "run": {"distort": {"t": 61, "n": 5, "mu": [0.01, 0.1, "inf"], "quad_points": 300}}
    })");
    fs::path out = work_dir() / "distort_out";
    RunResult run = run_cli("distort --config " + cfg.string() + " --out-dir " + out.string());
    REQUIRE(run.exit_code == 0);

    std::vector<std::string> lines = split(slurp(out / "densities.csv"), '\n');
    CHECK(lines[0] == "u,p,p_distorted_mu=0.01,p_distorted_mu=0.1,p_distorted_mu=inf");
    size_t rows = 0;
    for (size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        std::vector<std::string> cells = split(lines[k], ',');
        REQUIRE(cells.size() == 5);
        CHECK(cells[4] == cells[1]);  // no uncertainty aversion, no distortion
        ++rows;
    }
    CHECK(rows == 300);
}

TEST_CASE("fit recovers a synthetic generator through the full pipeline") {
    growth::QuadratureGrid quad(150);
    calibrate::Candidate truth{0.030, 10.0, 50.0, 150.0};
    std::string obs_text = "t,w\n";
    for (int k = 0; k < 20; ++k) {
        double t = 6.0 * k;
        obs_text += io::format_double(t) + "," +
                    io::format_double(calibrate::theoretical_moments(truth, quad, t).mean) +
                    "\n";
    }
    fs::path obs = work_dir() / "obs.csv";
    io::atomic_write_text(obs, obs_text);

    fs::path cfg = write_config("fit.json", R"({
        "fit": {"observations": ")" + obs.string() + R"(",
                "ranges": {"r": [0.028, 0.032, 0.001], "x": [8, 12, 1],
                           "k_lo": [48, 52, 1], "k_hi": [148, 152, 1]}}
    })");
    fs::path out = work_dir() / "fit_out";
    RunResult run = run_cli("fit --config " + cfg.string() + " --out-dir " + out.string());
    REQUIRE(run.exit_code == 0);
    std::string report = slurp(out / "fit_report.txt");
    CHECK(report.find("r: 0.03\n") == 0);
    CHECK(report.find("x: 10\n") != std::string::npos);
    CHECK(report.find("K_lo: 50\n") != std::string::npos);
    CHECK(report.find("K_hi: 150\n") != std::string::npos);
    CHECK(report.find("loss: 0\n") != std::string::npos);
    CHECK(report.find("ties: 1\n") != std::string::npos);
    CHECK(run.output.find("fit_seconds:") != std::string::npos);

    // the report itself is byte-stable
    fs::path out2 = work_dir() / "fit_out2";
    REQUIRE(run_cli("fit --config " + cfg.string() + " --out-dir " + out2.string())
                .exit_code == 0);
    CHECK(slurp(out / "fit_report.txt") == slurp(out2 / "fit_report.txt"));
}

TEST_CASE("error kinds map to distinct exit codes") {
    fs::path missing_obs = write_config("missing_obs.json", R"({
        "fit": {"observations": "/nonexistent/obs.csv"}
    })");
    CHECK(run_cli("fit --config " + missing_obs.string()).exit_code == 4);

    fs::path bad_json = write_config("bad.json", "{ nope");
    CHECK(run_cli("validate --config " + bad_json.string()).exit_code == 2);

    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("validate --preset 1999").exit_code == 2);
}
