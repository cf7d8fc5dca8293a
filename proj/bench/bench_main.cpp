// Timing harness for the two hot kernels: the backward sweep and the
// calibration scan, each against its serial reference. Aborts if any
// variant disagrees with the reference.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "harvest/calibrate.hpp"
#include "harvest/solver.hpp"

using namespace harvest;
using namespace harvest::growth;
using namespace harvest::robust;
using namespace harvest::solver;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require(bool ok, const char* what) {
    if (!ok) {
        std::fprintf(stderr, "mismatch: %s\n", what);
        std::exit(1);
    }
}

}  // namespace

int main() {
    const GrowthSpec spec2021{6.8, 0.040, 0.040, 8.0, 205.0};
    QuadratureGrid quad(150);
    HeterogeneityDensity density = density_weights(DensityKind::Uniform, quad);
    ObjectiveSpec objective;
    objective.mu = 0.01;
    objective.h = PiecewiseLinear::capped_linear(1.5, 10.0);

    // Small grid: all three variants, checked against the plain reference.
    {
        SolveGrid grid{1, 100, 10.0, 61.0, 91.0};
        double bound = cfl_max_dt(grid, objective, spec2021);
        grid.time_steps = static_cast<int>(std::ceil((grid.t1 - grid.t0) / (0.9 * bound)));
        std::printf("sweep grid: I = %d, J = %d\n", grid.time_steps, grid.pop_steps);

        auto t0 = std::chrono::steady_clock::now();
        ValueField reference = solve_reference(objective, spec2021, density, quad, grid);
        double ref_s = seconds_since(t0);

        SolveOptions serial;
        serial.parallel = false;
        t0 = std::chrono::steady_clock::now();
        ValueField cached = solve(objective, spec2021, density, quad, grid, serial);
        double serial_s = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        ValueField parallel = solve(objective, spec2021, density, quad, grid);
        double parallel_s = seconds_since(t0);

        for (size_t k = 0; k < reference.values.size(); ++k) {
            require(cached.values[k] == reference.values[k], "cached sweep vs reference");
            require(parallel.values[k] == reference.values[k], "parallel sweep vs reference");
        }

        std::printf("sweep reference (per-node sampling): %8.3f s\n", ref_s);
        std::printf("sweep cached, single thread:         %8.3f s  (%.2fx)\n", serial_s,
                    ref_s / serial_s);
        std::printf("sweep cached, OpenMP:                %8.3f s  (%.2fx)\n", parallel_s,
                    ref_s / parallel_s);
    }

    // Production-width grid: sync costs amortize over the wide level.
    {
        SolveGrid grid{1, 1000, 10.0, 61.0, 63.0};
        double bound = cfl_max_dt(grid, objective, spec2021);
        grid.time_steps = static_cast<int>(std::ceil((grid.t1 - grid.t0) / (0.9 * bound)));
        std::printf("sweep grid: I = %d, J = %d\n", grid.time_steps, grid.pop_steps);

        SolveOptions serial;
        serial.parallel = false;
        auto t0 = std::chrono::steady_clock::now();
        ValueField cached = solve(objective, spec2021, density, quad, grid, serial);
        double serial_s = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        ValueField parallel = solve(objective, spec2021, density, quad, grid);
        double parallel_s = seconds_since(t0);

        for (size_t k = 0; k < cached.values.size(); ++k)
            require(parallel.values[k] == cached.values[k], "parallel sweep vs single thread");

        std::printf("sweep cached, single thread:         %8.3f s\n", serial_s);
        std::printf("sweep cached, OpenMP:                %8.3f s  (%.2fx)\n", parallel_s,
                    serial_s / parallel_s);
    }

    calibrate::Candidate truth{0.030, 10.0, 50.0, 150.0};
    calibrate::ObservationSet obs;
    for (int k = 0; k < 20; ++k) {
        double t = 6.0 * k;
        obs.records.push_back({t, calibrate::theoretical_moments(truth, quad, t).mean});
    }
    calibrate::FitRanges ranges;
    ranges.r = {0.023, 0.037, 0.001};
    ranges.x = {5.0, 15.0, 1.0};
    ranges.k_lo = {43.0, 57.0, 1.0};
    ranges.k_hi = {143.0, 157.0, 1.0};
    long long total = static_cast<long long>(ranges.r.count()) * ranges.x.count() *
                      ranges.k_lo.count() * ranges.k_hi.count();
    std::printf("scan grid: %lld candidates\n", total);

    auto t0 = std::chrono::steady_clock::now();
    calibrate::FitResult scan_reference = calibrate::grid_search_fit_reference(obs, ranges, quad);
    double scan_ref_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    calibrate::FitResult scan_serial = calibrate::grid_search_fit(obs, ranges, quad, false);
    double scan_serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    calibrate::FitResult scan_parallel = calibrate::grid_search_fit(obs, ranges, quad, true);
    double scan_parallel_s = seconds_since(t0);

    for (const calibrate::FitResult* result : {&scan_serial, &scan_parallel}) {
        require(result->best.r == scan_reference.best.r &&
                    result->best.x == scan_reference.best.x &&
                    result->best.k_lo == scan_reference.best.k_lo &&
                    result->best.k_hi == scan_reference.best.k_hi,
                "scan winner vs reference");
        require(result->loss == scan_reference.loss, "scan loss vs reference");
        require(result->ties == scan_reference.ties, "scan ties vs reference");
    }

    std::printf("scan reference (plain loops):        %8.3f s\n", scan_ref_s);
    std::printf("scan cached decays, single thread:   %8.3f s  (%.2fx)\n", scan_serial_s,
                scan_ref_s / scan_serial_s);
    std::printf("scan cached decays, OpenMP:          %8.3f s  (%.2fx)\n", scan_parallel_s,
                scan_ref_s / scan_parallel_s);
    std::printf("all variants agree with their references\n");
    return 0;
}
