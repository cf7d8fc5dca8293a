#pragma once

#include <functional>
#include <span>
#include <vector>

#include "harvest/robust.hpp"

namespace harvest::solver {

// Uniform time-population grid over [t0, t1] x [0, M].
struct SolveGrid {
    int time_steps = 0;   // I
    int pop_steps = 0;    // J
    double pop_max = 0;   // M, population in units of 1e4 individuals
    double t0 = 0;        // window start, absolute days
    double t1 = 0;        // window end, absolute days

    double dt() const { return (t1 - t0) / time_steps; }
    double dn() const { return pop_max / pop_steps; }
    void validate() const;
};

// Sufficient time-step bound dn / (R(M) M + alpha^2 K(1) / (4 gamma^2)) for
// nonnegativity and monotonicity of the explicit sweep.
double cfl_max_dt(const SolveGrid& grid, const robust::ObjectiveSpec& spec,
                  const growth::GrowthSpec& g);

struct SolveOptions {
    bool allow_cfl_violation = false;  // proceed past the bound, flagging the field
    bool clamp_gradient = true;        // evaluate the Hamiltonian at max(z, 0)
    bool parallel = true;              // OpenMP across population nodes per level
};

// Solved value surface with everything needed to query policies from it.
struct ValueField {
    SolveGrid grid;
    growth::GrowthSpec growth;
    robust::ObjectiveSpec objective;
    growth::HeterogeneityDensity density;
    growth::QuadratureGrid quad;
    std::vector<double> values;  // (I+1) x (J+1), level-major
    bool cfl_overridden = false;
    double cfl_bound = 0;

    double at(int i, int j) const {
        return values[static_cast<size_t>(i) * (grid.pop_steps + 1) + j];
    }
    double time_at(int i) const { return grid.t0 + i * grid.dt(); }
    double pop_at(int j) const { return j * grid.dn(); }
};

// One node of the backward update: the value at (i, j) from its level-(i+1)
// stencil. advect is R(j dn) j dn dt; samples are the level-i weights.
double scheme_update(const robust::ObjectiveSpec& spec, const growth::WeightSamples& samples,
                     const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad, double advect, double dt, double dn,
                     double phi_j, double phi_jm1, bool clamp_gradient = true);

ValueField solve(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                 const growth::HeterogeneityDensity& density, const growth::QuadratureGrid& quad,
                 const SolveGrid& grid, const SolveOptions& options = {});

// Backward sweep holding only two time levels; the callback sees each
// completed level, newest first (i = I down to 0). The span is only valid
// during the call.
using LevelCallback = std::function<void(int i, double t, std::span<const double> level)>;
void solve_streaming(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                     const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad, const SolveGrid& grid,
                     const LevelCallback& on_level, const SolveOptions& options = {});

// Single-threaded sweep with per-node weight sampling and no level cache;
// the reference the optimized sweep is tested against.
ValueField solve_reference(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                           const growth::HeterogeneityDensity& density,
                           const growth::QuadratureGrid& quad, const SolveGrid& grid,
                           const SolveOptions& options = {});

// Monotone bilinear interpolation; exact at grid nodes, no extrapolation.
double interpolate(const ValueField& field, double t, double n);

}  // namespace harvest::solver
