#include <cmath>

#include "harvest/solver.hpp"

namespace harvest::solver {

// Plain nested-loop sweep. Weight samples are rebuilt per node and nothing
// runs in parallel; solve() must reproduce this bit for bit.
ValueField solve_reference(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                           const growth::HeterogeneityDensity& density,
                           const growth::QuadratureGrid& quad, const SolveGrid& grid,
                           const SolveOptions& options) {
    g.validate();
    spec.validate(g);
    grid.validate();
    if (density.weights.size() != static_cast<size_t>(quad.n()))
        throw InputError("density sample count does not match the quadrature grid");

    const double dt = grid.dt();
    const double dn = grid.dn();
    const double bound = cfl_max_dt(grid, spec, g);
    if (dt > bound && !options.allow_cfl_violation) throw CflError(dt, bound);

    ValueField field;
    field.grid = grid;
    field.growth = g;
    field.objective = spec;
    field.density = density;
    field.quad = quad;
    field.cfl_bound = bound;
    field.cfl_overridden = dt > bound;

    const int last = grid.time_steps;
    const int J = grid.pop_steps;
    const size_t stride = static_cast<size_t>(J) + 1;
    field.values.assign((static_cast<size_t>(last) + 1) * stride, 0.0);
    auto cell = [&](int i, int j) -> double& {
        return field.values[static_cast<size_t>(i) * stride + j];
    };

    for (int j = 0; j <= J; ++j) cell(last, j) = spec.h(j * dn);
    for (int i = last - 1; i >= 0; --i) {
        cell(i, 0) = 0.0;
        for (int j = 1; j <= J; ++j) {
            growth::WeightSamples samples = growth::sample_weights(g, quad, grid.t0 + i * dt);
            double n = j * dn;
            double advect = spec.mortality(n) * n * dt;
            cell(i, j) = scheme_update(spec, samples, density, quad, advect, dt, dn,
                                       cell(i + 1, j), cell(i + 1, j - 1),
                                       options.clamp_gradient);
            if (!std::isfinite(cell(i, j))) throw NumericalError(i, j);
        }
    }
    return field;
}

}  // namespace harvest::solver
