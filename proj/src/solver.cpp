#include "harvest/solver.hpp"

#include <algorithm>
#include <cmath>

namespace harvest::solver {

void SolveGrid::validate() const {
    if (time_steps < 1) throw ConfigError("grid needs at least one time step");
    if (pop_steps < 1) throw ConfigError("grid needs at least one population step");
    if (!(pop_max > 0.0) || !std::isfinite(pop_max))
        throw ConfigError("population cap must be positive and finite");
    if (!(t0 >= 0.0) || !(t1 > t0) || !std::isfinite(t1))
        throw ConfigError("time window must satisfy 0 <= t0 < t1");
}

double cfl_max_dt(const SolveGrid& grid, const robust::ObjectiveSpec& spec,
                  const growth::GrowthSpec& g) {
    double lipschitz = spec.alpha * spec.alpha / (4.0 * spec.gamma * spec.gamma) * g.k_hi;
    double drift = spec.mortality(grid.pop_max) * grid.pop_max;
    return grid.dn() / (drift + lipschitz);
}

double scheme_update(const robust::ObjectiveSpec& spec, const growth::WeightSamples& samples,
                     const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad, double advect, double dt, double dn,
                     double phi_j, double phi_jm1, bool clamp_gradient) {
    double z = (phi_j - phi_jm1) / dn;
    double hval = clamp_gradient ? robust::hamiltonian_modified(spec, samples, density, quad, z)
                                 : robust::hamiltonian(spec, samples, density, quad, z);
    return phi_j - advect * z + hval * dt;
}

void solve_streaming(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                     const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad, const SolveGrid& grid,
                     const LevelCallback& on_level, const SolveOptions& options) {
    g.validate();
    spec.validate(g);
    grid.validate();
    if (density.weights.size() != static_cast<size_t>(quad.n()))
        throw InputError("density sample count does not match the quadrature grid");

    const double dt = grid.dt();
    const double dn = grid.dn();
    const double bound = cfl_max_dt(grid, spec, g);
    if (dt > bound && !options.allow_cfl_violation) throw CflError(dt, bound);

    const int last = grid.time_steps;
    const int J = grid.pop_steps;
    std::vector<double> cur(static_cast<size_t>(J) + 1);
    std::vector<double> next(static_cast<size_t>(J) + 1);

    // R(j dn) j dn dt is level-independent.
    std::vector<double> advect(static_cast<size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        double n = j * dn;
        advect[static_cast<size_t>(j)] = spec.mortality(n) * n * dt;
    }

    for (int j = 0; j <= J; ++j) cur[static_cast<size_t>(j)] = spec.h(j * dn);
    on_level(last, grid.t0 + last * dt, cur);

    growth::WeightSamples samples;
    auto level_prep = [&](int i) {
        std::swap(cur, next);
        samples = growth::sample_weights(g, quad, grid.t0 + i * dt);
        cur[0] = 0.0;
    };
    auto update_node = [&](int j) {
        cur[static_cast<size_t>(j)] =
            scheme_update(spec, samples, density, quad, advect[static_cast<size_t>(j)], dt, dn,
                          next[static_cast<size_t>(j)], next[static_cast<size_t>(j) - 1],
                          options.clamp_gradient);
    };
    auto level_done = [&](int i) {
        for (int j = 0; j <= J; ++j)
            if (!std::isfinite(cur[static_cast<size_t>(j)])) throw NumericalError(i, j);
        on_level(i, grid.t0 + i * dt, cur);
    };

    // The unclamped variant can throw from inside the node update, so only
    // the clamped one runs in the shared parallel region.
    const bool parallel = options.parallel && options.clamp_gradient;
    if (!parallel) {
        for (int i = last - 1; i >= 0; --i) {
            level_prep(i);
            for (int j = 1; j <= J; ++j) update_node(j);
            level_done(i);
        }
        return;
    }

    // One region for the whole sweep, two barriers per level: one after the
    // node updates, one after the handoff single that finishes level i and
    // prepares level i-1.
    std::exception_ptr failure;
    bool stop = false;
#pragma omp parallel
    {
#pragma omp single
        level_prep(last - 1);
        for (int i = last - 1; i >= 0; --i) {
#pragma omp for schedule(static)
            for (int j = 1; j <= J; ++j) update_node(j);
#pragma omp single
            {
                try {
                    level_done(i);
                    if (i > 0) level_prep(i - 1);
                } catch (...) {
                    failure = std::current_exception();
                    stop = true;
                }
            }
            if (stop) break;
        }
    }
    if (failure) std::rethrow_exception(failure);
}

ValueField solve(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                 const growth::HeterogeneityDensity& density, const growth::QuadratureGrid& quad,
                 const SolveGrid& grid, const SolveOptions& options) {
    ValueField field;
    field.grid = grid;
    field.growth = g;
    field.objective = spec;
    field.density = density;
    field.quad = quad;
    field.values.assign(
        (static_cast<size_t>(grid.time_steps) + 1) * (static_cast<size_t>(grid.pop_steps) + 1),
        0.0);
    const size_t stride = static_cast<size_t>(grid.pop_steps) + 1;
    solve_streaming(
        spec, g, density, quad, grid,
        [&](int i, double, std::span<const double> level) {
            std::copy(level.begin(), level.end(),
                      field.values.begin() + static_cast<size_t>(i) * stride);
        },
        options);
    field.cfl_bound = cfl_max_dt(grid, spec, g);
    field.cfl_overridden = grid.dt() > field.cfl_bound;
    return field;
}

namespace {

// Cell index and local coordinate for a query; coordinates within 1e-12 of
// a node snap onto it so nodal queries reproduce nodal values.
struct CellCoord {
    int index;
    double frac;
};

CellCoord split_coordinate(double a, int cells) {
    int i = static_cast<int>(std::floor(a));
    double s = a - i;
    if (s < 1e-12) s = 0.0;
    if (s > 1.0 - 1e-12) {
        ++i;
        s = 0.0;
    }
    if (i < 0) {
        i = 0;
        s = 0.0;
    }
    if (i >= cells) {
        i = cells - 1;
        s = 1.0;
    }
    return {i, s};
}

}  // namespace

double interpolate(const ValueField& field, double t, double n) {
    const SolveGrid& grid = field.grid;
    if (!(t >= grid.t0) || !(t <= grid.t1))
        throw InputError("query time outside the solved window");
    if (!(n >= 0.0) || !(n <= grid.pop_max))
        throw InputError("query population outside the solved domain");
    CellCoord ti = split_coordinate((t - grid.t0) / grid.dt(), grid.time_steps);
    CellCoord nj = split_coordinate(n / grid.dn(), grid.pop_steps);
    double s = ti.frac;
    double r = nj.frac;
    return (1.0 - s) * (1.0 - r) * field.at(ti.index, nj.index) +
           s * (1.0 - r) * field.at(ti.index + 1, nj.index) +
           (1.0 - s) * r * field.at(ti.index, nj.index + 1) +
           s * r * field.at(ti.index + 1, nj.index + 1);
}

}  // namespace harvest::solver
