#include "harvest/policy.hpp"

#include <algorithm>
#include <cmath>

namespace harvest::policy {

namespace {

double gradient_from_level(std::span<const double> level, double dn, int pop_steps, double n) {
    int j = static_cast<int>(std::ceil(n / dn));
    j = std::clamp(j, 1, pop_steps);
    double z = (level[static_cast<size_t>(j)] - level[static_cast<size_t>(j) - 1]) / dn;
    return std::max(z, 0.0);
}

struct PolicyPoint {
    double c;
    double xbar;
};

PolicyPoint policy_at(const robust::ObjectiveSpec& spec, const growth::WeightSamples& samples,
                      const growth::HeterogeneityDensity& density,
                      const growth::QuadratureGrid& quad, double z) {
    double xbar = robust::distorted_mean_weight(spec, samples, density, quad, z);
    double gz = spec.gamma + z;
    double c = spec.alpha * spec.alpha / (4.0 * gz * gz) * xbar;
    return {c, xbar};
}

std::span<const double> level_row(const solver::ValueField& field, int i) {
    size_t stride = static_cast<size_t>(field.grid.pop_steps) + 1;
    return {field.values.data() + static_cast<size_t>(i) * stride, stride};
}

}  // namespace

double gradient_n(const solver::ValueField& field, int i, double n) {
    if (i < 0 || i > field.grid.time_steps) throw InputError("time level outside the grid");
    if (!(n > 0.0) || !(n <= field.grid.pop_max))
        throw InputError("population must lie in (0, M]");
    return gradient_from_level(level_row(field, i), field.grid.dn(), field.grid.pop_steps, n);
}

double optimal_harvest(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                       const growth::HeterogeneityDensity& density,
                       const growth::QuadratureGrid& quad, double t, double z) {
    if (!(z >= 0.0)) throw InputError("gradient z must be nonnegative");
    growth::WeightSamples samples = growth::sample_weights(g, quad, t);
    return policy_at(spec, samples, density, quad, z).c;
}

Trajectory integrate_backward(const solver::ValueField& field, double n_terminal) {
    const solver::SolveGrid& grid = field.grid;
    if (!(n_terminal >= 0.0) || !(n_terminal <= grid.pop_max))
        throw InputError("terminal population must lie in [0, M]");
    const double dt = grid.dt();

    Trajectory traj;
    traj.direction = Direction::Backward;
    double n = n_terminal;
    for (int k = grid.time_steps; k >= 0; --k) {
        double t = field.time_at(k);
        growth::WeightSamples samples = growth::sample_weights(field.growth, field.quad, t);
        double zk = 0.0;
        if (n > 0.0) zk = gradient_n(field, k, n);
        PolicyPoint point = policy_at(field.objective, samples, field.density, field.quad, zk);
        double ck = (n > 0.0) ? point.c : 0.0;
        traj.t.push_back(t);
        traj.n.push_back(n);
        traj.c.push_back(ck);
        traj.z.push_back(zk);
        traj.xbar.push_back(point.xbar);
        if (k == 0) break;
        double n_prev = n + dt * (field.objective.mortality(n) * n + ck);
        if (n_prev > grid.pop_max) {
            traj.truncated = true;
            break;
        }
        n = n_prev;
    }
    std::reverse(traj.t.begin(), traj.t.end());
    std::reverse(traj.n.begin(), traj.n.end());
    std::reverse(traj.c.begin(), traj.c.end());
    std::reverse(traj.z.begin(), traj.z.end());
    std::reverse(traj.xbar.begin(), traj.xbar.end());
    return traj;
}

Trajectory integrate_forward(const solver::ValueField& field, double n_initial) {
    const solver::SolveGrid& grid = field.grid;
    if (!(n_initial >= 0.0) || !(n_initial <= grid.pop_max))
        throw InputError("initial population must lie in [0, M]");
    const double dt = grid.dt();

    Trajectory traj;
    traj.direction = Direction::Forward;
    double n = n_initial;
    for (int k = 0; k <= grid.time_steps; ++k) {
        double t = field.time_at(k);
        growth::WeightSamples samples = growth::sample_weights(field.growth, field.quad, t);
        double zk = 0.0;
        if (n > 0.0) zk = gradient_n(field, k, n);
        PolicyPoint point = policy_at(field.objective, samples, field.density, field.quad, zk);
        double ck = (n > 0.0) ? point.c : 0.0;
        traj.t.push_back(t);
        traj.n.push_back(n);
        traj.c.push_back(ck);
        traj.z.push_back(zk);
        traj.xbar.push_back(point.xbar);
        if (k == grid.time_steps) break;
        n = n - dt * (field.objective.mortality(n) * n + ck);
        if (n < 0.0) n = 0.0;
    }
    return traj;
}

std::vector<double> distorted_weight_path(const robust::ObjectiveSpec& spec,
                                          const growth::GrowthSpec& g,
                                          const growth::HeterogeneityDensity& density,
                                          const growth::QuadratureGrid& quad,
                                          const Trajectory& traj) {
    std::vector<double> path(traj.size());
    for (size_t k = 0; k < traj.size(); ++k) {
        growth::WeightSamples samples = growth::sample_weights(g, quad, traj.t[k]);
        path[k] = robust::distorted_mean_weight(spec, samples, density, quad, traj.z[k]);
    }
    return path;
}

std::vector<Trajectory> integrate_backward_streaming(
    const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
    const growth::HeterogeneityDensity& density, const growth::QuadratureGrid& quad,
    const solver::SolveGrid& grid, std::span<const double> terminal_values,
    const solver::SolveOptions& options) {
    for (double v : terminal_values)
        if (!(v >= 0.0) || !(v <= grid.pop_max))
            throw InputError("terminal population must lie in [0, M]");

    struct State {
        double n = 0;
        double last_c = 0;
        bool alive = true;
    };
    std::vector<Trajectory> paths(terminal_values.size());
    std::vector<State> states(terminal_values.size());
    const double dt = grid.dt();
    const double dn = grid.dn();

    auto record = [&](size_t p, int, double t, std::span<const double> level) {
        State& st = states[p];
        growth::WeightSamples samples = growth::sample_weights(g, quad, t);
        double zk = (st.n > 0.0) ? gradient_from_level(level, dn, grid.pop_steps, st.n) : 0.0;
        PolicyPoint point = policy_at(spec, samples, density, quad, zk);
        double ck = (st.n > 0.0) ? point.c : 0.0;
        Trajectory& traj = paths[p];
        traj.t.push_back(t);
        traj.n.push_back(st.n);
        traj.c.push_back(ck);
        traj.z.push_back(zk);
        traj.xbar.push_back(point.xbar);
        st.last_c = ck;
    };

    solver::solve_streaming(
        spec, g, density, quad, grid,
        [&](int i, double t, std::span<const double> level) {
            for (size_t p = 0; p < states.size(); ++p) {
                State& st = states[p];
                if (!st.alive) continue;
                if (i == grid.time_steps) {
                    st.n = terminal_values[p];
                    record(p, i, t, level);
                    continue;
                }
                double n_prev = st.n + dt * (spec.mortality(st.n) * st.n + st.last_c);
                if (n_prev > grid.pop_max) {
                    paths[p].truncated = true;
                    st.alive = false;
                    continue;
                }
                st.n = n_prev;
                record(p, i, t, level);
            }
        },
        options);

    for (Trajectory& traj : paths) {
        traj.direction = Direction::Backward;
        std::reverse(traj.t.begin(), traj.t.end());
        std::reverse(traj.n.begin(), traj.n.end());
        std::reverse(traj.c.begin(), traj.c.end());
        std::reverse(traj.z.begin(), traj.z.end());
        std::reverse(traj.xbar.begin(), traj.xbar.end());
    }
    return paths;
}

void for_each_policy_level(const solver::ValueField& field, const PolicyLevelCallback& on_level,
                           bool parallel) {
    const solver::SolveGrid& grid = field.grid;
    const int J = grid.pop_steps;
    const double dn = grid.dn();
    std::vector<double> z(static_cast<size_t>(J) + 1);
    std::vector<double> c(static_cast<size_t>(J) + 1);
    for (int i = 0; i <= grid.time_steps; ++i) {
        double t = field.time_at(i);
        growth::WeightSamples samples = growth::sample_weights(field.growth, field.quad, t);
        std::span<const double> row = level_row(field, i);
        z[0] = 0.0;
        c[0] = 0.0;
#pragma omp parallel for schedule(static) if (parallel)
        for (int j = 1; j <= J; ++j) {
            double zj = std::max(
                (row[static_cast<size_t>(j)] - row[static_cast<size_t>(j) - 1]) / dn, 0.0);
            z[static_cast<size_t>(j)] = zj;
            c[static_cast<size_t>(j)] =
                policy_at(field.objective, samples, field.density, field.quad, zj).c;
        }
        on_level(i, t, z, c);
    }
}

double max_harvest_rate(const solver::ValueField& field) {
    double best = 0.0;
    for_each_policy_level(field, [&](int, double, std::span<const double>,
                                     std::span<const double> c) {
        for (double v : c) best = std::max(best, v);
    });
    return best;
}

}  // namespace harvest::policy
