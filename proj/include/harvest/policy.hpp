#pragma once

#include <functional>
#include <span>
#include <vector>

#include "harvest/solver.hpp"

namespace harvest::policy {

enum class Direction { Forward, Backward };

// Controlled population path sampled on the solver clock, ascending in time.
// Once the population hits zero it stays there; backward paths that leave the
// grid domain are cut short and flagged.
struct Trajectory {
    Direction direction = Direction::Forward;
    bool truncated = false;
    std::vector<double> t;     // days
    std::vector<double> n;     // population, units of 1e4 individuals
    std::vector<double> c;     // harvest rate, units/day
    std::vector<double> z;     // value gradient used for the policy
    std::vector<double> xbar;  // distorted mean body weight, grams
    size_t size() const { return t.size(); }
};

// Backward difference of the field in n at time level i, clamped at zero;
// the same stencil the sweep used. Requires n in (0, M].
double gradient_n(const solver::ValueField& field, int i, double n);

// Candidate optimal harvest rate alpha^2/(4(gamma+z)^2) * distorted mean.
double optimal_harvest(const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
                       const growth::HeterogeneityDensity& density,
                       const growth::QuadratureGrid& quad, double t, double z);

// Explicit Euler on the population equation at the solver step, driven by
// the field's optimal policy.
Trajectory integrate_backward(const solver::ValueField& field, double n_terminal);
Trajectory integrate_forward(const solver::ValueField& field, double n_initial);

// Distorted mean weight along a recorded trajectory.
std::vector<double> distorted_weight_path(const robust::ObjectiveSpec& spec,
                                          const growth::GrowthSpec& g,
                                          const growth::HeterogeneityDensity& density,
                                          const growth::QuadratureGrid& quad,
                                          const Trajectory& traj);

// Backward path integration fused with the sweep so only two time levels are
// ever held; results match integrate_backward on a stored field exactly.
std::vector<Trajectory> integrate_backward_streaming(
    const robust::ObjectiveSpec& spec, const growth::GrowthSpec& g,
    const growth::HeterogeneityDensity& density, const growth::QuadratureGrid& quad,
    const solver::SolveGrid& grid, std::span<const double> terminal_values,
    const solver::SolveOptions& options = {});

// Policy surface over the whole field: z and c* per node, one level at a
// time (spans valid only during the call).
using PolicyLevelCallback =
    std::function<void(int i, double t, std::span<const double> z, std::span<const double> c)>;
void for_each_policy_level(const solver::ValueField& field, const PolicyLevelCallback& on_level,
                           bool parallel = true);

// Space-time maximum of c* over the grid.
double max_harvest_rate(const solver::ValueField& field);

}  // namespace harvest::policy
