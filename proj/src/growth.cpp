#include "harvest/growth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace harvest::growth {

void GrowthSpec::validate() const {
    if (!(x > 0.0)) throw InputError("initial weight x must be positive");
    if (!(r_lo > 0.0) || !(r_lo <= r_hi))
        throw InputError("growth rate bounds must satisfy 0 < r_lo <= r_hi");
    if (!(k_lo > 0.0) || !(k_lo <= k_hi))
        throw InputError("maximum-weight bounds must satisfy 0 < k_lo <= k_hi");
    if (!(x <= k_lo)) throw InputError("initial weight x must not exceed k_lo");
}

QuadratureGrid::QuadratureGrid(int n_points) {
    if (n_points < 1) throw InputError("quadrature needs at least one node");
    nodes_.resize(static_cast<size_t>(n_points));
    du_ = 1.0 / n_points;
    for (int m = 0; m < n_points; ++m)
        nodes_[static_cast<size_t>(m)] = (m + 0.5) / n_points;
}

HeterogeneityDensity density_weights(DensityKind kind, const QuadratureGrid& quad,
                                     double beta_a, double beta_b) {
    HeterogeneityDensity density;
    density.kind = kind;
    density.weights.assign(static_cast<size_t>(quad.n()), 1.0);
    if (kind == DensityKind::Uniform) return density;

    if (!(beta_a > 1.0) || !(beta_b > 1.0))
        throw InputError("beta density requires parameters a, b > 1");
    density.beta_a = beta_a;
    density.beta_b = beta_b;
    double mass = 0.0;
    for (int m = 0; m < quad.n(); ++m) {
        double u = quad.node(m);
        double raw = std::pow(u, beta_a - 1.0) * std::pow(1.0 - u, beta_b - 1.0);
        density.weights[static_cast<size_t>(m)] = raw;
        mass += raw * quad.du();
    }
    for (double& w : density.weights) w /= mass;
    return density;
}

double weight(const GrowthSpec& spec, double t, double u) {
    if (!(t >= 0.0)) throw InputError("time must be nonnegative");
    if (!(u >= 0.0) || !(u <= 1.0)) throw InputError("heterogeneity index must lie in [0,1]");
    double k = spec.k(u);
    double r = spec.r(u);
    return k / (1.0 + (k / spec.x - 1.0) * std::exp(-r * t));
}

WeightSamples sample_weights(const GrowthSpec& spec, const QuadratureGrid& quad, double t) {
    WeightSamples samples;
    samples.t = t;
    samples.values.resize(static_cast<size_t>(quad.n()));
    for (int m = 0; m < quad.n(); ++m)
        samples.values[static_cast<size_t>(m)] = weight(spec, t, quad.node(m));
    samples.min_value = *std::min_element(samples.values.begin(), samples.values.end());
    return samples;
}

double discrete_mean(std::span<const double> values, const HeterogeneityDensity& density,
                     const QuadratureGrid& quad) {
    if (values.size() != density.weights.size() ||
        values.size() != static_cast<size_t>(quad.n()))
        throw InputError("sample count does not match the quadrature grid");
    double mass = 0.0;
    double acc = 0.0;
    for (size_t m = 0; m < values.size(); ++m) {
        double w = density.weights[m] * quad.du();
        mass += w;
        acc += values[m] * w;
    }
    return acc / mass;
}

double mean_weight(const GrowthSpec& spec, const HeterogeneityDensity& density,
                   const QuadratureGrid& quad, double t) {
    WeightSamples samples = sample_weights(spec, quad, t);
    return discrete_mean(samples.values, density, quad);
}

}  // namespace harvest::growth
