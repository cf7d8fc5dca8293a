#include "harvest/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace harvest::robust {

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size())
        throw InputError("piecewise-linear function needs matching knot and value lists");
    for (size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw InputError("piecewise-linear knots must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v)) throw InputError("piecewise-linear values must be finite");
}

PiecewiseLinear PiecewiseLinear::constant(double v) { return PiecewiseLinear({0.0}, {v}); }

PiecewiseLinear PiecewiseLinear::capped_linear(double slope, double cap) {
    if (!(cap > 0.0)) throw InputError("capped-linear cap must be positive");
    return PiecewiseLinear({0.0, cap}, {0.0, slope * cap});
}

double PiecewiseLinear::operator()(double n) const {
    if (knots_.empty()) return 0.0;
    if (n <= knots_.front()) return values_.front();
    if (n >= knots_.back()) return values_.back();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), n);
    size_t hi = static_cast<size_t>(it - knots_.begin());
    size_t lo = hi - 1;
    double frac = (n - knots_[lo]) / (knots_[hi] - knots_[lo]);
    return values_[lo] + (values_[hi] - values_[lo]) * frac;
}

double PiecewiseLinear::max_value() const {
    if (values_.empty()) return 0.0;
    return *std::max_element(values_.begin(), values_.end());
}

bool PiecewiseLinear::nondecreasing() const {
    for (size_t i = 0; i + 1 < values_.size(); ++i)
        if (values_[i] > values_[i + 1]) return false;
    return true;
}

bool PiecewiseLinear::positive() const {
    if (values_.empty()) return false;
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

double ObjectiveSpec::harvest_cap(const growth::GrowthSpec& g) const {
    if (c_bar) return *c_bar;
    return alpha * alpha / (4.0 * gamma * gamma) * g.k_hi;
}

void ObjectiveSpec::validate(const growth::GrowthSpec& g) const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("utility weight alpha must be finite and nonnegative");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("cost weight gamma must be finite and positive");
    if (!(mu > 0.0)) throw ConfigError("uncertainty weight mu must be positive (or infinite)");
    if (h(0.0) != 0.0) throw ConfigError("terminal utility must vanish at zero population");
    if (!h.nondecreasing()) throw ConfigError("terminal utility must be nondecreasing");
    if (h.max_value() < 0.0 || !std::isfinite(h.max_value()))
        throw ConfigError("terminal utility must be bounded and nonnegative");
    if (!mortality.positive()) throw ConfigError("mortality rate must be positive");
    if (!mortality.nondecreasing()) throw ConfigError("mortality rate must be nondecreasing");
    double cap = harvest_cap(g);
    double needed = alpha * alpha / (4.0 * gamma * gamma) * g.k_hi;
    if (!(needed <= cap))
        throw ConfigError("harvest cap too small: needs at least alpha^2 K(1)/(4 gamma^2)");
}

namespace {

// Exponentially tilted moments of the weight samples, exponents shifted by
// the sample minimum so small mu cannot underflow.
//   mass = sum p du,  s0 = sum e p du,  s1 = sum X e p du,
// with e_m = exp(-s (X_m - X_min)).
struct TiltedMoments {
    double mass = 0;
    double s0 = 0;
    double s1 = 0;
};

TiltedMoments tilted_moments(std::span<const double> x, double x_min,
                             const growth::HeterogeneityDensity& density,
                             const growth::QuadratureGrid& quad, double s) {
    if (x.size() != density.weights.size() || x.size() != static_cast<size_t>(quad.n()))
        throw InputError("sample count does not match the quadrature grid");
    double w_min = s * x_min;
    TiltedMoments acc;
    for (size_t m = 0; m < x.size(); ++m) {
        double w = density.weights[m] * quad.du();
        double e = (s == 0.0) ? 1.0 : std::exp(-(s * x[m] - w_min));
        double ew = e * w;
        acc.mass += w;
        acc.s0 += ew;
        acc.s1 += x[m] * ew;
    }
    return acc;
}

double tilt_rate(const ObjectiveSpec& spec, double z) {
    if (spec.mu_infinite()) return 0.0;
    return spec.alpha * spec.alpha / (4.0 * spec.mu * (spec.gamma + z));
}

void require_nonneg_gradient(double z) {
    if (!(z >= 0.0)) throw InputError("gradient z must be nonnegative");
}

}  // namespace

double kl_divergence(std::span<const double> phi, const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad) {
    if (phi.size() != density.weights.size() || phi.size() != static_cast<size_t>(quad.n()))
        throw InputError("field sample count does not match the quadrature grid");
    double mass = 0.0;
    for (size_t m = 0; m < phi.size(); ++m) {
        if (!(phi[m] >= 0.0)) throw InputError("uncertainty field must be nonnegative");
        mass += phi[m] * density.weights[m] * quad.du();
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw InputError("uncertainty field is not unit-mean under the density");
    double div = 0.0;
    for (size_t m = 0; m < phi.size(); ++m) {
        double y = phi[m];
        double term = (y == 0.0) ? 1.0 : y * std::log(y) - y + 1.0;
        div += term * density.weights[m] * quad.du();
    }
    return div;
}

DistortionField worst_case_distortion(const ObjectiveSpec& spec,
                                      const growth::WeightSamples& samples,
                                      const growth::HeterogeneityDensity& density,
                                      const growth::QuadratureGrid& quad, double z) {
    require_nonneg_gradient(z);
    DistortionField field;
    field.t = samples.t;
    field.z = z;
    field.samples.resize(samples.values.size());
    if (spec.mu_infinite()) {
        std::fill(field.samples.begin(), field.samples.end(), 1.0);
        return field;
    }
    double s = tilt_rate(spec, z);
    TiltedMoments acc = tilted_moments(samples.values, samples.min_value, density, quad, s);
    double w_min = s * samples.min_value;
    double scale = acc.mass / acc.s0;
    for (size_t m = 0; m < samples.values.size(); ++m) {
        double e = (s == 0.0) ? 1.0 : std::exp(-(s * samples.values[m] - w_min));
        field.samples[m] = e * scale;
    }
    return field;
}

DistortionField worst_case_distortion(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                                      const growth::HeterogeneityDensity& density,
                                      const growth::QuadratureGrid& quad, double t, double z) {
    return worst_case_distortion(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

double hamiltonian(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                   const growth::HeterogeneityDensity& density,
                   const growth::QuadratureGrid& quad, double z) {
    require_nonneg_gradient(z);
    if (spec.mu_infinite()) return hamiltonian_limit(spec, samples, density, quad, z);
    double s = tilt_rate(spec, z);
    TiltedMoments acc = tilted_moments(samples.values, samples.min_value, density, quad, s);
    return spec.mu * (s * samples.min_value - std::log(acc.s0 / acc.mass));
}

double hamiltonian(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                   const growth::HeterogeneityDensity& density,
                   const growth::QuadratureGrid& quad, double t, double z) {
    return hamiltonian(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

double hamiltonian_modified(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                            const growth::HeterogeneityDensity& density,
                            const growth::QuadratureGrid& quad, double z) {
    return hamiltonian(spec, samples, density, quad, std::max(z, 0.0));
}

double hamiltonian_modified(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                            const growth::HeterogeneityDensity& density,
                            const growth::QuadratureGrid& quad, double t, double z) {
    return hamiltonian_modified(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

double hamiltonian_limit(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                         const growth::HeterogeneityDensity& density,
                         const growth::QuadratureGrid& quad, double z) {
    double zc = std::max(z, 0.0);
    double mean = growth::discrete_mean(samples.values, density, quad);
    return spec.alpha * spec.alpha / (4.0 * (spec.gamma + zc)) * mean;
}

double hamiltonian_limit(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                         const growth::HeterogeneityDensity& density,
                         const growth::QuadratureGrid& quad, double t, double z) {
    return hamiltonian_limit(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

double hamiltonian_dz(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                      const growth::HeterogeneityDensity& density,
                      const growth::QuadratureGrid& quad, double z) {
    require_nonneg_gradient(z);
    double gz = spec.gamma + z;
    double mean = distorted_mean_weight(spec, samples, density, quad, z);
    return -spec.alpha * spec.alpha / (4.0 * gz * gz) * mean;
}

double hamiltonian_dz(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                      const growth::HeterogeneityDensity& density,
                      const growth::QuadratureGrid& quad, double t, double z) {
    return hamiltonian_dz(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

double distorted_mean_weight(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                             const growth::HeterogeneityDensity& density,
                             const growth::QuadratureGrid& quad, double z) {
    require_nonneg_gradient(z);
    if (spec.mu_infinite()) return growth::discrete_mean(samples.values, density, quad);
    double s = tilt_rate(spec, z);
    TiltedMoments acc = tilted_moments(samples.values, samples.min_value, density, quad, s);
    return acc.s1 / acc.s0;
}

double distorted_mean_weight(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                             const growth::HeterogeneityDensity& density,
                             const growth::QuadratureGrid& quad, double t, double z) {
    return distorted_mean_weight(spec, growth::sample_weights(g, quad, t), density, quad, z);
}

}  // namespace harvest::robust
