#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "harvest/growth.hpp"

namespace harvest::robust {

// Bounded piecewise-linear function of the population, constant after the
// last knot. Used for the terminal utility h and the mortality rate R.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;  // identically zero
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

    static PiecewiseLinear zero() { return {}; }
    static PiecewiseLinear constant(double v);
    // slope * min(n, cap)
    static PiecewiseLinear capped_linear(double slope, double cap);

    double operator()(double n) const;
    double max_value() const;
    bool nondecreasing() const;
    bool positive() const;  // all knot values strictly positive
    bool empty() const { return knots_.empty(); }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

// Harvesting economics and robustness weights. mu may be +infinity, which
// selects the no-uncertainty limit throughout (trivial distortion and the
// limit Hamiltonian). The utility exponent is fixed at 1/2.
struct ObjectiveSpec {
    double alpha = 0.05;           // harvest utility weight, 1/day
    double gamma = 0.1;            // harvest cost weight, 1/day
    double mu = 0.01;              // uncertainty-aversion weight, 1/day
    std::optional<double> c_bar;   // harvest-rate cap; empty = smallest admissible
    PiecewiseLinear h;             // terminal utility, h(0) = 0
    PiecewiseLinear mortality = PiecewiseLinear::constant(0.01);  // R(n), 1/day

    bool mu_infinite() const { return std::isinf(mu); }
    // c_bar if set, otherwise alpha^2 k_hi / (4 gamma^2).
    double harvest_cap(const growth::GrowthSpec& g) const;
    void validate(const growth::GrowthSpec& g) const;
};

// sum (phi ln phi - phi + 1) p du with 0 ln 0 = 0. Requires unit-mean
// nonnegative samples.
double kl_divergence(std::span<const double> phi, const growth::HeterogeneityDensity& density,
                     const growth::QuadratureGrid& quad);

// Worst-case reweighting of the heterogeneity density at gradient z.
struct DistortionField {
    double t = 0;
    double z = 0;
    std::vector<double> samples;  // phi-hat at quadrature nodes
};

DistortionField worst_case_distortion(const ObjectiveSpec& spec,
                                      const growth::WeightSamples& samples,
                                      const growth::HeterogeneityDensity& density,
                                      const growth::QuadratureGrid& quad, double z);
DistortionField worst_case_distortion(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                                      const growth::HeterogeneityDensity& density,
                                      const growth::QuadratureGrid& quad, double t, double z);

// Entropic worst-case Hamiltonian H(t, z), z >= 0. Dispatches to
// hamiltonian_limit when mu is infinite.
double hamiltonian(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                   const growth::HeterogeneityDensity& density,
                   const growth::QuadratureGrid& quad, double z);
double hamiltonian(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                   const growth::HeterogeneityDensity& density,
                   const growth::QuadratureGrid& quad, double t, double z);

// H(t, max(z, 0)); defined for any real z.
double hamiltonian_modified(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                            const growth::HeterogeneityDensity& density,
                            const growth::QuadratureGrid& quad, double z);
double hamiltonian_modified(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                            const growth::HeterogeneityDensity& density,
                            const growth::QuadratureGrid& quad, double t, double z);

// No-uncertainty Hamiltonian alpha^2/(4(gamma+max(0,z))) * mean weight.
double hamiltonian_limit(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                         const growth::HeterogeneityDensity& density,
                         const growth::QuadratureGrid& quad, double z);
double hamiltonian_limit(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                         const growth::HeterogeneityDensity& density,
                         const growth::QuadratureGrid& quad, double t, double z);

// dH/dz, the tilted-mean closed form; always negative, magnitude at most
// alpha^2 k_hi / (4 gamma^2).
double hamiltonian_dz(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                      const growth::HeterogeneityDensity& density,
                      const growth::QuadratureGrid& quad, double z);
double hamiltonian_dz(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                      const growth::HeterogeneityDensity& density,
                      const growth::QuadratureGrid& quad, double t, double z);

// Pessimistic mean body weight sum X phi-hat p du; equals the undistorted
// mean when mu is infinite.
double distorted_mean_weight(const ObjectiveSpec& spec, const growth::WeightSamples& samples,
                             const growth::HeterogeneityDensity& density,
                             const growth::QuadratureGrid& quad, double z);
double distorted_mean_weight(const ObjectiveSpec& spec, const growth::GrowthSpec& g,
                             const growth::HeterogeneityDensity& density,
                             const growth::QuadratureGrid& quad, double t, double z);

}  // namespace harvest::robust
