#pragma once

#include <span>
#include <vector>

#include "harvest/errors.hpp"

namespace harvest::growth {

// Logistic growth continuum. Individuals are indexed by u in [0,1] and share
// the initial weight x; growth rate and maximum weight are interpolated
// linearly between the bounds, so r(u) and K(u) are nondecreasing.
struct GrowthSpec {
    double x = 0;       // initial body weight, grams
    double r_lo = 0;    // growth rate at u = 0, 1/day
    double r_hi = 0;    // growth rate at u = 1, 1/day
    double k_lo = 0;    // maximum weight at u = 0, grams
    double k_hi = 0;    // maximum weight at u = 1, grams

    double r(double u) const { return r_lo + u * (r_hi - r_lo); }
    double k(double u) const { return k_lo + u * (k_hi - k_lo); }

    // Throws InputError unless 0 < x <= k_lo, 0 < r_lo <= r_hi, 0 < k_lo <= k_hi.
    void validate() const;
};

// Midpoint rule on (0,1): nodes (m - 0.5)/n with uniform weight 1/n.
class QuadratureGrid {
public:
    explicit QuadratureGrid(int n_points = 150);
    int n() const { return static_cast<int>(nodes_.size()); }
    double node(int m) const { return nodes_[static_cast<size_t>(m)]; }
    double du() const { return du_; }
    std::span<const double> nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
    double du_;
};

enum class DensityKind { Uniform, Beta };

// Heterogeneity density sampled at the quadrature nodes and renormalized so
// the discrete integral sum(p_m du) is 1 up to rounding.
struct HeterogeneityDensity {
    DensityKind kind = DensityKind::Uniform;
    double beta_a = 0;
    double beta_b = 0;
    std::vector<double> weights;  // p_m at quadrature nodes
};

// Uniform weights are exactly 1; beta(a,b) requires a, b > 1.
HeterogeneityDensity density_weights(DensityKind kind, const QuadratureGrid& quad,
                                     double beta_a = 0, double beta_b = 0);

// X_t(u): body weight of the u-indexed individual at day t.
double weight(const GrowthSpec& spec, double t, double u);

// X_t(u_m) at every quadrature node, with the sample minimum kept so exponent
// shifting downstream stays exact.
struct WeightSamples {
    double t = 0;
    std::vector<double> values;
    double min_value = 0;
};
WeightSamples sample_weights(const GrowthSpec& spec, const QuadratureGrid& quad, double t);

// Discrete density-weighted mean of node samples. The quotient by the
// discrete mass makes a constant integrand reproduce exactly.
double discrete_mean(std::span<const double> values, const HeterogeneityDensity& density,
                     const QuadratureGrid& quad);

// Population-averaged body weight at day t.
double mean_weight(const GrowthSpec& spec, const HeterogeneityDensity& density,
                   const QuadratureGrid& quad, double t);

}  // namespace harvest::growth
