#pragma once

#include <vector>

#include "harvest/growth.hpp"

namespace harvest::calibrate {

struct Observation {
    double t = 0;  // days since the reference date
    double w = 0;  // grams
};

struct ObservationSet {
    std::vector<Observation> records;
    void validate() const;  // nonempty, t >= 0, w > 0
};

// Inclusive range scanned with a fixed increment; values are min + k*step.
struct Range {
    double min = 0;
    double max = 0;
    double step = 1;
    int count() const;
    double value(int k) const { return min + k * step; }
    void validate(const char* name) const;
};

// Search grid for (r, x, K_lo, K_hi) with the feasibility constraints
// K_hi >= K_lo + k_gap and x <= K_lo.
struct FitRanges {
    Range r{0.020, 0.050, 0.001};
    Range x{5.0, 15.0, 1.0};
    Range k_lo{1.0, 301.0, 1.0};
    Range k_hi{1.0, 301.0, 1.0};
    double k_gap = 1.0;
    void validate() const;
};

struct Candidate {
    double r = 0;
    double x = 0;
    double k_lo = 0;
    double k_hi = 0;
};

struct Moments {
    double mean = 0;
    double stddev = 0;
};

// Mean and standard deviation of the candidate's weight curve at day t under
// the uniform heterogeneity assumption used for fitting.
Moments theoretical_moments(const Candidate& candidate, const growth::QuadratureGrid& quad,
                            double t);

// Mean squared residual between observed weights and the candidate's
// theoretical mean curve.
double loss(const Candidate& candidate, const ObservationSet& obs,
            const growth::QuadratureGrid& quad);

struct FitResult {
    Candidate best;
    double loss = 0;
    long long ties = 1;       // candidates sharing the minimal loss exactly
    long long evaluated = 0;  // feasible candidates scanned
};

// Exhaustive scan over the ranges in lexicographic (r, x, K_lo, K_hi) order;
// ties keep the first candidate in that order. The parallel scan reduces
// deterministically, independent of the thread count.
FitResult grid_search_fit(const ObservationSet& obs, const FitRanges& ranges,
                          const growth::QuadratureGrid& quad, bool parallel = true);

// Plain nested-loop scan kept as the reference for the parallel one.
FitResult grid_search_fit_reference(const ObservationSet& obs, const FitRanges& ranges,
                                    const growth::QuadratureGrid& quad);

}  // namespace harvest::calibrate
