#include "harvest/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace harvest::calibrate {

void ObservationSet::validate() const {
    if (records.empty()) throw InputError("observation set is empty");
    for (const Observation& ob : records) {
        if (!(ob.t >= 0.0) || !std::isfinite(ob.t))
            throw InputError("observation times must be nonnegative");
        if (!(ob.w > 0.0) || !std::isfinite(ob.w))
            throw InputError("observed weights must be positive");
    }
}

int Range::count() const {
    if (!(step > 0.0) || !(max >= min)) return 0;
    return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

void Range::validate(const char* name) const {
    if (!(step > 0.0)) throw ConfigError(std::string(name) + " range needs a positive step");
    if (!(max >= min)) throw ConfigError(std::string(name) + " range is empty");
}

void FitRanges::validate() const {
    r.validate("r");
    x.validate("x");
    k_lo.validate("k_lo");
    k_hi.validate("k_hi");
    if (!(k_gap >= 0.0)) throw ConfigError("k_gap must be nonnegative");
}

namespace {

// Theoretical mean with the time decay exp(-r t) hoisted out; matches the
// per-node logistic evaluation bit for bit.
double mean_given_decay(const Candidate& c, const growth::QuadratureGrid& quad, double decay) {
    double mass = 0.0;
    double acc = 0.0;
    for (int m = 0; m < quad.n(); ++m) {
        double u = quad.node(m);
        double k = c.k_lo + u * (c.k_hi - c.k_lo);
        double value = k / (1.0 + (k / c.x - 1.0) * decay);
        double w = quad.du();
        mass += w;
        acc += value * w;
    }
    return acc / mass;
}

struct Running {
    double best_loss = std::numeric_limits<double>::infinity();
    long long best_index = -1;
    long long ties = 0;
    long long evaluated = 0;

    void take(double value, long long index) {
        ++evaluated;
        if (value < best_loss) {
            best_loss = value;
            best_index = index;
            ties = 1;
        } else if (value == best_loss) {
            ++ties;
            if (index < best_index) best_index = index;
        }
    }
};

struct CandidateGrid {
    const FitRanges& ranges;
    long long nr, nx, nkl, nkh;

    explicit CandidateGrid(const FitRanges& fr)
        : ranges(fr), nr(fr.r.count()), nx(fr.x.count()), nkl(fr.k_lo.count()),
          nkh(fr.k_hi.count()) {}
    long long total() const { return nr * nx * nkl * nkh; }
    Candidate decode(long long index) const {
        int ikh = static_cast<int>(index % nkh);
        index /= nkh;
        int ikl = static_cast<int>(index % nkl);
        index /= nkl;
        int ix = static_cast<int>(index % nx);
        int ir = static_cast<int>(index / nx);
        return {ranges.r.value(ir), ranges.x.value(ix), ranges.k_lo.value(ikl),
                ranges.k_hi.value(ikh)};
    }
    bool feasible(const Candidate& c) const {
        return c.k_hi >= c.k_lo + ranges.k_gap && c.x <= c.k_lo;
    }
};

FitResult finish(const CandidateGrid& grid, const Running& run) {
    if (run.evaluated == 0) throw ConfigError("no feasible candidate in the search ranges");
    FitResult result;
    result.best = grid.decode(run.best_index);
    result.loss = run.best_loss;
    result.ties = run.ties;
    result.evaluated = run.evaluated;
    return result;
}

}  // namespace

Moments theoretical_moments(const Candidate& candidate, const growth::QuadratureGrid& quad,
                            double t) {
    if (!(t >= 0.0)) throw InputError("time must be nonnegative");
    if (!(candidate.x > 0.0) || !(candidate.r > 0.0) || !(candidate.k_lo > 0.0) ||
        !(candidate.k_hi >= candidate.k_lo))
        throw InputError("candidate parameters must be positive with k_hi >= k_lo");
    double decay = std::exp(-candidate.r * t);
    double mean = mean_given_decay(candidate, quad, decay);
    double mass = 0.0;
    double var = 0.0;
    for (int m = 0; m < quad.n(); ++m) {
        double u = quad.node(m);
        double k = candidate.k_lo + u * (candidate.k_hi - candidate.k_lo);
        double value = k / (1.0 + (k / candidate.x - 1.0) * decay);
        double dev = value - mean;
        double w = quad.du();
        mass += w;
        var += dev * dev * w;
    }
    return {mean, std::sqrt(std::max(var / mass, 0.0))};
}

double loss(const Candidate& candidate, const ObservationSet& obs,
            const growth::QuadratureGrid& quad) {
    obs.validate();
    double acc = 0.0;
    for (const Observation& ob : obs.records) {
        double mean = mean_given_decay(candidate, quad, std::exp(-candidate.r * ob.t));
        double d = ob.w - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(obs.records.size());
}

FitResult grid_search_fit(const ObservationSet& obs, const FitRanges& ranges,
                          const growth::QuadratureGrid& quad, bool parallel) {
    obs.validate();
    ranges.validate();
    CandidateGrid grid(ranges);
    const long long total = grid.total();
    const size_t n_obs = obs.records.size();

    // exp(-r t) reused across every (x, K_lo, K_hi) combination
    std::vector<double> decay(static_cast<size_t>(grid.nr) * n_obs);
    for (long long ir = 0; ir < grid.nr; ++ir)
        for (size_t io = 0; io < n_obs; ++io)
            decay[static_cast<size_t>(ir) * n_obs + io] =
                std::exp(-ranges.r.value(static_cast<int>(ir)) * obs.records[io].t);

    int max_threads = 1;
#ifdef _OPENMP
    if (parallel) max_threads = omp_get_max_threads();
#endif
    std::vector<Running> locals(static_cast<size_t>(max_threads));

#pragma omp parallel if (parallel)
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        Running local;
#pragma omp for schedule(static)
        for (long long index = 0; index < total; ++index) {
            Candidate c = grid.decode(index);
            if (!grid.feasible(c)) continue;
            long long ir = index / (grid.nx * grid.nkl * grid.nkh);
            double acc = 0.0;
            for (size_t io = 0; io < n_obs; ++io) {
                double mean =
                    mean_given_decay(c, quad, decay[static_cast<size_t>(ir) * n_obs + io]);
                double d = obs.records[io].w - mean;
                acc += d * d;
            }
            local.take(acc / static_cast<double>(n_obs), index);
        }
        locals[static_cast<size_t>(tid)] = local;
    }

    // The merged minimum and tie count do not depend on how the index space
    // was partitioned.
    Running merged;
    for (const Running& local : locals) {
        merged.evaluated += local.evaluated;
        if (local.best_index < 0) continue;
        if (local.best_loss < merged.best_loss) {
            merged.best_loss = local.best_loss;
            merged.best_index = local.best_index;
            merged.ties = local.ties;
        } else if (local.best_loss == merged.best_loss) {
            merged.ties += local.ties;
            if (local.best_index < merged.best_index) merged.best_index = local.best_index;
        }
    }
    return finish(grid, merged);
}

FitResult grid_search_fit_reference(const ObservationSet& obs, const FitRanges& ranges,
                                    const growth::QuadratureGrid& quad) {
    obs.validate();
    ranges.validate();
    CandidateGrid grid(ranges);
    Running run;
    long long index = 0;
    for (int ir = 0; ir < grid.nr; ++ir)
        for (int ix = 0; ix < grid.nx; ++ix)
            for (int ikl = 0; ikl < grid.nkl; ++ikl)
                for (int ikh = 0; ikh < grid.nkh; ++ikh, ++index) {
                    Candidate c{ranges.r.value(ir), ranges.x.value(ix), ranges.k_lo.value(ikl),
                                ranges.k_hi.value(ikh)};
                    if (!grid.feasible(c)) continue;
                    run.take(loss(c, obs, quad), index);
                }
    return finish(grid, run);
}

}  // namespace harvest::calibrate
