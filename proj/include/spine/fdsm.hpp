#pragma once

// Fixed degree sequence model. The edge-weight distribution has no known
// closed form, so p-values come from uniform samples of the ensemble drawn
// with the curveball algorithm.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spine/bigraph.hpp"
#include "spine/rng.hpp"

namespace spine {

// Trades applied before the first sample and between retained samples.
struct CurveballSchedule {
    std::size_t burn_in = 0;
    std::size_t thinning = 0;

    // 100 m trades of burn-in, 5 m between samples.
    static CurveballSchedule defaults(std::size_t agents) { return {100 * agents, 5 * agents}; }
};

class CurveballSampler {
public:
    CurveballSampler(BipartiteGraph observed, std::uint64_t seed, CurveballSchedule schedule);
    CurveballSampler(BipartiteGraph observed, std::uint64_t seed);

    // One trade between two distinct rows chosen uniformly: the artifacts
    // held by exactly one of the two rows are pooled and redistributed
    // uniformly, keeping each row's count.
    void step();

    // Burn-in on first call, then `thinning` trades; returns a copy.
    BipartiteGraph sample();

    const BipartiteGraph& state() const { return state_; }
    const CurveballSchedule& schedule() const { return schedule_; }

    // Number of co-occurrences in the current state compared against an
    // observed projection, accumulated without materialising P*.
    template <typename Visit>
    void for_each_pair(Visit&& visit) const {
        const std::size_t m = state_.agents();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) visit(i, j, shared_count(state_, i, j));
    }

private:
    BipartiteGraph state_;
    Rng rng_;
    CurveballSchedule schedule_;
    bool burned_in_ = false;
    std::vector<std::size_t> pool_;
};

// Trial counts against the observed projection. Matrices are row-major
// agents x agents and symmetric; the diagonal is unused.
struct McPvalues {
    std::size_t agents = 0;
    std::size_t trials = 0;
    std::vector<std::int64_t> ge_counts;  // trials with P*_ij >= P_ij
    std::vector<std::int64_t> le_counts;  // trials with P*_ij <= P_ij

    double upper(std::size_t i, std::size_t j) const {
        return static_cast<double>(ge_counts[i * agents + j]) / static_cast<double>(trials);
    }
    double lower(std::size_t i, std::size_t j) const {
        return static_cast<double>(le_counts[i * agents + j]) / static_cast<double>(trials);
    }
};

struct FdsmOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    // Unset fields fall back to CurveballSchedule::defaults(m).
    std::size_t burn_in = static_cast<std::size_t>(-1);
    std::size_t thinning = static_cast<std::size_t>(-1);
};

// Each worker runs its own chain seeded from (seed, worker index); counts
// merge by addition, so the result is fixed for a given (seed, workers).
McPvalues fdsm_pvalues(const BipartiteGraph& g, const FdsmOptions& options);

struct TrialRequirement {
    double raw = 0.0;           // unrounded power-analysis bound
    std::int64_t initial = 0;   // N
    std::int64_t adjusted = 0;  // N' = N + ceil(1 / |p - alpha*|)
};

// Monte Carlo trials needed to decide whether an estimated p-value differs
// from alpha_star with one-sided type I rate eps1 and type II rate eps2.
// Throws std::domain_error when p_est == alpha_star (undecidable edge).
TrialRequirement required_trials(double p_est, double alpha_star, double eps1, double eps2);

// Upper standard normal critical value z_eps, i.e. Phi^{-1}(1 - eps).
double normal_critical_value(double eps);

}  // namespace spine
