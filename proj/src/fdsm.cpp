#include "spine/fdsm.hpp"

#include <bit>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace spine {

CurveballSampler::CurveballSampler(BipartiteGraph observed, std::uint64_t seed, CurveballSchedule schedule)
    : state_(std::move(observed)), rng_(seed), schedule_(schedule) {
    pool_.reserve(state_.artifacts());
}

CurveballSampler::CurveballSampler(BipartiteGraph observed, std::uint64_t seed)
    : CurveballSampler(observed, seed, CurveballSchedule::defaults(observed.agents())) {}

void CurveballSampler::step() {
    const std::size_t m = state_.agents();
    if (m < 2) return;
    const std::size_t i = rng_.below(m);
    std::size_t j = rng_.below(m - 1);
    if (j >= i) ++j;

    const std::size_t words = state_.words_per_row_;
    std::uint64_t* a = state_.bits_.data() + i * words;
    std::uint64_t* b = state_.bits_.data() + j * words;
    pool_.clear();
    std::size_t keep_i = 0;
    for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t exclusive = a[w] ^ b[w];
        if (!exclusive) continue;
        keep_i += static_cast<std::size_t>(std::popcount(a[w] & exclusive));
        for (std::uint64_t bits = exclusive; bits; bits &= bits - 1) {
            pool_.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        }
        a[w] &= ~exclusive;
        b[w] &= ~exclusive;
    }
    if (pool_.empty()) return;

    // Uniform subset of size keep_i for row i (partial Fisher-Yates).
    for (std::size_t t = 0; t < keep_i; ++t) {
        const std::size_t r = t + rng_.below(pool_.size() - t);
        std::swap(pool_[t], pool_[r]);
    }
    for (std::size_t t = 0; t < pool_.size(); ++t) {
        const std::size_t k = pool_[t];
        std::uint64_t* row = t < keep_i ? a : b;
        row[k / 64] |= std::uint64_t{1} << (k % 64);
    }
}

BipartiteGraph CurveballSampler::sample() {
    if (!burned_in_) {
        for (std::size_t s = 0; s < schedule_.burn_in; ++s) step();
        burned_in_ = true;
    }
    for (std::size_t s = 0; s < schedule_.thinning; ++s) step();
    return state_;
}

namespace {

struct PairCounts {
    std::vector<std::int64_t> ge;
    std::vector<std::int64_t> le;
};

// Upper-triangle pair index for i < j.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t m) {
    return i * m - i * (i + 1) / 2 + (j - i - 1);
}

PairCounts run_chain(const BipartiteGraph& g, const Projection& observed, std::size_t trials,
                     std::uint64_t seed, CurveballSchedule schedule) {
    const std::size_t m = g.agents();
    const std::size_t pairs = m * (m - 1) / 2;
    PairCounts counts{std::vector<std::int64_t>(pairs, 0), std::vector<std::int64_t>(pairs, 0)};
    CurveballSampler sampler(g, seed, schedule);
    for (std::size_t s = 0; s < schedule.burn_in; ++s) sampler.step();
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t s = 0; s < schedule.thinning; ++s) sampler.step();
        sampler.for_each_pair([&](std::size_t i, std::size_t j, int w) {
            const int obs = observed.weight(i, j);
            const std::size_t idx = pair_index(i, j, m);
            counts.ge[idx] += w >= obs;
            counts.le[idx] += w <= obs;
        });
    }
    return counts;
}

}  // namespace

McPvalues fdsm_pvalues(const BipartiteGraph& g, const FdsmOptions& options) {
    if (options.trials < 1) throw std::invalid_argument("fdsm_pvalues: trials must be at least 1");
    const std::size_t m = g.agents();
    CurveballSchedule schedule = CurveballSchedule::defaults(m);
    if (options.burn_in != static_cast<std::size_t>(-1)) schedule.burn_in = options.burn_in;
    if (options.thinning != static_cast<std::size_t>(-1)) schedule.thinning = options.thinning;

    const Projection observed = project(g);
    const unsigned workers = std::max(1U, std::min<unsigned>(options.workers, static_cast<unsigned>(options.trials)));
    std::vector<PairCounts> partial(workers);
    auto work = [&](unsigned w) {
        const std::size_t share = options.trials / workers + (w < options.trials % workers ? 1 : 0);
        partial[w] = run_chain(g, observed, share, derive_seed(options.seed, {w}), schedule);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    McPvalues out;
    out.agents = m;
    out.trials = options.trials;
    out.ge_counts.assign(m * m, static_cast<std::int64_t>(options.trials));
    out.le_counts.assign(m * m, static_cast<std::int64_t>(options.trials));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const std::size_t idx = pair_index(i, j, m);
            std::int64_t ge = 0;
            std::int64_t le = 0;
            for (const auto& p : partial) {
                ge += p.ge[idx];
                le += p.le[idx];
            }
            out.ge_counts[i * m + j] = out.ge_counts[j * m + i] = ge;
            out.le_counts[i * m + j] = out.le_counts[j * m + i] = le;
        }
    }
    return out;
}

double normal_critical_value(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("normal_critical_value: rate outside (0,1)");
    const boost::math::normal standard;
    return boost::math::quantile(boost::math::complement(standard, eps));
}

TrialRequirement required_trials(double p_est, double alpha_star, double eps1, double eps2) {
    if (!(alpha_star > 0.0 && alpha_star < 1.0)) throw std::domain_error("required_trials: alpha* outside (0,1)");
    if (!(p_est >= 0.0 && p_est < 1.0)) throw std::domain_error("required_trials: p-value estimate outside [0,1)");
    if (p_est == alpha_star) {
        throw std::domain_error("required_trials: estimate equals alpha*; the edge is undecidable");
    }
    const double z1 = normal_critical_value(eps1);
    const double z2 = normal_critical_value(eps2);
    const double gap = p_est - alpha_star;
    const double root = (z1 * std::sqrt(alpha_star * (1.0 - alpha_star)) + z2 * std::sqrt(p_est * (1.0 - p_est))) / gap;
    TrialRequirement req;
    req.raw = root * root;
    req.initial = static_cast<std::int64_t>(std::ceil(req.raw));
    req.adjusted = req.initial + static_cast<std::int64_t>(std::ceil(1.0 / std::abs(gap)));
    return req;
}

}  // namespace spine
