#include "spine/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spine {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Reentrant log-gamma: std::lgamma writes the global signgam on glibc.
// Extended precision, since log C(n,k) for n in the millions is a
// difference of terms near 1e7 and double leaves only ~1e-9 of it.
long double log_gamma(long double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgammal_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(std::string(what) + ": parameter " + std::to_string(p) + " outside [0,1]");
    }
}

}  // namespace

Pmf Pmf::from_probs(std::vector<double> probs) {
    Pmf pmf;
    pmf.log_probs_.resize(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        pmf.log_probs_[k] = probs[k] > 0.0 ? std::log(probs[k]) : kNegInf;
    }
    pmf.probs_ = std::move(probs);
    return pmf;
}

Pmf Pmf::from_log_probs(std::vector<double> log_probs) {
    Pmf pmf;
    pmf.probs_.resize(log_probs.size());
    for (std::size_t k = 0; k < log_probs.size(); ++k) pmf.probs_[k] = std::exp(log_probs[k]);
    pmf.log_probs_ = std::move(log_probs);
    return pmf;
}

double Pmf::total() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
}

double log_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) return kNegInf;
    if (k == 0 || k == n) return 0.0;
    const auto nd = static_cast<long double>(n);
    const auto kd = static_cast<long double>(k);
    return static_cast<double>(log_gamma(nd + 1.0L) - log_gamma(kd + 1.0L) - log_gamma(nd - kd + 1.0L));
}

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

Pmf ffm_pmf(std::int64_t agents, std::int64_t artifacts, std::int64_t fill) {
    if (agents < 2) throw std::invalid_argument("ffm_pmf: need at least two agents");
    if (artifacts < 1) throw std::invalid_argument("ffm_pmf: need at least one artifact");
    const std::int64_t cells = agents * artifacts;
    if (fill < 0 || fill > cells) {
        throw std::invalid_argument("ffm_pmf: fill " + std::to_string(fill) + " outside [0," +
                                    std::to_string(cells) + "]");
    }
    const std::int64_t n = artifacts;
    const std::int64_t rest = (agents - 2) * n;
    const double log_total = log_choose(cells, fill);
    const double log2 = std::log(2.0);

    std::vector<double> log_probs(static_cast<std::size_t>(n + 1), kNegInf);
    for (std::int64_t k = 0; k <= n; ++k) {
        // Columns outside the k shared ones: r are empty in both rows, the
        // other n-k-r hold exactly one of the two rows (2 ways each); the
        // remaining ones go anywhere in the other m-2 rows.
        double inner = kNegInf;
        const std::int64_t r_lo = std::max<std::int64_t>(0, n + k - fill);
        const std::int64_t r_hi = std::min<std::int64_t>(n - k, rest - fill + n + k);
        for (std::int64_t r = r_lo; r <= r_hi; ++r) {
            const double term = static_cast<double>(n - k - r) * log2 + log_choose(n - k, r) +
                                log_choose(rest, fill - n - k + r);
            inner = log_add_exp(inner, term);
        }
        if (inner == kNegInf) continue;
        log_probs[static_cast<std::size_t>(k)] = log_choose(n, k) + inner - log_total;
    }
    return Pmf::from_log_probs(std::move(log_probs));
}

Pmf frm_pmf(std::int64_t artifacts, std::int64_t ri, std::int64_t rj) {
    const std::int64_t n = artifacts;
    if (n < 1) throw std::invalid_argument("frm_pmf: need at least one artifact");
    if (ri < 0 || rj < 0 || ri > n || rj > n) {
        throw std::invalid_argument("frm_pmf: row sum outside [0," + std::to_string(n) + "]");
    }
    std::vector<double> log_probs(static_cast<std::size_t>(n + 1), kNegInf);
    const double log_total = log_choose(n, ri);
    const std::int64_t lo = std::max<std::int64_t>(0, ri + rj - n);
    const std::int64_t hi = std::min(ri, rj);
    for (std::int64_t k = lo; k <= hi; ++k) {
        log_probs[static_cast<std::size_t>(k)] =
            log_choose(rj, k) + log_choose(n - rj, ri - k) - log_total;
    }
    return Pmf::from_log_probs(std::move(log_probs));
}

Pmf poisson_binomial(std::span<const double> params) {
    for (double p : params) check_probability(p, "poisson_binomial");
    std::vector<double> dp(params.size() + 1, 0.0);
    dp[0] = 1.0;
    std::size_t reach = 0;
    for (double p : params) {
        const double q = 1.0 - p;
        ++reach;
        dp[reach] = dp[reach - 1] * p;
        for (std::size_t j = reach - 1; j > 0; --j) dp[j] = dp[j] * q + dp[j - 1] * p;
        dp[0] *= q;
    }
    return Pmf::from_probs(std::move(dp));
}

std::vector<double> fcm_params(std::int64_t agents, std::span<const int> col_sums) {
    if (agents < 2) throw std::invalid_argument("fcm_pmf: need at least two agents");
    const double denom = static_cast<double>(agents) * static_cast<double>(agents - 1);
    std::vector<double> params;
    params.reserve(col_sums.size());
    for (int c : col_sums) {
        if (c < 0 || c > agents) {
            throw std::invalid_argument("fcm_pmf: column sum " + std::to_string(c) + " outside [0,m]");
        }
        params.push_back(static_cast<double>(c) * static_cast<double>(c - 1) / denom);
    }
    return params;
}

Pmf fcm_pmf(std::int64_t agents, std::span<const int> col_sums) {
    return poisson_binomial(fcm_params(agents, col_sums));
}

Pmf sdsm_pmf(std::span<const double> probs_i, std::span<const double> probs_j) {
    if (probs_i.size() != probs_j.size()) {
        throw std::invalid_argument("sdsm_pmf: rows have different lengths");
    }
    std::vector<double> params(probs_i.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        check_probability(probs_i[k], "sdsm_pmf");
        check_probability(probs_j[k], "sdsm_pmf");
        params[k] = probs_i[k] * probs_j[k];
    }
    return poisson_binomial(params);
}

double upper_tail(const Pmf& pmf, int k) {
    if (k <= 0) return 1.0;
    const auto probs = pmf.probs();
    double s = 0.0;
    for (int t = pmf.support_max(); t >= k; --t) s += probs[static_cast<std::size_t>(t)];
    return std::min(s, 1.0);
}

double lower_tail(const Pmf& pmf, int k) {
    if (k < 0) return 0.0;
    if (k >= pmf.support_max()) return 1.0;
    const auto probs = pmf.probs();
    double s = 0.0;
    for (int t = 0; t <= k; ++t) s += probs[static_cast<std::size_t>(t)];
    return std::min(s, 1.0);
}

Tails poisson_binomial_tails(std::span<const double> params, int k) {
    for (double p : params) check_probability(p, "poisson_binomial_tails");
    const int n = static_cast<int>(params.size());
    if (k <= 0) {
        Tails t{1.0, 0.0};
        if (k == 0) {
            double none = 1.0;
            for (double p : params) none *= 1.0 - p;
            t.lower = none;
        }
        return t;
    }
    if (k > n) return {0.0, 1.0};

    const auto states = static_cast<std::size_t>(k) + 1;
    std::vector<double> dp(states, 0.0);
    dp[0] = 1.0;
    double beyond = 0.0;  // mass on counts > k
    std::size_t reach = 0;
    for (double p : params) {
        const double q = 1.0 - p;
        if (reach == states - 1) {
            beyond += dp[reach] * p;
        } else {
            ++reach;
            dp[reach] = 0.0;
        }
        for (std::size_t j = reach; j > 0; --j) dp[j] = dp[j] * q + dp[j - 1] * p;
        dp[0] *= q;
    }
    double lower = 0.0;
    for (double v : dp) lower += v;
    return {std::min(dp[states - 1] + beyond, 1.0), std::min(lower, 1.0)};
}

}  // namespace spine
