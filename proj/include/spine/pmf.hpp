#pragma once

// Exact null distributions of a projection edge weight P*_ij.
//
// Fixed fill (FFM), fixed row (FRM), fixed column (FCM) and stochastic degree
// sequence (SDSM) ensembles all admit closed forms. Binomial coefficients are
// evaluated through log-gamma and the FFM inner sum through log-sum-exp, since
// the raw counts overflow doubles for any realistic matrix.

#include <cstdint>
#include <span>
#include <vector>

namespace spine {

// Distribution on {0, ..., support_max}.
class Pmf {
public:
    static Pmf from_probs(std::vector<double> probs);
    static Pmf from_log_probs(std::vector<double> log_probs);

    int support_max() const { return static_cast<int>(probs_.size()) - 1; }
    std::span<const double> probs() const { return probs_; }
    std::span<const double> log_probs() const { return log_probs_; }
    double operator[](int k) const {
        return (k < 0 || k > support_max()) ? 0.0 : probs_[static_cast<std::size_t>(k)];
    }
    double total() const;

private:
    Pmf() = default;
    std::vector<double> probs_;
    std::vector<double> log_probs_;
};

// log C(n, k); -inf when k < 0 or k > n (out-of-support terms contribute zero).
double log_choose(std::int64_t n, std::int64_t k);

// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
double log_add_exp(double a, double b);

// Fixed fill model: all m x n matrices with exactly `fill` ones, uniformly.
Pmf ffm_pmf(std::int64_t agents, std::int64_t artifacts, std::int64_t fill);

// Fixed row model: hypergeometric overlap of two rows with sums ri, rj.
Pmf frm_pmf(std::int64_t artifacts, std::int64_t ri, std::int64_t rj);

// Sum of independent Bernoulli(p_k), by exact O(n^2) convolution.
Pmf poisson_binomial(std::span<const double> params);

// Fixed column model: Poisson binomial with p_k = c_k (c_k - 1) / (m (m - 1)).
Pmf fcm_pmf(std::int64_t agents, std::span<const int> col_sums);
std::vector<double> fcm_params(std::int64_t agents, std::span<const int> col_sums);

// Stochastic degree sequence model: Poisson binomial with p_k = p_ik * p_jk.
Pmf sdsm_pmf(std::span<const double> probs_i, std::span<const double> probs_j);

// Inclusive tails: upper = Pr(X >= k), lower = Pr(X <= k).
double upper_tail(const Pmf& pmf, int k);
double lower_tail(const Pmf& pmf, int k);

struct Tails {
    double upper = 1.0;  // Pr(X >= k)
    double lower = 1.0;  // Pr(X <= k)
};

// Both tails of a Poisson binomial at k without materialising the full PMF.
// Runs the convolution over states {0..k} plus one absorbing state for
// "more than k", so the cost is O(n k) and the upper tail carries no
// cancellation error.
Tails poisson_binomial_tails(std::span<const double> params, int k);

}  // namespace spine
