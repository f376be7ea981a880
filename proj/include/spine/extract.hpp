#pragma once

// Edge significance tests under each null ensemble, familywise corrections,
// and the thresholding that turns p-values into a backbone.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spine/bigraph.hpp"
#include "spine/cellprob.hpp"
#include "spine/fdsm.hpp"

namespace spine {

enum class NullModel { ffm, frm, fcm, sdsm, fdsm };
enum class TailMode { one, two };
enum class Correction { none, bonferroni, holm, fdr };

std::string_view to_string(NullModel model);
std::string_view to_string(Correction correction);
// Throw std::invalid_argument on unknown names.
NullModel parse_null_model(std::string_view name);
Correction parse_correction(std::string_view name);

struct TestConfig {
    NullModel model = NullModel::sdsm;
    double alpha = 0.05;
    TailMode tails = TailMode::two;
    Correction correction = Correction::none;
    CellProbMethod sdsm_method = CellProbMethod::bicm;
    FdsmOptions fdsm;       // trials, seed, chain count
    unsigned workers = 1;   // threads for the analytic per-pair tests

    // Throws std::invalid_argument unless alpha is in (0,1) and trials >= 1.
    void validate() const;
};

// Both inclusive tails for every unordered pair, row-major and symmetric.
struct EdgePvalues {
    std::size_t agents = 0;
    std::vector<double> upper;
    std::vector<double> lower;
    std::vector<std::string> warnings;

    double upper_at(std::size_t i, std::size_t j) const { return upper[i * agents + j]; }
    double lower_at(std::size_t i, std::size_t j) const { return lower[i * agents + j]; }
};

// p-values under the configured model; alpha and correction are ignored.
EdgePvalues edge_pvalues(const BipartiteGraph& g, const TestConfig& cfg);

// SDSM p-values from a caller-supplied probability matrix.
EdgePvalues sdsm_pvalues(const BipartiteGraph& g, const CellProbMatrix& probs, unsigned workers = 1);

// Number of tests t: off-diagonal unordered pairs with non-zero weight.
std::size_t test_count(const Projection& p);

// Decisions for a family of p-values. Bonferroni rejects p < alpha/t; Holm
// walks the sorted values and stops at the first p_(i) >= alpha/(t-i+1);
// Benjamini-Hochberg rejects every p_(i) with i <= max{i : p_(i) <= i alpha/t}.
std::vector<bool> correct(std::span<const double> pvalues, double alpha, Correction method);

// 1 - (1 - alpha)^t.
double fwer(double alpha, std::size_t t);

// alpha/2 for two-tailed tests, alpha otherwise.
double tail_alpha(double alpha, TailMode tails);

// Threshold already computed p-values. Only the upper tail decides
// retention; both tails are copied into the backbone.
Backbone apply_threshold(const EdgePvalues& pv, const Projection& p, double alpha, TailMode tails,
                         Correction correction);

Backbone extract_backbone(const BipartiteGraph& g, const TestConfig& cfg);

}  // namespace spine
