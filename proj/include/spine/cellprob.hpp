#pragma once

// Estimators of SDSM cell-filling probabilities p*_ik, each approximating
// Pr(B*_ik = 1) over the fixed-degree-sequence ensemble of the observed graph.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spine/bigraph.hpp"

namespace spine {

// `exact` tags marginals taken from a full ensemble enumeration.
enum class CellProbMethod { rcf, lpm, lpm_i, logit, logit_i, bicm, exact };

std::string_view to_string(CellProbMethod method);
// Accepts the names produced by to_string; throws std::invalid_argument.
CellProbMethod parse_cell_prob_method(std::string_view name);

struct CellProbMatrix {
    std::size_t agents = 0;
    std::size_t artifacts = 0;
    std::vector<double> probs;  // row-major agents x artifacts
    CellProbMethod method = CellProbMethod::bicm;
    std::vector<std::string> warnings;

    double at(std::size_t i, std::size_t k) const { return probs[i * artifacts + k]; }
    std::span<const double> row(std::size_t i) const { return {probs.data() + i * artifacts, artifacts}; }
};

// A predictor is an exact linear combination of the predictors kept before
// it, after constant predictors have been dropped.
class DegenerateDesign : public std::runtime_error {
public:
    DegenerateDesign(std::string predictor, const std::string& what)
        : std::runtime_error(what), predictor_(std::move(predictor)) {}
    const std::string& predictor() const { return predictor_; }

private:
    std::string predictor_;
};

class BicmNonConvergence : public std::runtime_error {
public:
    BicmNonConvergence(double residual, const std::string& what)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// p_ik = clamp(r_i c_k / f, 0, 1). Throws std::invalid_argument when f = 0.
CellProbMatrix rcf(const BipartiteGraph& g);

// Linear probability model: OLS of B_ik on (1, r_i, c_k[, r_i c_k]) with the
// fitted values truncated to [0, 1].
CellProbMatrix lpm(const BipartiteGraph& g, bool interaction);

// Logistic regression of B_ik on the same predictors, fitted by iteratively
// reweighted least squares. Throws std::invalid_argument when the response
// is constant (f = 0 or f = mn).
CellProbMatrix logit(const BipartiteGraph& g, bool interaction);

struct BicmOptions {
    int max_iterations = 10000;
    double tolerance = 1e-10;  // max absolute margin residual
};

// Bipartite configuration model: p_ik = x_i y_k / (1 + x_i y_k) with
// fitnesses chosen so expected margins equal the observed degrees.
CellProbMatrix bicm(const BipartiteGraph& g, const BicmOptions& options = {});

// Same, from degree sequences alone.
CellProbMatrix bicm(std::span<const int> row_sums, std::span<const int> col_sums,
                    const BicmOptions& options = {});

CellProbMatrix estimate_cell_probs(const BipartiteGraph& g, CellProbMethod method);

// Mean absolute difference over all cells.
double accuracy(const CellProbMatrix& estimate, const CellProbMatrix& truth);

namespace detail {

struct Predictor {
    std::string name;
    std::vector<double> values;  // one per observation
};

// Ordinary least squares with the intercept implied. Predictors that are
// constant are dropped first; any remaining collinearity throws
// DegenerateDesign naming the offending predictor. Returns fitted values.
std::vector<double> least_squares_fit(const std::vector<Predictor>& predictors,
                                      std::span<const double> response);

}  // namespace detail

}  // namespace spine
