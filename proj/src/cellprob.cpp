#include "spine/cellprob.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "spine/oracle.hpp"

namespace spine {

std::string_view to_string(CellProbMethod method) {
    switch (method) {
        case CellProbMethod::rcf: return "rcf";
        case CellProbMethod::lpm: return "lpm";
        case CellProbMethod::lpm_i: return "lpm_i";
        case CellProbMethod::logit: return "logit";
        case CellProbMethod::logit_i: return "logit_i";
        case CellProbMethod::bicm: return "bicm";
        case CellProbMethod::exact: return "exact";
    }
    return "unknown";
}

CellProbMethod parse_cell_prob_method(std::string_view name) {
    for (auto m : {CellProbMethod::rcf, CellProbMethod::lpm, CellProbMethod::lpm_i,
                   CellProbMethod::logit, CellProbMethod::logit_i, CellProbMethod::bicm}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown cell probability method '" + std::string(name) + "'");
}

CellProbMatrix rcf(const BipartiteGraph& g) {
    if (g.fill() == 0) throw std::invalid_argument("rcf: graph has no edges (f = 0)");
    CellProbMatrix out{g.agents(), g.artifacts(), {}, CellProbMethod::rcf, {}};
    out.probs.resize(g.agents() * g.artifacts());
    const auto f = static_cast<double>(g.fill());
    for (std::size_t i = 0; i < g.agents(); ++i) {
        for (std::size_t k = 0; k < g.artifacts(); ++k) {
            const double p = static_cast<double>(g.row_sums()[i]) * g.col_sums()[k] / f;
            out.probs[i * g.artifacts() + k] = std::clamp(p, 0.0, 1.0);
        }
    }
    return out;
}

namespace {

// Observations that share predictor values are collapsed into one weighted
// row: `count` cells, `ones` of which are filled.
struct GroupedDesign {
    std::vector<std::string> names;  // kept predictors, intercept excluded
    Eigen::MatrixXd x;               // groups x (1 + kept), scaled columns
    Eigen::VectorXd count;
    Eigen::VectorXd ones;
};

bool is_constant(const Eigen::VectorXd& column, const Eigen::VectorXd& weight) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index g = 0; g < column.size(); ++g) {
        if (weight[g] <= 0.0) continue;
        lo = std::min(lo, column[g]);
        hi = std::max(hi, column[g]);
    }
    return !(hi - lo > 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)}));
}

// Adds columns in order, dropping constants and rejecting collinear ones.
GroupedDesign build_design(std::vector<std::string> names, std::vector<Eigen::VectorXd> columns,
                           Eigen::VectorXd count, Eigen::VectorXd ones) {
    const Eigen::Index groups = count.size();
    GroupedDesign d;
    d.count = std::move(count);
    d.ones = std::move(ones);
    std::vector<Eigen::VectorXd> kept{Eigen::VectorXd::Ones(groups)};
    const Eigen::VectorXd sqrt_w = d.count.cwiseSqrt();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        Eigen::VectorXd col = columns[c];
        if (is_constant(col, d.count)) continue;
        const double scale = col.cwiseAbs().maxCoeff();
        col /= scale;
        const Eigen::VectorXd wc = sqrt_w.cwiseProduct(col);
        auto spanned_by = [&](const std::vector<const Eigen::VectorXd*>& basis_cols) {
            Eigen::MatrixXd basis(groups, static_cast<Eigen::Index>(basis_cols.size()));
            for (std::size_t j = 0; j < basis_cols.size(); ++j)
                basis.col(static_cast<Eigen::Index>(j)) = *basis_cols[j];
            const Eigen::MatrixXd wb = sqrt_w.asDiagonal() * basis;
            const Eigen::VectorXd coef = wb.colPivHouseholderQr().solve(wc);
            return (wc - wb * coef).norm() <= 1e-9 * wc.norm();
        };
        // An affine copy of a single kept predictor (e.g. r*c when every r is
        // equal) is a duplicate and is dropped.
        bool duplicate = false;
        for (std::size_t j = 1; j < kept.size() && !duplicate; ++j) duplicate = spanned_by({&kept[0], &kept[j]});
        if (duplicate) continue;
        std::vector<const Eigen::VectorXd*> all;
        for (const auto& k : kept) all.push_back(&k);
        if (spanned_by(all)) {
            throw DegenerateDesign(names[c], "degenerate design: predictor '" + names[c] +
                                                 "' is collinear with the predictors before it");
        }
        kept.push_back(col);
        d.names.push_back(names[c]);
    }
    d.x.resize(groups, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) d.x.col(static_cast<Eigen::Index>(j)) = kept[j];
    return d;
}

struct DegreeGroups {
    std::vector<int> row_values;
    std::vector<int> col_values;
    std::vector<std::size_t> row_class;  // per agent
    std::vector<std::size_t> col_class;  // per artifact
    Eigen::VectorXd count;               // row_class * ncols + col_class
    Eigen::VectorXd ones;
};

DegreeGroups group_by_degree(const BipartiteGraph& g) {
    DegreeGroups d;
    std::map<int, std::size_t> rindex;
    std::map<int, std::size_t> cindex;
    for (int r : g.row_sums()) rindex.emplace(r, 0);
    for (int c : g.col_sums()) cindex.emplace(c, 0);
    for (auto& [v, idx] : rindex) { idx = d.row_values.size(); d.row_values.push_back(v); }
    for (auto& [v, idx] : cindex) { idx = d.col_values.size(); d.col_values.push_back(v); }
    const std::size_t nc = d.col_values.size();
    const auto groups = static_cast<Eigen::Index>(d.row_values.size() * nc);
    d.count = Eigen::VectorXd::Zero(groups);
    d.ones = Eigen::VectorXd::Zero(groups);
    for (int r : g.row_sums()) d.row_class.push_back(rindex[r]);
    for (int c : g.col_sums()) d.col_class.push_back(cindex[c]);
    std::vector<double> col_class_size(nc, 0.0);
    for (std::size_t cls : d.col_class) col_class_size[cls] += 1.0;
    for (std::size_t i = 0; i < g.agents(); ++i) {
        const std::size_t base = d.row_class[i] * nc;
        for (std::size_t b = 0; b < nc; ++b) d.count[static_cast<Eigen::Index>(base + b)] += col_class_size[b];
        for (std::size_t k : g.row_items(i)) d.ones[static_cast<Eigen::Index>(base + d.col_class[k])] += 1.0;
    }
    return d;
}

GroupedDesign degree_design(const DegreeGroups& groups, bool interaction) {
    const std::size_t nr = groups.row_values.size();
    const std::size_t nc = groups.col_values.size();
    const auto n = static_cast<Eigen::Index>(nr * nc);
    Eigen::VectorXd r(n), c(n), rc(n);
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            const auto idx = static_cast<Eigen::Index>(a * nc + b);
            r[idx] = groups.row_values[a];
            c[idx] = groups.col_values[b];
            rc[idx] = static_cast<double>(groups.row_values[a]) * groups.col_values[b];
        }
    }
    std::vector<std::string> names{"r", "c"};
    std::vector<Eigen::VectorXd> cols{r, c};
    if (interaction) {
        names.emplace_back("rc");
        cols.push_back(rc);
    }
    return build_design(std::move(names), std::move(cols), groups.count, groups.ones);
}

Eigen::VectorXd ols_fitted(const GroupedDesign& d) {
    const Eigen::VectorXd sqrt_w = d.count.cwiseSqrt();
    // Weighted regression of group means; empty groups carry zero weight.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d.count.size());
    for (Eigen::Index g = 0; g < d.count.size(); ++g) {
        if (d.count[g] > 0) mean[g] = d.ones[g] / d.count[g];
    }
    const Eigen::MatrixXd wx = sqrt_w.asDiagonal() * d.x;
    const Eigen::VectorXd beta = wx.colPivHouseholderQr().solve(sqrt_w.cwiseProduct(mean));
    return d.x * beta;
}

CellProbMatrix expand(const BipartiteGraph& g, const DegreeGroups& groups, const Eigen::VectorXd& fitted,
                      CellProbMethod method) {
    CellProbMatrix out{g.agents(), g.artifacts(), {}, method, {}};
    out.probs.resize(g.agents() * g.artifacts());
    const std::size_t nc = groups.col_values.size();
    for (std::size_t i = 0; i < g.agents(); ++i) {
        for (std::size_t k = 0; k < g.artifacts(); ++k) {
            const auto idx = static_cast<Eigen::Index>(groups.row_class[i] * nc + groups.col_class[k]);
            out.probs[i * g.artifacts() + k] = std::clamp(fitted[idx], 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace

namespace detail {

std::vector<double> least_squares_fit(const std::vector<Predictor>& predictors,
                                      std::span<const double> response) {
    const auto n = static_cast<Eigen::Index>(response.size());
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> cols;
    for (const auto& p : predictors) {
        if (static_cast<Eigen::Index>(p.values.size()) != n) {
            throw std::invalid_argument("least_squares_fit: predictor '" + p.name + "' has wrong length");
        }
        names.push_back(p.name);
        cols.push_back(Eigen::Map<const Eigen::VectorXd>(p.values.data(), n));
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response.data(), n);
    const GroupedDesign d = build_design(std::move(names), std::move(cols), Eigen::VectorXd::Ones(n), y);
    const Eigen::VectorXd fitted = ols_fitted(d);
    return {fitted.data(), fitted.data() + fitted.size()};
}

}  // namespace detail

CellProbMatrix lpm(const BipartiteGraph& g, bool interaction) {
    const DegreeGroups groups = group_by_degree(g);
    const GroupedDesign design = degree_design(groups, interaction);
    return expand(g, groups, ols_fitted(design), interaction ? CellProbMethod::lpm_i : CellProbMethod::lpm);
}

CellProbMatrix logit(const BipartiteGraph& g, bool interaction) {
    const auto cells = static_cast<std::int64_t>(g.agents() * g.artifacts());
    if (g.fill() == 0 || g.fill() == cells) {
        throw std::invalid_argument("logit: response is constant (f = " + std::to_string(g.fill()) + ")");
    }
    const DegreeGroups groups = group_by_degree(g);
    const GroupedDesign d = degree_design(groups, interaction);
    constexpr double kClampLo = 1e-10;
    constexpr double kClampHi = 1.0 - 1e-10;
    constexpr int kMaxIterations = 100;
    constexpr double kScoreTolerance = 1e-8;

    const Eigen::Index p = d.x.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double base = static_cast<double>(g.fill()) / static_cast<double>(cells);
    beta[0] = std::log(base / (1.0 - base));

    auto fitted = [&](const Eigen::VectorXd& b) {
        Eigen::VectorXd mu = d.x * b;
        for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = std::clamp(1.0 / (1.0 + std::exp(-mu[i])), kClampLo, kClampHi);
        return mu;
    };
    auto log_likelihood = [&](const Eigen::VectorXd& mu) {
        double ll = 0.0;
        for (Eigen::Index i = 0; i < mu.size(); ++i) {
            ll += d.ones[i] * std::log(mu[i]) + (d.count[i] - d.ones[i]) * std::log1p(-mu[i]);
        }
        return ll;
    };

    Eigen::VectorXd mu = fitted(beta);
    double ll = log_likelihood(mu);
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        const Eigen::VectorXd score = d.x.transpose() * (d.ones - d.count.cwiseProduct(mu));
        if (score.cwiseAbs().maxCoeff() < kScoreTolerance) {
            converged = true;
            break;
        }
        const Eigen::VectorXd w = d.count.cwiseProduct(mu.cwiseProduct((1.0 - mu.array()).matrix()));
        const Eigen::MatrixXd info = d.x.transpose() * w.asDiagonal() * d.x;
        Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite()) step = info.completeOrthogonalDecomposition().solve(score);
        // Halve until the likelihood stops decreasing.
        double t = 1.0;
        Eigen::VectorXd candidate;
        Eigen::VectorXd candidate_mu;
        double candidate_ll = ll;
        for (int h = 0; h < 30; ++h, t *= 0.5) {
            candidate = beta + t * step;
            candidate_mu = fitted(candidate);
            candidate_ll = log_likelihood(candidate_mu);
            if (candidate_ll >= ll - 1e-12 * std::abs(ll)) break;
        }
        beta = candidate;
        mu = candidate_mu;
        ll = candidate_ll;
    }

    CellProbMatrix out = expand(g, groups, mu, interaction ? CellProbMethod::logit_i : CellProbMethod::logit);
    bool separated = false;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (d.count[i] > 0 && (mu[i] <= kClampLo || mu[i] >= kClampHi)) separated = true;
    }
    if (separated) out.warnings.emplace_back("logit: perfect separation; fitted probabilities clamped to [1e-10, 1-1e-10]");
    if (!converged) out.warnings.emplace_back("logit: score did not reach tolerance within 100 iterations");
    return out;
}

CellProbMatrix bicm(const BipartiteGraph& g, const BicmOptions& options) {
    return bicm(g.row_sums(), g.col_sums(), options);
}

CellProbMatrix bicm(std::span<const int> row_sums, std::span<const int> col_sums, const BicmOptions& options) {
    const std::size_t m = row_sums.size();
    const std::size_t n = col_sums.size();
    if (m == 0 || n == 0) throw std::invalid_argument("bicm: empty degree sequence");
    std::int64_t total_r = 0;
    std::int64_t total_c = 0;
    for (int r : row_sums) {
        if (r < 0 || static_cast<std::size_t>(r) > n) throw std::invalid_argument("bicm: row sum outside [0,n]");
        total_r += r;
    }
    for (int c : col_sums) {
        if (c < 0 || static_cast<std::size_t>(c) > m) throw std::invalid_argument("bicm: column sum outside [0,m]");
        total_c += c;
    }
    if (total_r != total_c) throw std::invalid_argument("bicm: row and column sums disagree");

    if (!is_bigraphic(row_sums, col_sums))
        throw std::invalid_argument("bicm: degree sequences are not jointly satisfiable");

    // Cells that are 0 or 1 in every matrix with these margins (empty or full
    // rows and columns, and the blocks forced by a tight Gale-Ryser
    // inequality) would need infinite fitnesses. They are fixed exactly and
    // the model is fitted on the remaining cells. Rows or columns of equal
    // degree are interchangeable, so the pattern and the fitnesses depend
    // only on the degree class.
    const std::vector<int> forced = forced_cells(realize(row_sums, col_sums));
    std::map<int, std::size_t> rclass;
    std::map<int, std::size_t> cclass;
    for (int r : row_sums) rclass.emplace(r, 0);
    for (int c : col_sums) cclass.emplace(c, 0);
    std::vector<double> rdeg, cdeg, rmult, cmult;
    std::vector<std::size_t> rrep, crep;
    for (auto& [v, idx] : rclass) { idx = rdeg.size(); rdeg.push_back(v); rmult.push_back(0); rrep.push_back(0); }
    for (auto& [v, idx] : cclass) { idx = cdeg.size(); cdeg.push_back(v); cmult.push_back(0); crep.push_back(0); }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t a = rclass[row_sums[i]];
        rmult[a] += 1;
        rrep[a] = i;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t b = cclass[col_sums[k]];
        cmult[b] += 1;
        crep[b] = k;
    }

    const std::size_t na = rdeg.size();
    const std::size_t nb = cdeg.size();
    std::vector<int> fixed(na * nb);  // -1 free, else the forced value
    std::vector<double> rt(rdeg), ct(cdeg);  // degrees left for the free cells
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            const int f = forced[rrep[a] * n + crep[b]];
            fixed[a * nb + b] = f;
            if (f == 1) {
                rt[a] -= cmult[b];
                ct[b] -= rmult[a];
            }
        }

    std::vector<double> x(na, 0.0), y(nb, 0.0);
    double free_fill = 0.0;
    for (std::size_t a = 0; a < na; ++a) free_fill += rt[a] * rmult[a];
    if (free_fill > 0.0) {
        const double root = std::sqrt(free_fill);
        for (std::size_t a = 0; a < na; ++a) x[a] = rt[a] / root;
        for (std::size_t b = 0; b < nb; ++b) y[b] = ct[b] / root;

        auto residual = [&] {
            double worst = 0.0;
            std::vector<double> col_total(nb, 0.0);
            for (std::size_t a = 0; a < na; ++a) {
                double row_total = 0.0;
                for (std::size_t b = 0; b < nb; ++b) {
                    if (fixed[a * nb + b] >= 0) continue;
                    const double xy = x[a] * y[b];
                    const double p = xy / (1.0 + xy);
                    row_total += cmult[b] * p;
                    col_total[b] += rmult[a] * p;
                }
                worst = std::max(worst, std::abs(row_total - rt[a]));
            }
            for (std::size_t b = 0; b < nb; ++b) worst = std::max(worst, std::abs(col_total[b] - ct[b]));
            return worst;
        };

        double res = residual();
        int it = 0;
        for (; res > options.tolerance && it < options.max_iterations; ++it) {
            for (std::size_t a = 0; a < na; ++a) {
                if (rt[a] <= 0.0) continue;
                double denom = 0.0;
                for (std::size_t b = 0; b < nb; ++b)
                    if (fixed[a * nb + b] < 0) denom += cmult[b] * y[b] / (1.0 + x[a] * y[b]);
                x[a] = rt[a] / denom;
            }
            for (std::size_t b = 0; b < nb; ++b) {
                if (ct[b] <= 0.0) continue;
                double denom = 0.0;
                for (std::size_t a = 0; a < na; ++a)
                    if (fixed[a * nb + b] < 0) denom += rmult[a] * x[a] / (1.0 + x[a] * y[b]);
                y[b] = ct[b] / denom;
            }
            res = residual();
        }
        if (!(res <= options.tolerance)) {
            throw BicmNonConvergence(res, "bicm: no convergence after " + std::to_string(it) +
                                              " iterations (max margin residual " + std::to_string(res) + ")");
        }
    }

    CellProbMatrix out{m, n, std::vector<double>(m * n, 0.0), CellProbMethod::bicm, {}};
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t a = rclass[row_sums[i]];
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t b = cclass[col_sums[k]];
            const int f = fixed[a * nb + b];
            const double xy = x[a] * y[b];
            out.probs[i * n + k] = f >= 0 ? f : xy / (1.0 + xy);
        }
    }
    return out;
}

CellProbMatrix estimate_cell_probs(const BipartiteGraph& g, CellProbMethod method) {
    switch (method) {
        case CellProbMethod::rcf: return rcf(g);
        case CellProbMethod::lpm: return lpm(g, false);
        case CellProbMethod::lpm_i: return lpm(g, true);
        case CellProbMethod::logit: return logit(g, false);
        case CellProbMethod::logit_i: return logit(g, true);
        case CellProbMethod::bicm: return bicm(g);
        case CellProbMethod::exact: break;
    }
    throw std::invalid_argument("unknown cell probability method");
}

double accuracy(const CellProbMatrix& estimate, const CellProbMatrix& truth) {
    if (estimate.agents != truth.agents || estimate.artifacts != truth.artifacts ||
        estimate.probs.size() != truth.probs.size()) {
        throw std::invalid_argument("accuracy: probability matrices have different dimensions");
    }
    if (estimate.probs.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t c = 0; c < estimate.probs.size(); ++c) total += std::abs(estimate.probs[c] - truth.probs[c]);
    return total / static_cast<double>(estimate.probs.size());
}

}  // namespace spine
