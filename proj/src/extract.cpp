#include "spine/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "spine/parallel.hpp"
#include "spine/pmf.hpp"

namespace spine {

std::string_view to_string(NullModel model) {
    switch (model) {
        case NullModel::ffm: return "ffm";
        case NullModel::frm: return "frm";
        case NullModel::fcm: return "fcm";
        case NullModel::sdsm: return "sdsm";
        case NullModel::fdsm: return "fdsm";
    }
    return "?";
}

std::string_view to_string(Correction correction) {
    switch (correction) {
        case Correction::none: return "none";
        case Correction::bonferroni: return "bonferroni";
        case Correction::holm: return "holm";
        case Correction::fdr: return "fdr";
    }
    return "?";
}

NullModel parse_null_model(std::string_view name) {
    for (auto m : {NullModel::ffm, NullModel::frm, NullModel::fcm, NullModel::sdsm, NullModel::fdsm})
        if (name == to_string(m)) return m;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

Correction parse_correction(std::string_view name) {
    for (auto c : {Correction::none, Correction::bonferroni, Correction::holm, Correction::fdr})
        if (name == to_string(c)) return c;
    throw std::invalid_argument("unknown correction '" + std::string(name) + "'");
}

void TestConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (model == NullModel::fdsm && fdsm.trials < 1) throw std::invalid_argument("FDSM needs at least one trial");
}

namespace {

EdgePvalues blank(std::size_t m) {
    return {m, std::vector<double>(m * m, 1.0), std::vector<double>(m * m, 1.0), {}};
}

void put(EdgePvalues& pv, std::size_t i, std::size_t j, double upper, double lower) {
    const std::size_t m = pv.agents;
    pv.upper[i * m + j] = pv.upper[j * m + i] = upper;
    pv.lower[i * m + j] = pv.lower[j * m + i] = lower;
}

// One shared null distribution for every pair.
EdgePvalues from_single_pmf(const Projection& p, const Pmf& pmf) {
    EdgePvalues pv = blank(p.agents);
    for (std::size_t i = 0; i < p.agents; ++i)
        for (std::size_t j = i + 1; j < p.agents; ++j) {
            const int w = p.weight(i, j);
            put(pv, i, j, upper_tail(pmf, w), lower_tail(pmf, w));
        }
    return pv;
}

EdgePvalues frm_pvalues(const BipartiteGraph& g, const Projection& p) {
    EdgePvalues pv = blank(p.agents);
    const auto& r = g.row_sums();
    std::map<std::pair<int, int>, Pmf> cache;
    for (std::size_t i = 0; i < p.agents; ++i)
        for (std::size_t j = i + 1; j < p.agents; ++j) {
            const auto key = std::minmax(r[i], r[j]);
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, frm_pmf(static_cast<std::int64_t>(g.artifacts()), key.first, key.second)).first;
            const int w = p.weight(i, j);
            put(pv, i, j, upper_tail(it->second, w), lower_tail(it->second, w));
        }
    return pv;
}

EdgePvalues fdsm_edge_pvalues(const BipartiteGraph& g, const Projection& p, const FdsmOptions& options) {
    const McPvalues mc = fdsm_pvalues(g, options);
    EdgePvalues pv = blank(p.agents);
    for (std::size_t i = 0; i < p.agents; ++i)
        for (std::size_t j = i + 1; j < p.agents; ++j) put(pv, i, j, mc.upper(i, j), mc.lower(i, j));
    return pv;
}

std::string describe(const TestConfig& cfg) {
    std::ostringstream os;
    os << to_string(cfg.model);
    if (cfg.model == NullModel::sdsm) os << '(' << to_string(cfg.sdsm_method) << ')';
    if (cfg.model == NullModel::fdsm) os << "(trials=" << cfg.fdsm.trials << ",seed=" << cfg.fdsm.seed << ')';
    os << " alpha=" << cfg.alpha << (cfg.tails == TailMode::two ? " two-tailed" : " one-tailed")
       << " correction=" << to_string(cfg.correction);
    return os.str();
}

}  // namespace

EdgePvalues sdsm_pvalues(const BipartiteGraph& g, const CellProbMatrix& probs, unsigned workers) {
    if (probs.agents != g.agents() || probs.artifacts != g.artifacts())
        throw std::invalid_argument("sdsm_pvalues: probability matrix does not match the graph");
    const Projection p = project(g);
    const std::size_t m = g.agents();
    const std::size_t n = g.artifacts();
    EdgePvalues pv = blank(m);
    // Each i writes only the (i, j > i) slots and their mirrors.
    parallel_for(m, workers, [&](std::size_t i) {
        std::vector<double> params(n);
        const auto pi = probs.row(i);
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto pj = probs.row(j);
            for (std::size_t k = 0; k < n; ++k) params[k] = pi[k] * pj[k];
            const Tails t = poisson_binomial_tails(params, p.weight(i, j));
            put(pv, i, j, t.upper, t.lower);
        }
    });
    pv.warnings = probs.warnings;
    return pv;
}

EdgePvalues edge_pvalues(const BipartiteGraph& g, const TestConfig& cfg) {
    cfg.validate();
    const Projection p = project(g);
    const auto m = static_cast<std::int64_t>(g.agents());
    const auto n = static_cast<std::int64_t>(g.artifacts());
    if (m < 2) return blank(g.agents());
    switch (cfg.model) {
        case NullModel::ffm: return from_single_pmf(p, ffm_pmf(m, n, g.fill()));
        case NullModel::frm: return frm_pvalues(g, p);
        case NullModel::fcm: return from_single_pmf(p, fcm_pmf(m, g.col_sums()));
        case NullModel::sdsm:
            if (g.fill() == 0) return blank(g.agents());
            return sdsm_pvalues(g, estimate_cell_probs(g, cfg.sdsm_method), cfg.workers);
        case NullModel::fdsm: return fdsm_edge_pvalues(g, p, cfg.fdsm);
    }
    throw std::invalid_argument("unknown model");
}

std::size_t test_count(const Projection& p) {
    std::size_t t = 0;
    for (std::size_t i = 0; i < p.agents; ++i)
        for (std::size_t j = i + 1; j < p.agents; ++j) t += p.weight(i, j) > 0;
    return t;
}

std::vector<bool> correct(std::span<const double> pvalues, double alpha, Correction method) {
    const std::size_t t = pvalues.size();
    std::vector<bool> reject(t, false);
    if (t == 0) return reject;
    const auto td = static_cast<double>(t);
    if (method == Correction::none || method == Correction::bonferroni) {
        const double cut = method == Correction::none ? alpha : alpha / td;
        for (std::size_t i = 0; i < t; ++i) reject[i] = pvalues[i] < cut;
        return reject;
    }
    std::vector<std::size_t> order(t);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    if (method == Correction::holm) {
        for (std::size_t r = 0; r < t; ++r) {
            if (!(pvalues[order[r]] < alpha / (td - static_cast<double>(r)))) break;
            reject[order[r]] = true;
        }
        return reject;
    }
    std::size_t last = 0;  // 1-based rank of the largest passing p-value
    for (std::size_t r = 0; r < t; ++r)
        if (pvalues[order[r]] <= static_cast<double>(r + 1) * alpha / td) last = r + 1;
    for (std::size_t r = 0; r < last; ++r) reject[order[r]] = true;
    return reject;
}

double fwer(double alpha, std::size_t t) { return 1.0 - std::pow(1.0 - alpha, static_cast<double>(t)); }

double tail_alpha(double alpha, TailMode tails) { return tails == TailMode::two ? alpha / 2.0 : alpha; }

Backbone apply_threshold(const EdgePvalues& pv, const Projection& p, double alpha, TailMode tails,
                         Correction correction) {
    if (pv.agents != p.agents) throw std::invalid_argument("apply_threshold: p-values do not match the projection");
    const std::size_t m = p.agents;
    Backbone b(m);
    b.pvalues_upper = pv.upper;
    b.pvalues_lower = pv.lower;
    b.warnings = pv.warnings;
    for (std::size_t i = 0; i < m; ++i) {
        b.pvalues_upper[i * m + i] = 1.0;
        b.pvalues_lower[i * m + i] = 1.0;
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> family;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (p.weight(i, j) > 0) {
                pairs.emplace_back(i, j);
                family.push_back(pv.upper_at(i, j));
            }
    const auto reject = correct(family, tail_alpha(alpha, tails), correction);
    for (std::size_t e = 0; e < pairs.size(); ++e)
        if (reject[e]) b.set_edge(pairs[e].first, pairs[e].second, true);
    return b;
}

Backbone extract_backbone(const BipartiteGraph& g, const TestConfig& cfg) {
    const Projection p = project(g);
    EdgePvalues pv = edge_pvalues(g, cfg);
    if (cfg.model == NullModel::fdsm && cfg.correction != Correction::none) {
        const std::size_t t = std::max<std::size_t>(1, test_count(p));
        const double alpha_star = tail_alpha(cfg.alpha, cfg.tails) / static_cast<double>(t);
        const auto need = required_trials(0.0, alpha_star, 0.05, 0.05).adjusted;
        if (need > static_cast<std::int64_t>(cfg.fdsm.trials)) {
            std::ostringstream os;
            os << "FDSM with " << to_string(cfg.correction) << " correction: per-test level " << alpha_star
               << " needs at least " << need << " Monte Carlo trials to resolve, but only " << cfg.fdsm.trials
               << " were run";
            pv.warnings.push_back(os.str());
        }
    }
    Backbone b = apply_threshold(pv, p, cfg.alpha, cfg.tails, cfg.correction);
    b.model_tag = describe(cfg);
    return b;
}

}  // namespace spine
