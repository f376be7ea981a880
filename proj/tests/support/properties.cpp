#include "properties.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spine/bigraph.hpp"
#include "spine/cellprob.hpp"
#include "spine/cli.hpp"
#include "spine/extract.hpp"
#include "spine/fdsm.hpp"
#include "spine/io.hpp"
#include "spine/oracle.hpp"
#include "spine/pmf.hpp"
#include "spine/synth.hpp"

namespace spine::testing {

namespace {

namespace fs = std::filesystem;
using Gen = std::mt19937_64;
using Verdict = std::optional<std::string>;

Gen case_gen(std::uint64_t seed, const std::string& name, std::size_t c) {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(std::hash<std::string>{}(name)), static_cast<std::uint32_t>(c)};
    return Gen(s);
}

int pick(Gen& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
double unit(Gen& g) { return std::uniform_real_distribution<double>(0.0, 1.0)(g); }

BipartiteGraph random_graph(Gen& gen, int min_m, int max_m, int min_n, int max_n) {
    const int m = pick(gen, min_m, max_m);
    const int n = pick(gen, min_n, max_n);
    const double p = unit(gen);
    BipartiteGraph g(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k)
            if (unit(gen) < p) g.set(static_cast<std::size_t>(i), static_cast<std::size_t>(k), true);
    return g;
}

std::string show(const BipartiteGraph& g) {
    std::string s;
    for (std::size_t i = 0; i < g.agents(); ++i) {
        if (i) s += '/';
        for (std::size_t k = 0; k < g.artifacts(); ++k) s += g.at(i, k) ? '1' : '0';
    }
    return s;
}

template <typename T>
std::string show(const std::vector<T>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
    return os.str();
}

struct Property {
    std::string module;
    std::string name;
    std::function<PropertyOutcome(const PropertyOptions&)> run;
};

PropertyOutcome fuzz(const std::string& module, const std::string& name, std::size_t cases, std::uint64_t seed,
                     const std::function<Verdict(Gen&, std::size_t)>& check) {
    PropertyOutcome out{module, name, cases, 0, false, {}, 0.0};
    for (std::size_t c = 0; c < cases; ++c) {
        Gen gen = case_gen(seed, module + "." + name, c);
        Verdict v;
        try {
            v = check(gen, c);
        } catch (const std::exception& e) {
            v = std::string("threw: ") + e.what();
        }
        if (v) {
            if (out.failures++ == 0) out.first_failure = "case " + std::to_string(c) + ": " + *v;
        }
    }
    return out;
}

// A random distribution from one of the analytic families.
Pmf random_pmf(Gen& gen, std::string& label) {
    switch (pick(gen, 0, 4)) {
        case 0: {
            const int m = pick(gen, 2, 30);
            const int n = pick(gen, 1, 30);
            const int f = pick(gen, 0, m * n);
            label = "ffm(" + std::to_string(m) + "," + std::to_string(n) + "," + std::to_string(f) + ")";
            return ffm_pmf(m, n, f);
        }
        case 1: {
            const int n = pick(gen, 1, 200);
            const int ri = pick(gen, 0, n);
            const int rj = pick(gen, 0, n);
            label = "frm(" + std::to_string(n) + "," + std::to_string(ri) + "," + std::to_string(rj) + ")";
            return frm_pmf(n, ri, rj);
        }
        case 2: {
            std::vector<double> ps(static_cast<std::size_t>(pick(gen, 0, 300)));
            for (auto& p : ps) p = unit(gen);
            label = "poisson_binomial(len " + std::to_string(ps.size()) + ")";
            return poisson_binomial(ps);
        }
        case 3: {
            const int m = pick(gen, 2, 50);
            std::vector<int> cols(static_cast<std::size_t>(pick(gen, 1, 100)));
            for (auto& c : cols) c = pick(gen, 0, m);
            label = "fcm(" + std::to_string(m) + "," + show(cols) + ")";
            return fcm_pmf(m, cols);
        }
        default: {
            std::vector<double> a(static_cast<std::size_t>(pick(gen, 1, 150)));
            std::vector<double> b(a.size());
            for (auto& p : a) p = unit(gen);
            for (auto& p : b) p = unit(gen);
            label = "sdsm(len " + std::to_string(a.size()) + ")";
            return sdsm_pmf(a, b);
        }
    }
}

// Same-sized symmetric backbone with random edges.
Backbone random_backbone(Gen& gen, std::size_t m) {
    Backbone b(m);
    const double p = unit(gen);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (unit(gen) < p) b.set_edge(i, j, true);
    return b;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const Backbone& b) {
    const auto l = b.edge_list();
    return {l.begin(), l.end()};
}

bool subset(const Backbone& a, const Backbone& b) {
    for (auto [i, j] : a.edge_list())
        if (!b.has_edge(i, j)) return false;
    return true;
}

// Unique-realization matrix: rows are left-justified runs of non-increasing
// length, then rows and columns are shuffled.
BipartiteGraph ferrers_graph(Gen& gen) {
    const int m = pick(gen, 2, 8);
    const int n = pick(gen, 1, 8);
    std::vector<int> r(static_cast<std::size_t>(m));
    for (auto& x : r) x = pick(gen, 0, n);
    std::sort(r.rbegin(), r.rend());
    std::vector<std::size_t> rp(static_cast<std::size_t>(m));
    std::vector<std::size_t> cp(static_cast<std::size_t>(n));
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), gen);
    std::shuffle(cp.begin(), cp.end(), gen);
    BipartiteGraph g(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < r[static_cast<std::size_t>(i)]; ++k) g.set(rp[static_cast<std::size_t>(i)], cp[static_cast<std::size_t>(k)], true);
    return g;
}

// Semi-regular m x n graph with r ones per row laid out cyclically, so every
// column holds m r / n ones when n divides m r.
std::optional<BipartiteGraph> semi_regular(int m, int n, int r) {
    if (r > n || (m * r) % n != 0) return std::nullopt;
    BipartiteGraph g(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < r; ++t) g.set(static_cast<std::size_t>(i), static_cast<std::size_t>((i * r + t) % n), true);
    return g;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    return cli::run(args, out, err);
}

struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("spine_" + tag + "_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::vector<std::vector<std::string>>> table_rows(const std::vector<Table>& tables,
                                                              const std::string& skip = "") {
    std::vector<std::vector<std::vector<std::string>>> out;
    for (const auto& t : tables)
        if (t.name != skip) out.push_back(t.rows);
    return out;
}

// ---- bigraph ----

std::vector<Property> bigraph_properties() {
    return {
        {"bigraph", "projection_matches_brute_force",
         [](const PropertyOptions& o) {
             return fuzz("bigraph", "projection_matches_brute_force", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 1, 8, 1, 8);
                 const auto p = project(g);
                 const auto ref = brute_projection(g.to_dense());
                 for (std::size_t i = 0; i < g.agents(); ++i) {
                     if (p.diagonal[i] != g.row_sums()[i]) return "diagonal differs from degree for " + show(g);
                     for (std::size_t j = 0; j < g.agents(); ++j)
                         if (p.weight(i, j) != ref[i][j]) return "weight mismatch for " + show(g);
                 }
                 return std::nullopt;
             });
         }},
        {"bigraph", "weight_bounds",
         [](const PropertyOptions& o) {
             return fuzz("bigraph", "weight_bounds", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 12, 1, 70);
                 const auto p = project(g);
                 const int n = static_cast<int>(g.artifacts());
                 for (std::size_t i = 0; i < g.agents(); ++i)
                     for (std::size_t j = 0; j < g.agents(); ++j) {
                         if (i == j) continue;
                         const int w = p.weight(i, j);
                         const int ri = g.row_sums()[i];
                         const int rj = g.row_sums()[j];
                         if (w != p.weight(j, i)) return "asymmetric projection for " + show(g);
                         if (w > std::min(ri, rj) || w < ri + rj - n) return "weight out of bounds for " + show(g);
                     }
                 return std::nullopt;
             });
         }},
        {"bigraph", "margins_track_mutations",
         [](const PropertyOptions& o) {
             return fuzz("bigraph", "margins_track_mutations", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 auto g = random_graph(gen, 1, 10, 1, 130);
                 const int edits = pick(gen, 0, 200);
                 for (int e = 0; e < edits; ++e)
                     g.set(static_cast<std::size_t>(pick(gen, 0, static_cast<int>(g.agents()) - 1)),
                           static_cast<std::size_t>(pick(gen, 0, static_cast<int>(g.artifacts()) - 1)), unit(gen) < 0.5);
                 const auto cells = g.to_dense();
                 std::vector<int> rows(g.agents(), 0);
                 std::vector<int> cols(g.artifacts(), 0);
                 std::int64_t fill = 0;
                 for (std::size_t i = 0; i < cells.size(); ++i)
                     for (std::size_t k = 0; k < cells[i].size(); ++k) {
                         rows[i] += cells[i][k];
                         cols[k] += cells[i][k];
                         fill += cells[i][k];
                     }
                 if (rows != g.row_sums() || cols != g.col_sums() || fill != g.fill())
                     return "cached margins drifted for " + show(g);
                 if (!(BipartiteGraph::from_dense(cells) == g)) return "dense round trip differs for " + show(g);
                 return std::nullopt;
             });
         }},
        {"bigraph", "jaccard_symmetric_and_reflexive",
         [](const PropertyOptions& o) {
             return fuzz("bigraph", "jaccard_symmetric_and_reflexive", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto m = static_cast<std::size_t>(pick(gen, 1, 10));
                 const auto a = random_backbone(gen, m);
                 const auto b = random_backbone(gen, m);
                 if (jaccard(a, a) != 1.0 || jaccard(b, b) != 1.0) return std::string("jaccard(a,a) != 1");
                 if (jaccard(a, b) != jaccard(b, a)) return std::string("jaccard not symmetric");
                 const auto ea = edge_set(a);
                 const auto eb = edge_set(b);
                 std::size_t inter = 0;
                 for (const auto& e : ea) inter += eb.count(e);
                 const std::size_t uni = ea.size() + eb.size() - inter;
                 const double expect = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
                 if (std::abs(jaccard(a, b) - expect) > 1e-15) return std::string("jaccard differs from set arithmetic");
                 return std::nullopt;
             });
         }},
    };
}

// ---- pmf ----

std::vector<Property> pmf_properties() {
    return {
        {"pmf", "sums_to_one",
         [](const PropertyOptions& o) {
             return fuzz("pmf", "sums_to_one", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 std::string label;
                 const Pmf pmf = random_pmf(gen, label);
                 double s = 0.0;
                 for (double p : pmf.probs()) {
                     if (!(p >= 0.0)) return label + " has a negative mass";
                     s += p;
                 }
                 if (std::abs(s - 1.0) > 1e-9) return label + " sums to " + std::to_string(s);
                 return std::nullopt;
             });
         }},
        {"pmf", "log_probs_consistent",
         [](const PropertyOptions& o) {
             return fuzz("pmf", "log_probs_consistent", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 std::string label;
                 const Pmf pmf = random_pmf(gen, label);
                 for (int k = 0; k <= pmf.support_max(); ++k) {
                     const double p = pmf.probs()[static_cast<std::size_t>(k)];
                     if (p > 0.0 && std::abs(std::exp(pmf.log_probs()[static_cast<std::size_t>(k)]) - p) > 1e-12 * p)
                         return label + " log mass disagrees at k=" + std::to_string(k);
                 }
                 return std::nullopt;
             });
         }},
        {"pmf", "ffm_matches_enumeration",
         [](const PropertyOptions&) {
             // Exhaustive over every (m, n, f) with m >= 2 and mn <= 16.
             std::vector<std::array<int, 3>> grid;
             for (int m = 2; m <= 8; ++m)
                 for (int n = 1; m * n <= 16; ++n)
                     for (int f = 0; f <= m * n; ++f) grid.push_back({m, n, f});
             std::map<std::pair<int, int>, std::vector<std::vector<std::uint64_t>>> cache;
             return fuzz("pmf", "ffm_matches_enumeration", grid.size(), 0, [&](Gen&, std::size_t c) -> Verdict {
                 const auto [m, n, f] = grid[c];
                 auto& counts = cache[{m, n}];
                 if (counts.empty()) counts = ffm_counts(m, n);
                 const Pmf pmf = ffm_pmf(m, n, f);
                 const auto total = static_cast<double>(choose(m * n, f));
                 for (int k = 0; k <= n; ++k) {
                     const double exact = static_cast<double>(counts[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)]) / total;
                     if (std::abs(pmf[k] - exact) > 1e-12)
                         return "m=" + std::to_string(m) + " n=" + std::to_string(n) + " f=" + std::to_string(f) +
                                " k=" + std::to_string(k);
                 }
                 return std::nullopt;
             });
         }},
        {"pmf", "frm_matches_enumeration",
         [](const PropertyOptions&) {
             std::vector<std::array<int, 3>> grid;
             for (int n = 1; n <= 8; ++n)
                 for (int ri = 0; ri <= n; ++ri)
                     for (int rj = 0; rj <= n; ++rj) grid.push_back({n, ri, rj});
             return fuzz("pmf", "frm_matches_enumeration", grid.size(), 0, [&](Gen&, std::size_t c) -> Verdict {
                 const auto [n, ri, rj] = grid[c];
                 const auto counts = frm_counts(n, ri, rj);
                 const auto total = static_cast<double>(choose(n, ri) * choose(n, rj));
                 const Pmf pmf = frm_pmf(n, ri, rj);
                 for (int k = 0; k <= n; ++k)
                     if (std::abs(pmf[k] - static_cast<double>(counts[static_cast<std::size_t>(k)]) / total) > 1e-12)
                         return "n=" + std::to_string(n) + " ri=" + std::to_string(ri) + " rj=" + std::to_string(rj);
                 return std::nullopt;
             });
         }},
        {"pmf", "constant_parameters_give_binomial",
         [](const PropertyOptions& o) {
             return fuzz("pmf", "constant_parameters_give_binomial", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const int n = pick(gen, 0, 60);
                 const double p = pick(gen, 0, 9) == 0 ? static_cast<double>(pick(gen, 0, 1)) : unit(gen);
                 const Pmf pmf = poisson_binomial(std::vector<double>(static_cast<std::size_t>(n), p));
                 for (int k = 0; k <= n; ++k)
                     if (std::abs(pmf[k] - binomial_pmf(n, p, k)) > 1e-12)
                         return "n=" + std::to_string(n) + " p=" + std::to_string(p) + " k=" + std::to_string(k);
                 return std::nullopt;
             });
         }},
        {"pmf", "tails_complement",
         [](const PropertyOptions& o) {
             return fuzz("pmf", "tails_complement", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 std::string label;
                 const Pmf pmf = random_pmf(gen, label);
                 if (upper_tail(pmf, 0) != 1.0) return label + ": upper_tail(0) != 1";
                 if (std::abs(lower_tail(pmf, pmf.support_max()) - 1.0) > 1e-12) return label + ": lower_tail(max) != 1";
                 for (int k = 1; k <= pmf.support_max() + 1; ++k)
                     if (std::abs(upper_tail(pmf, k) + lower_tail(pmf, k - 1) - 1.0) > 1e-12)
                         return label + ": tails do not complement at k=" + std::to_string(k);
                 return std::nullopt;
             });
         }},
    };
}

// ---- cellprob ----

std::vector<Property> cellprob_properties() {
    return {
        {"cellprob", "estimates_in_unit_interval",
         [](const PropertyOptions& o) {
             return fuzz("cellprob", "estimates_in_unit_interval", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 BipartiteGraph g = random_graph(gen, 1, 10, 1, 10);
                 const auto cells = static_cast<std::int64_t>(g.agents() * g.artifacts());
                 if (g.fill() == 0) g.set(0, 0, true);
                 if (g.fill() == cells) {
                     if (cells == 1) return std::nullopt;  // no non-constant 1x1 graph exists
                     g.set(0, 0, false);
                 }
                 for (auto method : {CellProbMethod::rcf, CellProbMethod::lpm, CellProbMethod::lpm_i,
                                     CellProbMethod::logit, CellProbMethod::logit_i, CellProbMethod::bicm}) {
                     const auto est = estimate_cell_probs(g, method);
                     if (est.probs.size() != g.agents() * g.artifacts()) return std::string("wrong size");
                     for (double p : est.probs)
                         if (!(p >= 0.0 && p <= 1.0))
                             return std::string(to_string(method)) + " left [0,1] on " + show(g);
                 }
                 return std::nullopt;
             });
         }},
        {"cellprob", "bicm_reproduces_margins",
         [](const PropertyOptions& o) {
             return fuzz("cellprob", "bicm_reproduces_margins", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const BipartiteGraph g = random_graph(gen, 1, 25, 1, 25);
                 const auto est = bicm(g);
                 for (std::size_t i = 0; i < g.agents(); ++i) {
                     double s = 0.0;
                     for (std::size_t k = 0; k < g.artifacts(); ++k) s += est.at(i, k);
                     if (std::abs(s - g.row_sums()[i]) > 1e-6) return "row margin off for " + show(g);
                 }
                 for (std::size_t k = 0; k < g.artifacts(); ++k) {
                     double s = 0.0;
                     for (std::size_t i = 0; i < g.agents(); ++i) s += est.at(i, k);
                     if (std::abs(s - g.col_sums()[k]) > 1e-6) return "column margin off for " + show(g);
                 }
                 return std::nullopt;
             });
         }},
        {"cellprob", "bicm_not_worse_than_logit_i",
         [](const PropertyOptions&) {
             Study1Config cfg;
             cfg.methods = {CellProbMethod::bicm, CellProbMethod::logit_i};
             cfg.timing_sizes = {};
             const auto res = run_study1(cfg);
             PropertyOutcome out{"cellprob", "bicm_not_worse_than_logit_i", res.ensembles.size(), 0, false, {}, 0.0};
             const double b = res.mean_accuracy(CellProbMethod::bicm);
             const double l = res.mean_accuracy(CellProbMethod::logit_i);
             if (res.failures(CellProbMethod::bicm) || !(b <= l)) {
                 out.failures = 1;
                 out.first_failure = "bicm " + std::to_string(b) + " vs logit_i " + std::to_string(l);
             }
             return out;
         }},
        {"cellprob", "rcf_equals_bicm_when_margins_hold",
         [](const PropertyOptions& o) {
             return fuzz("cellprob", "rcf_equals_bicm_when_margins_hold", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 std::optional<BipartiteGraph> g;
                 while (!g) g = semi_regular(pick(gen, 1, 12), pick(gen, 1, 12), pick(gen, 1, 12));
                 const auto r = rcf(*g);
                 const auto b = bicm(*g);
                 for (std::size_t c = 0; c < r.probs.size(); ++c)
                     if (std::abs(r.probs[c] - b.probs[c]) > 1e-9) return "rcf and bicm differ on " + show(*g);
                 return std::nullopt;
             });
         }},
    };
}

// ---- oracle ----

std::vector<Property> oracle_properties() {
    return {
        {"oracle", "counts_match_dynamic_program",
         [](const PropertyOptions& o) {
             const auto pairs = study1_degree_pairs();
             const std::size_t cases = pairs.size() + o.cases;
             return fuzz("oracle", "counts_match_dynamic_program", cases, o.seed, [&](Gen& gen, std::size_t c) -> Verdict {
                 std::vector<int> rows;
                 std::vector<int> cols;
                 if (c < pairs.size()) {
                     rows = pairs[c].rows;
                     cols = pairs[c].cols;
                 } else {
                     // Random sequences of length 2-5 with a common total,
                     // realizable or not.
                     const int m = pick(gen, 2, 5);
                     const int n = pick(gen, 2, 5);
                     rows.resize(static_cast<std::size_t>(m));
                     for (auto& r : rows) r = pick(gen, 0, n);
                     int total = 0;
                     for (int r : rows) total += r;
                     if (total > m * n) return std::nullopt;
                     cols.assign(static_cast<std::size_t>(n), 0);
                     for (int t = 0; t < total;) {
                         auto& c2 = cols[static_cast<std::size_t>(pick(gen, 0, n - 1))];
                         if (c2 < m) {
                             ++c2;
                             ++t;
                         }
                     }
                 }
                 const auto en = enumerate_fdsm(rows, cols);
                 const auto dp = count_realizations(rows, cols);
                 if (en.size() != dp)
                     return show(rows) + "|" + show(cols) + ": " + std::to_string(en.size()) + " vs " + std::to_string(dp);
                 if ((en.size() > 0) != is_bigraphic(rows, cols)) return "Gale-Ryser disagrees for " + show(rows) + "|" + show(cols);
                 return std::nullopt;
             });
         }},
        {"oracle", "members_valid_and_marginals_sum_to_degrees",
         [](const PropertyOptions& o) {
             return fuzz("oracle", "members_valid_and_marginals_sum_to_degrees", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 1, 5, 1, 5);
                 const auto en = enumerate_fdsm(g.row_sums(), g.col_sums());
                 if (en.size() == 0) return "no members for " + show(g);
                 std::set<std::string> seen;
                 for (const auto& mem : en.members) {
                     if (mem.row_sums() != g.row_sums() || mem.col_sums() != g.col_sums())
                         return "member with wrong margins for " + show(g);
                     if (!seen.insert(show(mem)).second) return "duplicate member for " + show(g);
                 }
                 if (!seen.count(show(g))) return "observed graph missing from its ensemble";
                 for (std::size_t i = 0; i < g.agents(); ++i) {
                     double s = 0.0;
                     for (std::size_t k = 0; k < g.artifacts(); ++k) s += en.marginal(i, k);
                     if (std::abs(s - g.row_sums()[i]) > 1e-12) return "marginal row sum off for " + show(g);
                 }
                 for (std::size_t k = 0; k < g.artifacts(); ++k) {
                     double s = 0.0;
                     for (std::size_t i = 0; i < g.agents(); ++i) s += en.marginal(i, k);
                     if (std::abs(s - g.col_sums()[k]) > 1e-12) return "marginal column sum off for " + show(g);
                 }
                 return std::nullopt;
             });
         }},
    };
}

// ---- fdsm ----

std::vector<Property> fdsm_properties() {
    return {
        {"fdsm", "curveball_preserves_degrees",
         [](const PropertyOptions& o) {
             return fuzz("fdsm", "curveball_preserves_degrees", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 12, 1, 130);
                 CurveballSampler s(g, gen());
                 for (int step = 0; step < 10000; ++step) s.step();
                 const auto& h = s.state();
                 if (h.row_sums() != g.row_sums() || h.col_sums() != g.col_sums() || h.fill() != g.fill())
                     return "margins changed for " + show(g);
                 // Cached margins must also agree with the cells themselves.
                 if (!(BipartiteGraph::from_dense(h.to_dense()).col_sums() == g.col_sums()))
                     return "cells disagree with cached margins for " + show(g);
                 return std::nullopt;
             });
         }},
        {"fdsm", "small_ensemble_uniformity",
         [](const PropertyOptions& o) {
             const auto chi = small_ensemble_uniformity(o.seed, 100000);
             PropertyOutcome out{"fdsm", "small_ensemble_uniformity", 1, 0, false, {}, 0.0};
             if (!(chi.statistic < chi.critical)) {
                 out.failures = 1;
                 out.first_failure = "chi-square " + std::to_string(chi.statistic) + " >= " + std::to_string(chi.critical);
             }
             return out;
         }},
        {"fdsm", "pvalues_converge_to_exact_tails",
         [](const PropertyOptions& o) {
             return fuzz("fdsm", "pvalues_converge_to_exact_tails", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 5, 1, 5);
                 const auto en = enumerate_fdsm(g.row_sums(), g.col_sums());
                 FdsmOptions opt;
                 opt.trials = 2000;
                 opt.seed = gen();
                 const auto mc = fdsm_pvalues(g, opt);
                 const auto p = project(g);
                 const double n = static_cast<double>(opt.trials);
                 for (std::size_t i = 0; i < g.agents(); ++i)
                     for (std::size_t j = i + 1; j < g.agents(); ++j) {
                         const Pmf exact = exact_edge_pmf(en, i, j);
                         const int w = p.weight(i, j);
                         for (auto [est, truth] : {std::pair{mc.upper(i, j), upper_tail(exact, w)},
                                                   std::pair{mc.lower(i, j), lower_tail(exact, w)}}) {
                             // Five standard errors keeps the family of ~10^4
                             // comparisons from failing by chance.
                             const double tol = 5.0 * std::sqrt(truth * (1.0 - truth) / n) + 1e-12;
                             if (std::abs(est - truth) > tol)
                                 return show(g) + " pair " + std::to_string(i) + "," + std::to_string(j) + ": " +
                                        std::to_string(est) + " vs " + std::to_string(truth);
                         }
                     }
                 return std::nullopt;
             });
         }},
        {"fdsm", "counts_bounded",
         [](const PropertyOptions& o) {
             return fuzz("fdsm", "counts_bounded", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 10, 1, 10);
                 FdsmOptions opt;
                 opt.trials = static_cast<std::size_t>(pick(gen, 1, 60));
                 opt.seed = gen();
                 opt.workers = static_cast<unsigned>(pick(gen, 1, 3));
                 const auto mc = fdsm_pvalues(g, opt);
                 const auto t = static_cast<std::int64_t>(opt.trials);
                 for (std::size_t i = 0; i < g.agents(); ++i)
                     for (std::size_t j = 0; j < g.agents(); ++j) {
                         if (i == j) continue;
                         const auto ge = mc.ge_counts[i * g.agents() + j];
                         const auto le = mc.le_counts[i * g.agents() + j];
                         if (ge < 0 || le < 0 || ge > t || le > t || ge + le < t) return "counts out of range for " + show(g);
                         if (ge != mc.ge_counts[j * g.agents() + i]) return "asymmetric counts for " + show(g);
                     }
                 return std::nullopt;
             });
         }},
    };
}

// ---- extract ----

TestConfig random_config(Gen& gen) {
    TestConfig cfg;
    cfg.model = static_cast<NullModel>(pick(gen, 0, 4));
    cfg.tails = pick(gen, 0, 1) ? TailMode::two : TailMode::one;
    cfg.correction = static_cast<Correction>(pick(gen, 0, 3));
    cfg.fdsm.trials = 100;
    cfg.fdsm.seed = gen();
    return cfg;
}

std::vector<Property> extract_properties() {
    return {
        {"extract", "edges_monotone_in_alpha",
         [](const PropertyOptions& o) {
             return fuzz("extract", "edges_monotone_in_alpha", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 9, 1, 9);
                 TestConfig cfg = random_config(gen);
                 double a = unit(gen) * 0.5 + 1e-3;
                 double b = unit(gen) * 0.5 + 1e-3;
                 if (a > b) std::swap(a, b);
                 cfg.alpha = a;
                 const auto small = extract_backbone(g, cfg);
                 cfg.alpha = b;
                 const auto large = extract_backbone(g, cfg);
                 if (!subset(small, large))
                     return std::string(to_string(cfg.model)) + "/" + std::string(to_string(cfg.correction)) +
                            " lost edges as alpha grew on " + show(g);
                 return std::nullopt;
             });
         }},
        {"extract", "fdsm_reproducible",
         [](const PropertyOptions& o) {
             return fuzz("extract", "fdsm_reproducible", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 10, 1, 10);
                 TestConfig cfg;
                 cfg.model = NullModel::fdsm;
                 cfg.fdsm.trials = 100;
                 cfg.fdsm.seed = gen();
                 cfg.fdsm.workers = static_cast<unsigned>(pick(gen, 1, 3));
                 const auto a = extract_backbone(g, cfg);
                 const auto b = extract_backbone(g, cfg);
                 if (a.edges != b.edges || a.pvalues_upper != b.pvalues_upper || a.pvalues_lower != b.pvalues_lower)
                     return "FDSM differs between runs on " + show(g);
                 return std::nullopt;
             });
         }},
        {"extract", "correction_nesting",
         [](const PropertyOptions& o) {
             return fuzz("extract", "correction_nesting", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 std::vector<double> ps(static_cast<std::size_t>(pick(gen, 1, 60)));
                 const double scale = std::pow(10.0, -pick(gen, 0, 4));
                 for (auto& p : ps) p = pick(gen, 0, 5) == 0 ? ps[0] : std::min(1.0, unit(gen) * scale);
                 const double alpha = unit(gen) * 0.2 + 1e-4;
                 const auto bon = correct(ps, alpha, Correction::bonferroni);
                 const auto holm = correct(ps, alpha, Correction::holm);
                 const auto bh = correct(ps, alpha, Correction::fdr);
                 for (std::size_t i = 0; i < ps.size(); ++i)
                     if ((bon[i] && !holm[i]) || (holm[i] && !bh[i])) return "nesting broken for " + show(ps);
                 return std::nullopt;
             });
         }},
        {"extract", "sdsm_matches_fdsm_on_single_member_ensembles",
         [](const PropertyOptions& o) {
             return fuzz("extract", "sdsm_matches_fdsm_on_single_member_ensembles", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = ferrers_graph(gen);
                 if (g.agents() <= kMaxEnumerationLength && g.artifacts() <= kMaxEnumerationLength &&
                     enumerate_fdsm(g.row_sums(), g.col_sums()).size() != 1)
                     return "generator produced a non-unique graph " + show(g);
                 TestConfig cfg;
                 cfg.alpha = unit(gen) * 0.5 + 1e-3;
                 cfg.tails = pick(gen, 0, 1) ? TailMode::two : TailMode::one;
                 cfg.model = NullModel::sdsm;
                 const auto s = extract_backbone(g, cfg);
                 cfg.model = NullModel::fdsm;
                 cfg.fdsm.trials = 50;
                 cfg.fdsm.seed = gen();
                 const auto f = extract_backbone(g, cfg);
                 if (s.edges != f.edges || s.pvalues_upper != f.pvalues_upper) return "SDSM and FDSM differ on " + show(g);
                 return std::nullopt;
             });
         }},
        {"extract", "retained_edges_below_threshold",
         [](const PropertyOptions& o) {
             return fuzz("extract", "retained_edges_below_threshold", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto g = random_graph(gen, 2, 9, 1, 9);
                 TestConfig cfg = random_config(gen);
                 cfg.correction = pick(gen, 0, 1) ? Correction::bonferroni : Correction::none;
                 cfg.alpha = unit(gen) * 0.5 + 1e-3;
                 const auto b = extract_backbone(g, cfg);
                 const auto t = test_count(project(g));
                 double cut = tail_alpha(cfg.alpha, cfg.tails);
                 if (cfg.correction == Correction::bonferroni && t > 0) cut /= static_cast<double>(t);
                 for (std::size_t i = 0; i < b.agents; ++i) {
                     if (b.has_edge(i, i)) return std::string("self loop");
                     for (std::size_t j = 0; j < b.agents; ++j) {
                         if (b.has_edge(i, j) != b.has_edge(j, i)) return std::string("asymmetric edges");
                         if (b.has_edge(i, j) && !(b.pvalues_upper[i * b.agents + j] < cut))
                             return "retained edge above threshold on " + show(g);
                     }
                 }
                 return std::nullopt;
             });
         }},
    };
}

// ---- synth ----

std::vector<Property> synth_properties() {
    return {
        {"synth", "degree_skew_follows_shape",
         [](const PropertyOptions& o) {
             return fuzz("synth", "degree_skew_follows_shape", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 const auto seed = gen();
                 const auto right = generate(100, 100, 0.1, DegreeShape::right(), DegreeShape::uniform(), seed);
                 const auto left = generate(100, 100, 0.1, DegreeShape::left(), DegreeShape::uniform(), seed);
                 const double sr = skewness(right.row_sums());
                 const double sl = skewness(left.row_sums());
                 if (!(sr > 0.0)) return "right-tailed agents have skewness " + std::to_string(sr);
                 if (!(sl < 0.0)) return "left-tailed agents have skewness " + std::to_string(sl);
                 return std::nullopt;
             });
         }},
        {"synth", "planting_preserves_margins",
         [](const PropertyOptions& o) {
             return fuzz("synth", "planting_preserves_margins", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 auto g = random_graph(gen, 2, 30, 2, 30);
                 if (g.fill() == 0) g.set(0, 0, true);
                 const auto part = random_partition(g.agents(), g.artifacts(), gen(), pick(gen, 0, 1) == 1);
                 const auto res = plant_blocks(g, part, 0.5 + 0.5 * unit(gen), gen());
                 if (res.graph.row_sums() != g.row_sums() || res.graph.col_sums() != g.col_sums())
                     return "planting changed margins of " + show(g);
                 if (std::abs(res.within - within_fraction(res.graph, part)) > 1e-12) return std::string("reported W is stale");
                 return std::nullopt;
             });
         }},
        {"synth", "planting_never_lowers_w",
         [](const PropertyOptions& o) {
             return fuzz("synth", "planting_never_lowers_w", o.cases, o.seed, [](Gen& gen, std::size_t) -> Verdict {
                 auto g = random_graph(gen, 2, 30, 2, 30);
                 if (g.fill() == 0) g.set(0, 0, true);
                 const auto part = random_partition(g.agents(), g.artifacts(), gen(), pick(gen, 0, 1) == 1);
                 const double before = within_fraction(g, part);
                 const double target = before + (1.0 - before) * unit(gen);
                 const auto res = plant_blocks(g, part, target, gen());
                 if (res.within < before) return "W fell from " + std::to_string(before) + " on " + show(g);
                 if (res.attained && res.within < target - 1e-12) return std::string("attained flag set below target");
                 return std::nullopt;
             });
         }},
    };
}

// ---- eval ----

std::vector<Property> eval_properties() {
    return {
        {"eval", "runners_deterministic",
         [](const PropertyOptions& o) {
             return fuzz("eval", "runners_deterministic", 4, o.seed, [](Gen& gen, std::size_t c) -> Verdict {
                 const auto seed = gen();
                 switch (c) {
                     case 0: {
                         Study1Config s;
                         s.seed = seed;
                         s.timing_sizes = {20};
                         s.workers = 2;
                         const auto a = run_study1(s);
                         const auto b = run_study1(s);
                         if (table_rows(a.tables(), "study1_timing") != table_rows(b.tables(), "study1_timing"))
                             return std::string("study 1 tables differ");
                         return std::nullopt;
                     }
                     case 1: {
                         Study2Config s;
                         s.seed = seed;
                         s.replicates = 3;
                         s.agents = 40;
                         s.artifacts = 30;
                         s.density = 0.15;
                         s.trials = 60;
                         s.workers = 2;
                         if (table_rows(run_study2(s).tables()) != table_rows(run_study2(s).tables()))
                             return std::string("study 2 tables differ");
                         return std::nullopt;
                     }
                     case 2: {
                         Study3Config s;
                         s.seed = seed;
                         s.replicates = 1;
                         s.agents = 30;
                         s.artifacts = 30;
                         s.trials = 60;
                         s.shapes = {DegreeShape::right(), DegreeShape::normal()};
                         s.workers = 2;
                         if (table_rows(run_study3(s).tables()) != table_rows(run_study3(s).tables()))
                             return std::string("study 3 tables differ");
                         return std::nullopt;
                     }
                     default: {
                         Study4Config s;
                         s.seed = seed;
                         s.replicates = 1;
                         s.agents = 30;
                         s.artifacts = 80;
                         s.ws = {0.5, 0.8};
                         s.trials = 60;
                         s.workers = 2;
                         if (table_rows(run_study4(s).tables()) != table_rows(run_study4(s).tables()))
                             return std::string("study 4 tables differ");
                         return std::nullopt;
                     }
                 }
             });
         }},
        {"eval", "constant_corner_matches_fdsm",
         [](const PropertyOptions& o) {
             Study3Config s;
             s.seed = o.seed;
             s.replicates = 2;
             s.shapes = {DegreeShape::constant(), DegreeShape::left()};
             s.alphas = {0.05};
             const auto res = run_study3(s);
             PropertyOutcome out{"eval", "constant_corner_matches_fdsm", 0, 0, false, {}, 0.0};
             for (const auto& r : res.replicates) {
                 if (r.agent_shape != 0) continue;
                 ++out.cases;
                 bool ok = r.error.empty();
                 for (double j : r.jaccard) ok = ok && j == 1.0;
                 if (!ok && out.failures++ == 0)
                     out.first_failure = "agent constant, artifact " + s.shapes[r.artifact_shape].name + " replicate " +
                                         std::to_string(r.replicate) + (r.error.empty() ? "" : ": " + r.error);
             }
             return out;
         }},
        {"eval", "study4_modularity_monotone_in_w",
         [](const PropertyOptions& o) {
             PropertyOutcome out{"eval", "study4_modularity_monotone_in_w", 0, 0, false, {}, 0.0};
             if (!o.study4) {
                 out.skipped = true;
                 return out;
             }
             for (std::size_t line = 0; line < kStudy4Lines; ++line) {
                 ++out.cases;
                 const auto m = study4_monotone(*o.study4, line);
                 if (!m.ok && out.failures++ == 0)
                     out.first_failure = study4_line_name(line) + ": slope p " + std::to_string(m.p_value) + ", drop " +
                                         std::to_string(m.worst_drop) + " vs " + std::to_string(m.drop_tolerance);
             }
             return out;
         }},
    };
}

// ---- cli ----

std::vector<std::string> random_ids(Gen& gen, std::size_t count, const std::string& prefix) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.";
    std::set<std::string> seen;
    std::vector<std::string> ids;
    while (ids.size() < count) {
        std::string id = prefix;
        const int len = pick(gen, 1, 8);
        for (int c = 0; c < len; ++c) id += alphabet[static_cast<std::size_t>(pick(gen, 0, static_cast<int>(alphabet.size()) - 1))];
        if (seen.insert(id).second) ids.push_back(id);
    }
    return ids;
}

std::vector<Property> cli_properties() {
    return {
        {"cli", "round_trip_both_formats",
         [](const PropertyOptions& o) {
             ScratchDir dir("roundtrip");
             return fuzz("cli", "round_trip_both_formats", o.cases, o.seed, [&](Gen& gen, std::size_t c) -> Verdict {
                 LabeledGraph lg;
                 lg.graph = random_graph(gen, 1, 12, 1, 12);
                 lg.agent_ids = random_ids(gen, lg.graph.agents(), "");
                 lg.artifact_ids = random_ids(gen, lg.graph.artifacts(), "");
                 for (auto fmt : {GraphFormat::edge_list, GraphFormat::dense}) {
                     const auto path = dir.path / ("g" + std::to_string(c) + (fmt == GraphFormat::dense ? ".csv" : ".txt"));
                     write_graph(lg, path);
                     const auto back = read_graph(path);
                     if (!(back.graph == lg.graph) || back.agent_ids != lg.agent_ids || back.artifact_ids != lg.artifact_ids)
                         return std::string(fmt == GraphFormat::dense ? "dense" : "edge list") + " round trip differs for " +
                                show(lg.graph);
                 }
                 return std::nullopt;
             });
         }},
        {"cli", "commands_deterministic_under_seed",
         [](const PropertyOptions& o) {
             ScratchDir dir("determinism");
             return fuzz("cli", "commands_deterministic_under_seed", o.cases, o.seed, [&](Gen& gen, std::size_t c) -> Verdict {
                 const auto tag = std::to_string(c);
                 const auto seed = std::to_string(gen() % 1000000);
                 const auto threads = std::to_string(pick(gen, 1, 3));
                 const auto input = dir.path / ("in" + tag + ".txt");
                 write_graph(label(random_graph(gen, 3, 10, 2, 10)), input);
                 const std::string model = pick(gen, 0, 1) ? "fdsm" : "sdsm";
                 for (const char* run : {"a", "b"})
                     if (run_cli({"backbone", input.string(), "--model", model, "--trials", "200", "--seed", seed,
                                  "--threads", threads, "--output", (dir.path / ("bb" + tag + run)).string()}) != 0)
                         return std::string("backbone failed");
                 for (const char* ext : {".edges.csv", ".pvalues.csv"})
                     if (slurp(dir.path / ("bb" + tag + "a" + ext)) != slurp(dir.path / ("bb" + tag + "b" + ext)))
                         return "backbone output differs (" + model + ")";
                 const std::vector<std::string> synth{"synth",  "--agents",   std::to_string(pick(gen, 4, 30)),
                                                      "--artifacts", std::to_string(pick(gen, 4, 30)),
                                                      "--density", "0.3", "--planted-w", "0.7", "--seed", seed};
                 for (const char* run : {"a", "b"}) {
                     auto args = synth;
                     args.insert(args.end(), {"--output", (dir.path / ("sy" + tag + run + ".txt")).string()});
                     if (run_cli(args) != 0) return std::string("synth failed");
                 }
                 for (const char* ext : {".txt", ".txt.ids.json"})
                     if (slurp(dir.path / ("sy" + tag + "a" + ext)) != slurp(dir.path / ("sy" + tag + "b" + ext)))
                         return std::string("synth output differs");
                 return std::nullopt;
             });
         }},
    };
}

std::vector<Property> all_properties() {
    std::vector<Property> out;
    for (auto group : {bigraph_properties(), pmf_properties(), cellprob_properties(), oracle_properties(),
                       fdsm_properties(), extract_properties(), synth_properties(), eval_properties(),
                       cli_properties()})
        out.insert(out.end(), group.begin(), group.end());
    return out;
}

PropertyOutcome timed(const Property& p, const PropertyOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    auto out = p.run(o);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

ChiSquare small_ensemble_uniformity(std::uint64_t seed, std::size_t samples) {
    const std::vector<int> margins{1, 1, 2};
    const auto en = enumerate_fdsm(margins, margins);
    CurveballSampler s(en.members.front(), seed);
    ChiSquare out;
    out.counts.assign(en.size(), 0);
    for (std::size_t t = 0; t < samples; ++t) {
        const auto g = s.sample();
        const auto it = std::find(en.members.begin(), en.members.end(), g);
        if (it == en.members.end()) throw std::logic_error("sampler left the ensemble");
        ++out.counts[static_cast<std::size_t>(it - en.members.begin())];
    }
    const double expect = static_cast<double>(samples) / static_cast<double>(en.size());
    for (auto c : out.counts) out.statistic += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
    out.critical = chi_square_critical(0.01, static_cast<int>(en.size()) - 1);
    return out;
}

MonotoneCheck study4_monotone(const Study4Result& result, std::size_t line) {
    MonotoneCheck out;
    const auto& ws = result.config.ws;
    const std::size_t k = ws.size();
    std::vector<double> means(k);
    std::vector<double> ses(k);
    for (std::size_t w = 0; w < k; ++w) {
        const auto s = result.summary(w, line);
        if (s.n == 0) return out;
        means[w] = s.mean;
        ses[w] = s.n > 1 ? s.sd / std::sqrt(static_cast<double>(s.n)) : 0.0;
    }
    double wbar = 0.0;
    double qbar = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
        wbar += ws[w];
        qbar += means[w];
    }
    wbar /= static_cast<double>(k);
    qbar /= static_cast<double>(k);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
        sxx += (ws[w] - wbar) * (ws[w] - wbar);
        sxy += (ws[w] - wbar) * (means[w] - qbar);
    }
    out.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
        const double fit = qbar + out.slope * (ws[w] - wbar);
        ssr += (means[w] - fit) * (means[w] - fit);
    }
    const double df = static_cast<double>(k) - 2.0;
    const double se = std::sqrt(ssr / df / sxx);
    if (se == 0.0)
        out.p_value = out.slope > 0.0 ? 0.0 : 1.0;
    else
        out.p_value = boost::math::cdf(boost::math::complement(boost::math::students_t(df), out.slope / se));

    bool steps_ok = true;
    for (std::size_t w = 1; w < k; ++w) {
        const double drop = means[w - 1] - means[w];
        const double tol = 2.0 * std::sqrt(ses[w - 1] * ses[w - 1] + ses[w] * ses[w]);
        if (drop > out.worst_drop) {
            out.worst_drop = drop;
            out.drop_tolerance = tol;
        }
        if (drop > tol) steps_ok = false;
    }
    out.ok = out.slope > 0.0 && out.p_value < 0.05 && steps_ok;
    return out;
}

std::vector<std::string> property_modules() {
    return {"bigraph", "pmf", "cellprob", "oracle", "fdsm", "extract", "synth", "eval", "cli"};
}

std::vector<PropertyOutcome> run_properties(const std::string& module, const PropertyOptions& options) {
    std::vector<PropertyOutcome> out;
    for (const auto& p : all_properties())
        if (p.module == module) out.push_back(timed(p, options));
    return out;
}

std::vector<PropertyOutcome> run_all_properties(const PropertyOptions& options) {
    std::vector<PropertyOutcome> out;
    for (const auto& p : all_properties()) out.push_back(timed(p, options));
    return out;
}

}  // namespace spine::testing
