#include "spine/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "spine/fdsm.hpp"
#include "spine/oracle.hpp"
#include "spine/parallel.hpp"
#include "spine/rng.hpp"

namespace spine {

std::optional<double> modularity(const Backbone& b, const std::vector<int>& groups) {
    const std::size_t m = b.agents;
    if (groups.size() != m) throw std::invalid_argument("modularity: one group label per agent required");
    const auto edges = b.edge_list();
    if (edges.empty()) return std::nullopt;
    int labels = 0;
    for (int g : groups) {
        if (g < 0) throw std::invalid_argument("modularity: group labels must be non-negative");
        labels = std::max(labels, g + 1);
    }
    std::vector<double> inside(static_cast<std::size_t>(labels), 0.0);
    std::vector<double> ends(static_cast<std::size_t>(labels), 0.0);
    for (auto [i, j] : edges) {
        const auto gi = static_cast<std::size_t>(groups[i]);
        const auto gj = static_cast<std::size_t>(groups[j]);
        if (gi == gj) inside[gi] += 1.0;
        ends[gi] += 1.0;
        ends[gj] += 1.0;
    }
    const auto total = static_cast<double>(edges.size());
    double q = 0.0;
    for (std::size_t c = 0; c < inside.size(); ++c) {
        const double a = ends[c] / (2.0 * total);
        q += inside[c] / total - a * a;
    }
    return q;
}

std::vector<double> jaccard_sweep(const EdgePvalues& pv, const Projection& p, const Backbone& reference,
                                  const std::vector<double>& alphas, TailMode tails) {
    const std::size_t m = p.agents;
    if (pv.agents != m || reference.agents != m) throw std::invalid_argument("jaccard_sweep: size mismatch");
    // For each candidate pair, the edge enters once tail_alpha(alpha) exceeds
    // its upper p-value; count pairs per reference membership.
    std::vector<double> in_ref;
    std::vector<double> out_ref;
    std::size_t ref_size = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool ref = reference.has_edge(i, j);
            ref_size += ref;
            if (p.weight(i, j) == 0) continue;
            (ref ? in_ref : out_ref).push_back(pv.upper_at(i, j));
        }
    std::sort(in_ref.begin(), in_ref.end());
    std::sort(out_ref.begin(), out_ref.end());
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double alpha : alphas) {
        const double cut = tail_alpha(alpha, tails);
        const auto hit = static_cast<std::size_t>(std::lower_bound(in_ref.begin(), in_ref.end(), cut) - in_ref.begin());
        const auto extra =
            static_cast<std::size_t>(std::lower_bound(out_ref.begin(), out_ref.end(), cut) - out_ref.begin());
        const std::size_t uni = ref_size + extra;
        out.push_back(uni == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(uni));
    }
    return out;
}

std::vector<double> alpha_grid(double first, double last, double step) {
    if (!(step > 0.0) || last < first) throw std::invalid_argument("alpha_grid: empty range");
    const auto count = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
    // Integer numerators over 1/step keep grid points exact to the last digit.
    const double inv = std::round(1.0 / step);
    const bool integral = std::abs(inv * step - 1.0) < 1e-12;
    const double base = std::round(first * inv);
    std::vector<double> out(count);
    for (std::size_t s = 0; s < count; ++s)
        out[s] = integral ? (base + static_cast<double>(s)) / inv : first + step * static_cast<double>(s);
    return out;
}

Argmax argmax_midpoint(const std::vector<double>& alphas, const std::vector<double>& scores) {
    if (alphas.empty() || alphas.size() != scores.size()) throw std::invalid_argument("argmax_midpoint: bad input");
    const double best = *std::max_element(scores.begin(), scores.end());
    double lo = 0.0;
    double hi = 0.0;
    bool seen = false;
    for (std::size_t s = 0; s < alphas.size(); ++s) {
        if (scores[s] != best) continue;
        if (!seen) lo = alphas[s];
        hi = alphas[s];
        seen = true;
    }
    return {(lo + hi) / 2.0, best};
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::nan("");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mu = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) return std::nan("");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

void write_table(const Table& table, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (table.name + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << ',';
            const bool quote = cells[c].find_first_of(",\"\n") != std::string::npos;
            if (!quote) {
                out << cells[c];
                continue;
            }
            out << '"';
            for (char ch : cells[c]) out << (ch == '"' ? "\"\"" : std::string(1, ch));
            out << '"';
        }
        out << '\n';
    };
    line(table.columns);
    for (const auto& row : table.rows) line(row);
}

Preset parse_preset(std::string_view name) {
    if (name == "paper") return Preset::paper;
    if (name == "desk") return Preset::desk;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected paper or desk)");
}

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "";
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

std::string seq(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

std::string message(const std::exception& e) { return e.what(); }

TestConfig base_config(double alpha, std::size_t trials, std::uint64_t fdsm_seed) {
    TestConfig cfg;
    cfg.alpha = alpha;
    cfg.tails = TailMode::two;
    cfg.correction = Correction::none;
    cfg.sdsm_method = CellProbMethod::bicm;
    cfg.fdsm.trials = trials;
    cfg.fdsm.seed = fdsm_seed;
    cfg.fdsm.workers = 1;
    cfg.workers = 1;
    return cfg;
}

Backbone fdsm_reference(const BipartiteGraph& g, double alpha, std::size_t trials, std::uint64_t seed) {
    TestConfig cfg = base_config(alpha, trials, seed);
    cfg.model = NullModel::fdsm;
    return extract_backbone(g, cfg);
}

}  // namespace

// ---- Study 1 ----

Study1Config Study1Config::preset(Preset) { return {}; }

std::vector<DegreePair> study1_degree_pairs() {
    // Non-increasing sequences of length len with entries in [1, top].
    std::function<void(std::size_t, int, std::vector<int>&, std::vector<std::vector<int>>&)> grow =
        [&](std::size_t len, int top, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
            if (cur.size() == len) {
                out.push_back(cur);
                return;
            }
            const int hi = cur.empty() ? top : std::min(top, cur.back());
            for (int v = hi; v >= 1; --v) {
                cur.push_back(v);
                grow(len, top, cur, out);
                cur.pop_back();
            }
        };
    std::vector<DegreePair> pairs;
    for (std::size_t m = 3; m <= 5; ++m)
        for (std::size_t n = m; n <= 5; ++n) {
            std::vector<std::vector<int>> rows;
            std::vector<std::vector<int>> cols;
            std::vector<int> cur;
            grow(m, static_cast<int>(n) - 1, cur, rows);
            grow(n, static_cast<int>(m) - 1, cur, cols);
            for (const auto& r : rows)
                for (const auto& c : cols)
                    if (is_bigraphic(r, c)) pairs.push_back({r, c});
        }
    return pairs;
}

double Study1Result::mean_accuracy(CellProbMethod method) const {
    const auto it = std::find(config.methods.begin(), config.methods.end(), method);
    if (it == config.methods.end()) throw std::invalid_argument("method not part of this run");
    const auto idx = static_cast<std::size_t>(it - config.methods.begin());
    std::vector<double> xs;
    for (const auto& e : ensembles)
        if (e.accuracy[idx]) xs.push_back(*e.accuracy[idx]);
    return mean(xs);
}

std::size_t Study1Result::failures(CellProbMethod method) const {
    const auto idx = static_cast<std::size_t>(std::find(config.methods.begin(), config.methods.end(), method) -
                                              config.methods.begin());
    std::size_t k = 0;
    for (const auto& e : ensembles) k += idx < e.accuracy.size() && !e.accuracy[idx];
    return k;
}

std::vector<Table> Study1Result::tables() const {
    Table acc{"study1_accuracy", {"ensemble", "row_sums", "col_sums", "cardinality", "method", "accuracy", "error"}, {}};
    for (std::size_t e = 0; e < ensembles.size(); ++e)
        for (std::size_t k = 0; k < config.methods.size(); ++k) {
            const auto& en = ensembles[e];
            acc.rows.push_back({std::to_string(e), seq(en.degrees.rows), seq(en.degrees.cols),
                                std::to_string(en.cardinality), std::string(to_string(config.methods[k])),
                                en.accuracy[k] ? num(*en.accuracy[k]) : "", en.errors[k]});
        }
    Table sum{"study1_summary", {"method", "mean_accuracy", "ensembles", "failed"}, {}};
    for (auto method : config.methods)
        sum.rows.push_back({std::string(to_string(method)), num(mean_accuracy(method)),
                            std::to_string(ensembles.size()), std::to_string(failures(method))});
    Table tim{"study1_timing", {"method", "agents", "artifacts", "cells", "seconds", "error"}, {}};
    for (const auto& t : timings)
        tim.rows.push_back({std::string(to_string(t.method)), std::to_string(t.size), std::to_string(t.size),
                            std::to_string(t.size * t.size), num(t.seconds), t.error});
    return {acc, sum, tim};
}

Study1Result run_study1(const Study1Config& config) {
    Study1Result res;
    res.config = config;
    const auto pairs = study1_degree_pairs();
    res.ensembles.resize(pairs.size());
    parallel_for(pairs.size(), config.workers, [&](std::size_t e) {
        Study1Ensemble& out = res.ensembles[e];
        out.degrees = pairs[e];
        const auto en = enumerate_fdsm(pairs[e].rows, pairs[e].cols);
        out.cardinality = en.size();
        const CellProbMatrix truth = en.marginals_as_cell_probs();
        // Every member shares the margins, so any one serves as the observed graph.
        const BipartiteGraph& g = en.members.front();
        out.accuracy.resize(config.methods.size());
        out.errors.resize(config.methods.size());
        for (std::size_t k = 0; k < config.methods.size(); ++k) {
            try {
                out.accuracy[k] = accuracy(estimate_cell_probs(g, config.methods[k]), truth);
            } catch (const std::exception& ex) {
                out.errors[k] = message(ex);
            }
        }
    });

    for (std::size_t size : config.timing_sizes) {
        BipartiteGraph g = generate(size, size, 0.1, DegreeShape::normal(), DegreeShape::normal(),
                                    derive_seed(config.seed, {1, size}));
        for (auto method : config.methods) {
            Study1Timing t{method, size, 0.0, {}};
            const auto start = std::chrono::steady_clock::now();
            try {
                (void)estimate_cell_probs(g, method);
            } catch (const std::exception& ex) {
                t.error = message(ex);
            }
            t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            res.timings.push_back(t);
        }
    }
    return res;
}

// ---- Study 2 ----

Study2Config Study2Config::preset(Preset p) {
    Study2Config c;
    c.replicates = p == Preset::paper ? 100 : 10;
    return c;
}

std::vector<double> Study2Result::mean_curve() const {
    std::vector<double> curve(config.alphas.size(), 0.0);
    std::size_t ok = 0;
    for (const auto& r : replicates) {
        if (!r.error.empty()) continue;
        ++ok;
        for (std::size_t s = 0; s < curve.size(); ++s) curve[s] += r.jaccard[s];
    }
    for (auto& x : curve) x = ok ? x / static_cast<double>(ok) : std::nan("");
    return curve;
}

Argmax Study2Result::mean_curve_argmax() const { return argmax_midpoint(config.alphas, mean_curve()); }

double Study2Result::mean_replicate_argmax() const {
    std::vector<double> xs;
    for (const auto& r : replicates)
        if (r.error.empty()) xs.push_back(r.best.alpha);
    return mean(xs);
}

std::vector<Table> Study2Result::tables() const {
    Table curves{"study2_jaccard", {"replicate", "seed", "alpha", "jaccard"}, {}};
    Table best{"study2_argmax", {"replicate", "seed", "fdsm_edges", "argmax_alpha", "max_jaccard", "error"}, {}};
    for (std::size_t r = 0; r < replicates.size(); ++r) {
        const auto& rep = replicates[r];
        best.rows.push_back({std::to_string(r), std::to_string(rep.seed), std::to_string(rep.fdsm_edges),
                             rep.error.empty() ? num(rep.best.alpha) : "", rep.error.empty() ? num(rep.best.value) : "",
                             rep.error});
        if (!rep.error.empty()) continue;
        for (std::size_t s = 0; s < config.alphas.size(); ++s)
            curves.rows.push_back({std::to_string(r), std::to_string(rep.seed), num(config.alphas[s]), num(rep.jaccard[s])});
    }
    Table sum{"study2_summary", {"alpha", "mean_jaccard", "p10", "p90"}, {}};
    const auto curve = mean_curve();
    for (std::size_t s = 0; s < config.alphas.size(); ++s) {
        std::vector<double> xs;
        for (const auto& rep : replicates)
            if (rep.error.empty()) xs.push_back(rep.jaccard[s]);
        sum.rows.push_back({num(config.alphas[s]), num(curve[s]), num(quantile(xs, 0.1)), num(quantile(xs, 0.9))});
    }
    return {curves, sum, best};
}

Study2Result run_study2(const Study2Config& config) {
    Study2Result res;
    res.config = config;
    res.replicates.resize(config.replicates);
    parallel_for(config.replicates, config.workers, [&](std::size_t r) {
        Study2Replicate& out = res.replicates[r];
        out.seed = derive_seed(config.seed, {2, 0, r});
        try {
            const BipartiteGraph g = generate(config.agents, config.artifacts, config.density, config.agent_shape,
                                              config.artifact_shape, derive_seed(out.seed, {0}));
            const Backbone ref = fdsm_reference(g, config.fdsm_alpha, config.trials, derive_seed(out.seed, {3}));
            out.fdsm_edges = ref.edge_count();
            TestConfig cfg = base_config(config.fdsm_alpha, config.trials, 0);
            const EdgePvalues pv = edge_pvalues(g, cfg);
            out.jaccard = jaccard_sweep(pv, project(g), ref, config.alphas);
            out.best = argmax_midpoint(config.alphas, out.jaccard);
        } catch (const std::exception& ex) {
            out.error = message(ex);
        }
    });
    return res;
}

// ---- Study 3 ----

Study3Config Study3Config::preset(Preset p) {
    Study3Config c;
    c.replicates = p == Preset::paper ? 100 : 10;
    return c;
}

std::vector<Study3Cell> Study3Result::cells() const {
    const std::size_t k = config.shapes.size();
    std::vector<Study3Cell> out(k * k);
    std::vector<std::vector<double>> curves(k * k, std::vector<double>(config.alphas.size(), 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            out[a * k + b].agent_shape = a;
            out[a * k + b].artifact_shape = b;
        }
    for (const auto& r : replicates) {
        if (!r.error.empty()) continue;
        auto& cell = out[r.agent_shape * k + r.artifact_shape];
        ++cell.ok;
        for (std::size_t m = 0; m < kStudy3Models.size(); ++m) cell.mean_jaccard[m] += r.jaccard[m];
        auto& curve = curves[r.agent_shape * k + r.artifact_shape];
        for (std::size_t s = 0; s < curve.size(); ++s) curve[s] += r.sdsm_curve[s];
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        auto& cell = out[c];
        if (cell.ok == 0) {
            cell.mean_jaccard.fill(std::nan(""));
            cell.optimal = {std::nan(""), std::nan("")};
            continue;
        }
        const auto ok = static_cast<double>(cell.ok);
        for (auto& x : cell.mean_jaccard) x /= ok;
        for (auto& x : curves[c]) x /= ok;
        cell.optimal = argmax_midpoint(config.alphas, curves[c]);
    }
    return out;
}

std::vector<Table> Study3Result::tables() const {
    Table models{"study3_models", {"agent_shape", "artifact_shape", "replicate", "seed", "model", "jaccard", "error"}, {}};
    for (const auto& r : replicates) {
        const auto& as = config.shapes[r.agent_shape].name;
        const auto& bs = config.shapes[r.artifact_shape].name;
        if (!r.error.empty()) {
            models.rows.push_back({as, bs, std::to_string(r.replicate), std::to_string(r.seed), "", "", r.error});
            continue;
        }
        for (std::size_t m = 0; m < kStudy3Models.size(); ++m)
            models.rows.push_back({as, bs, std::to_string(r.replicate), std::to_string(r.seed),
                                   std::string(to_string(kStudy3Models[m])), num(r.jaccard[m]), ""});
    }
    Table grid{"study3_cells",
               {"agent_shape", "artifact_shape", "replicates", "ffm", "frm", "fcm", "sdsm", "optimal_alpha",
                "sdsm_at_optimal"},
               {}};
    for (const auto& c : cells()) {
        grid.rows.push_back({config.shapes[c.agent_shape].name, config.shapes[c.artifact_shape].name,
                             std::to_string(c.ok), num(c.mean_jaccard[0]), num(c.mean_jaccard[1]),
                             num(c.mean_jaccard[2]), num(c.mean_jaccard[3]), num(c.optimal.alpha),
                             num(c.optimal.value)});
    }
    return {models, grid};
}

Study3Result run_study3(const Study3Config& config) {
    Study3Result res;
    res.config = config;
    const std::size_t k = config.shapes.size();
    res.replicates.resize(k * k * config.replicates);
    parallel_for(res.replicates.size(), config.workers, [&](std::size_t t) {
        Study3Replicate& out = res.replicates[t];
        out.replicate = t % config.replicates;
        const std::size_t cell = t / config.replicates;
        out.agent_shape = cell / k;
        out.artifact_shape = cell % k;
        out.seed = derive_seed(config.seed, {3, cell, out.replicate});
        try {
            const BipartiteGraph g =
                generate(config.agents, config.artifacts, config.density, config.shapes[out.agent_shape],
                         config.shapes[out.artifact_shape], derive_seed(out.seed, {0}));
            const Projection p = project(g);
            const Backbone ref = fdsm_reference(g, config.alpha, config.trials, derive_seed(out.seed, {3}));
            for (std::size_t m = 0; m < kStudy3Models.size(); ++m) {
                TestConfig cfg = base_config(config.alpha, config.trials, 0);
                cfg.model = kStudy3Models[m];
                const EdgePvalues pv = edge_pvalues(g, cfg);
                out.jaccard[m] = jaccard(apply_threshold(pv, p, cfg.alpha, cfg.tails, cfg.correction), ref);
                if (cfg.model == NullModel::sdsm) out.sdsm_curve = jaccard_sweep(pv, p, ref, config.alphas);
            }
        } catch (const std::exception& ex) {
            out.error = message(ex);
        }
    });
    return res;
}

// ---- Study 4 ----

std::string study4_line_name(std::size_t line) {
    static const char* names[kStudy4Lines] = {"ffm", "frm", "fcm", "sdsm", "sdsm_liberal", "fdsm"};
    if (line >= kStudy4Lines) throw std::out_of_range("study4_line_name");
    return names[line];
}

Study4Config Study4Config::preset(Preset p) {
    Study4Config c;
    c.replicates = p == Preset::paper ? 10 : 3;
    return c;
}

Study4Summary Study4Result::summary(std::size_t w_index, std::size_t line) const {
    std::vector<double> xs;
    Study4Summary s;
    for (const auto& r : replicates) {
        if (r.w_index != w_index || !r.error.empty()) continue;
        if (r.q[line])
            xs.push_back(*r.q[line]);
        else
            ++s.excluded;
    }
    s.n = xs.size();
    s.mean = mean(xs);
    s.sd = sample_sd(xs);
    return s;
}

std::vector<Table> Study4Result::tables() const {
    Table rows{"study4_modularity",
               {"w", "replicate", "seed", "realized_w", "attained", "model", "edges", "modularity", "error"},
               {}};
    for (const auto& r : replicates) {
        const std::string w = num(config.ws[r.w_index]);
        if (!r.error.empty()) {
            rows.rows.push_back({w, std::to_string(r.replicate), std::to_string(r.seed), "", "", "", "", "", r.error});
            continue;
        }
        for (std::size_t line = 0; line < kStudy4Lines; ++line)
            rows.rows.push_back({w, std::to_string(r.replicate), std::to_string(r.seed), num(r.realized_w),
                                 r.attained ? "1" : "0", study4_line_name(line), std::to_string(r.edges[line]),
                                 r.q[line] ? num(*r.q[line]) : "", ""});
    }
    Table sum{"study4_summary", {"w", "model", "mean_modularity", "sd", "replicates", "excluded_empty"}, {}};
    for (std::size_t w = 0; w < config.ws.size(); ++w)
        for (std::size_t line = 0; line < kStudy4Lines; ++line) {
            const auto s = summary(w, line);
            sum.rows.push_back({num(config.ws[w]), study4_line_name(line), num(s.mean), num(s.sd), std::to_string(s.n),
                                std::to_string(s.excluded)});
        }
    return {rows, sum};
}

Study4Result run_study4(const Study4Config& config) {
    Study4Result res;
    res.config = config;
    res.replicates.resize(config.ws.size() * config.replicates);
    parallel_for(res.replicates.size(), config.workers, [&](std::size_t t) {
        Study4Replicate& out = res.replicates[t];
        out.w_index = t / config.replicates;
        out.replicate = t % config.replicates;
        out.seed = derive_seed(config.seed, {4, out.w_index, out.replicate});
        try {
            const BipartiteGraph base = generate(config.agents, config.artifacts, config.density, DegreeShape::right(),
                                                 DegreeShape::right(), derive_seed(out.seed, {0}));
            const PlantedPartition part = random_partition(config.agents, config.artifacts,
                                                           derive_seed(out.seed, {1}), !config.random_groups);
            const PlantResult planted = plant_blocks(base, part, config.ws[out.w_index], derive_seed(out.seed, {2}));
            out.realized_w = planted.within;
            out.attained = planted.attained;
            const BipartiteGraph& g = planted.graph;
            const Projection p = project(g);

            auto record = [&](std::size_t line, const Backbone& b) {
                out.edges[line] = b.edge_count();
                out.q[line] = modularity(b, part.agent_groups);
            };
            const NullModel analytic[] = {NullModel::ffm, NullModel::frm, NullModel::fcm};
            for (std::size_t line = 0; line < 3; ++line) {
                TestConfig cfg = base_config(config.alpha, config.trials, 0);
                cfg.model = analytic[line];
                record(line, extract_backbone(g, cfg));
            }
            TestConfig sdsm = base_config(config.alpha, config.trials, 0);
            const EdgePvalues pv = edge_pvalues(g, sdsm);
            record(3, apply_threshold(pv, p, config.alpha, TailMode::two, Correction::none));
            record(4, apply_threshold(pv, p, config.liberal_alpha, TailMode::two, Correction::none));
            record(5, fdsm_reference(g, config.alpha, config.trials, derive_seed(out.seed, {3})));
        } catch (const std::exception& ex) {
            out.error = message(ex);
        }
    });
    return res;
}

}  // namespace spine
