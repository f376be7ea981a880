#include "spine/oracle.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spine/rng.hpp"

namespace spine {

CellProbMatrix EnsembleEnumeration::marginals_as_cell_probs() const {
    return {row_sums.size(), col_sums.size(), cell_marginals, CellProbMethod::exact, {}};
}

bool is_bigraphic(std::span<const int> row_sums, std::span<const int> col_sums) {
    const auto m = static_cast<int>(row_sums.size());
    const auto n = static_cast<int>(col_sums.size());
    long total_r = 0;
    long total_c = 0;
    for (int r : row_sums) {
        if (r < 0 || r > n) return false;
        total_r += r;
    }
    for (int c : col_sums) {
        if (c < 0 || c > m) return false;
        total_c += c;
    }
    if (total_r != total_c) return false;
    std::vector<int> r(row_sums.begin(), row_sums.end());
    std::sort(r.begin(), r.end(), std::greater<>());
    long lhs = 0;
    for (int k = 1; k <= m; ++k) {
        lhs += r[static_cast<std::size_t>(k - 1)];
        long rhs = 0;
        for (int c : col_sums) rhs += std::min(c, k);
        if (lhs > rhs) return false;
    }
    return true;
}

BipartiteGraph realize(std::span<const int> row_sums, std::span<const int> col_sums, std::uint64_t seed) {
    if (row_sums.empty() || col_sums.empty()) throw std::invalid_argument("realize: empty degree sequence");
    if (!is_bigraphic(row_sums, col_sums)) throw std::invalid_argument("realize: degree sequences are not realizable");
    const std::size_t m = row_sums.size();
    const std::size_t n = col_sums.size();
    Rng rng(seed);
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<std::size_t> rows(m);
    std::iota(rows.begin(), rows.end(), 0);
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return row_sums[a] > row_sums[b]; });

    BipartiteGraph g(m, n);
    std::vector<int> residual(col_sums.begin(), col_sums.end());
    for (std::size_t i : rows) {
        std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return residual[a] > residual[b]; });
        for (int t = 0; t < row_sums[i]; ++t) {
            const std::size_t k = cols[static_cast<std::size_t>(t)];
            --residual[k];
            g.set(i, k, true);
        }
    }
    return g;
}

std::vector<int> forced_cells(const BipartiteGraph& g) {
    const std::size_t m = g.agents();
    const std::size_t n = g.artifacts();
    const std::size_t nodes = m + n;
    // Nodes 0..m-1 are agents, m..m+n-1 artifacts. Arcs are implicit in g.
    auto next_arc = [&](std::size_t v, std::size_t from) -> std::size_t {
        if (v < m) {
            for (std::size_t k = from; k < n; ++k)
                if (g.at(v, k)) return k;
            return n;
        }
        for (std::size_t i = from; i < m; ++i)
            if (!g.at(i, v - m)) return i;
        return m;
    };
    auto target = [&](std::size_t v, std::size_t arc) { return v < m ? m + arc : arc; };
    auto arcs_end = [&](std::size_t v) { return v < m ? n : m; };

    // Iterative Tarjan.
    constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(nodes, kUnseen), low(nodes, 0), comp(nodes, kUnseen), cursor(nodes, 0);
    std::vector<bool> on_stack(nodes, false);
    std::vector<std::size_t> stack, call;
    std::size_t counter = 0;
    std::size_t comps = 0;
    for (std::size_t root = 0; root < nodes; ++root) {
        if (index[root] != kUnseen) continue;
        call.push_back(root);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        cursor[root] = next_arc(root, 0);
        while (!call.empty()) {
            const std::size_t v = call.back();
            if (cursor[v] < arcs_end(v)) {
                const std::size_t w = target(v, cursor[v]);
                cursor[v] = next_arc(v, cursor[v] + 1);
                if (index[w] == kUnseen) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    cursor[w] = next_arc(w, 0);
                    call.push_back(w);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            call.pop_back();
            if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
            if (low[v] == index[v]) {
                for (;;) {
                    const std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = comps;
                    if (w == v) break;
                }
                ++comps;
            }
        }
    }

    std::vector<int> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) out[i * n + k] = comp[i] == comp[m + k] ? -1 : static_cast<int>(g.at(i, k));
    return out;
}

namespace {

struct Enumerator {
    std::span<const int> rows;
    std::size_t n;
    std::vector<int> residual;  // remaining column sums
    std::vector<std::vector<std::size_t>> chosen;
    std::vector<BipartiteGraph> out;

    void fill_row(std::size_t i) {
        if (i == rows.size()) {
            BipartiteGraph g(rows.size(), n);
            for (std::size_t r = 0; r < chosen.size(); ++r)
                for (std::size_t k : chosen[r]) g.set(r, k, true);
            out.push_back(std::move(g));
            return;
        }
        std::vector<std::size_t> subset;
        subset.reserve(static_cast<std::size_t>(rows[i]));
        choose(i, 0, subset);
    }

    // Lexicographic subsets of columns with positive residual.
    void choose(std::size_t i, std::size_t from, std::vector<std::size_t>& subset) {
        const auto need = static_cast<std::size_t>(rows[i]);
        if (subset.size() == need) {
            if (!feasible_after(i)) return;
            chosen[i] = subset;
            fill_row(i + 1);
            return;
        }
        for (std::size_t k = from; k + (need - subset.size()) <= n; ++k) {
            if (residual[k] == 0) continue;
            --residual[k];
            subset.push_back(k);
            choose(i, k + 1, subset);
            subset.pop_back();
            ++residual[k];
        }
    }

    bool feasible_after(std::size_t i) const {
        return is_bigraphic(rows.subspan(i + 1), residual);
    }
};

}  // namespace

EnsembleEnumeration enumerate_fdsm(std::span<const int> row_sums, std::span<const int> col_sums) {
    if (row_sums.empty() || col_sums.empty()) throw std::invalid_argument("enumerate_fdsm: empty degree sequence");
    if (row_sums.size() > kMaxEnumerationLength || col_sums.size() > kMaxEnumerationLength) {
        throw std::invalid_argument("enumerate_fdsm: degree sequences longer than " +
                                    std::to_string(kMaxEnumerationLength) + " are not enumerated");
    }
    EnsembleEnumeration e;
    e.row_sums.assign(row_sums.begin(), row_sums.end());
    e.col_sums.assign(col_sums.begin(), col_sums.end());
    if (!is_bigraphic(row_sums, col_sums)) return e;

    Enumerator en{row_sums, col_sums.size(), e.col_sums, std::vector<std::vector<std::size_t>>(row_sums.size()), {}};
    en.fill_row(0);
    e.members = std::move(en.out);

    const std::size_t m = row_sums.size();
    const std::size_t n = col_sums.size();
    std::vector<long> counts(m * n, 0);
    for (const auto& g : e.members)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k : g.row_items(i)) ++counts[i * n + k];
    e.cell_marginals.resize(m * n);
    const auto total = static_cast<double>(e.members.size());
    for (std::size_t c = 0; c < counts.size(); ++c) e.cell_marginals[c] = static_cast<double>(counts[c]) / total;
    return e;
}

Pmf exact_edge_pmf(const EnsembleEnumeration& ensemble, std::size_t i, std::size_t j) {
    if (ensemble.members.empty()) throw std::invalid_argument("exact_edge_pmf: empty enumeration");
    const std::size_t m = ensemble.row_sums.size();
    if (i >= m || j >= m) throw std::out_of_range("exact_edge_pmf: agent index out of range");
    if (i == j) throw std::invalid_argument("exact_edge_pmf: diagonal pairs are not tested");
    const std::size_t n = ensemble.col_sums.size();
    std::vector<long> counts(n + 1, 0);
    for (const auto& g : ensemble.members) ++counts[static_cast<std::size_t>(shared_count(g, i, j))];
    std::vector<double> probs(n + 1);
    const auto total = static_cast<double>(ensemble.members.size());
    for (std::size_t k = 0; k <= n; ++k) probs[k] = static_cast<double>(counts[k]) / total;
    return Pmf::from_probs(std::move(probs));
}

}  // namespace spine
