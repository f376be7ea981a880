#include "spine/bigraph.hpp"

#include <bit>
#include <stdexcept>

namespace spine {

BipartiteGraph::BipartiteGraph(std::size_t agents, std::size_t artifacts)
    : agents_(agents),
      artifacts_(artifacts),
      words_per_row_((artifacts + 63) / 64),
      bits_(agents * words_per_row_, 0),
      row_sums_(agents, 0),
      col_sums_(artifacts, 0) {
    if (agents == 0 || artifacts == 0) {
        throw std::invalid_argument("bipartite graph needs at least one agent and one artifact");
    }
}

BipartiteGraph BipartiteGraph::from_dense(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw std::invalid_argument("dense incidence matrix is empty");
    }
    BipartiteGraph g(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != g.artifacts_) {
            throw std::invalid_argument("dense incidence matrix is ragged at row " + std::to_string(i));
        }
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            const int v = rows[i][k];
            if (v != 0 && v != 1) {
                throw std::invalid_argument("incidence cell (" + std::to_string(i) + "," +
                                            std::to_string(k) + ") is not 0 or 1");
            }
            if (v) g.set(i, k, true);
        }
    }
    return g;
}

void BipartiteGraph::set(std::size_t agent, std::size_t artifact, bool value) {
    if (agent >= agents_ || artifact >= artifacts_) {
        throw std::out_of_range("incidence cell out of range");
    }
    std::uint64_t& word = bits_[agent * words_per_row_ + artifact / 64];
    const std::uint64_t mask = std::uint64_t{1} << (artifact % 64);
    const bool old = (word & mask) != 0;
    if (old == value) return;
    const int delta = value ? 1 : -1;
    word ^= mask;
    row_sums_[agent] += delta;
    col_sums_[artifact] += delta;
    fill_ += delta;
}

std::vector<std::size_t> BipartiteGraph::row_items(std::size_t agent) const {
    std::vector<std::size_t> items;
    items.reserve(static_cast<std::size_t>(row_sums_[agent]));
    const auto words = row_words(agent);
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
            items.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
            bits &= bits - 1;
        }
    }
    return items;
}

std::vector<std::vector<int>> BipartiteGraph::to_dense() const {
    std::vector<std::vector<int>> rows(agents_, std::vector<int>(artifacts_, 0));
    for (std::size_t i = 0; i < agents_; ++i) {
        for (std::size_t k : row_items(i)) rows[i][k] = 1;
    }
    return rows;
}

BipartiteGraph BipartiteGraph::transposed() const {
    BipartiteGraph t(artifacts_, agents_);
    for (std::size_t i = 0; i < agents_; ++i) {
        for (std::size_t k : row_items(i)) t.set(k, i, true);
    }
    return t;
}

int shared_count(const BipartiteGraph& g, std::size_t i, std::size_t j) {
    const auto a = g.row_words(i);
    const auto b = g.row_words(j);
    int count = 0;
    for (std::size_t w = 0; w < a.size(); ++w) count += std::popcount(a[w] & b[w]);
    return count;
}

Projection project(const BipartiteGraph& g) {
    const std::size_t m = g.agents();
    Projection p;
    p.agents = m;
    p.weights.assign(m * m, 0);
    p.diagonal = g.row_sums();
    for (std::size_t i = 0; i < m; ++i) {
        p.weights[i * m + i] = g.row_sums()[i];
        for (std::size_t j = i + 1; j < m; ++j) {
            const int w = shared_count(g, i, j);
            p.weights[i * m + j] = w;
            p.weights[j * m + i] = w;
        }
    }
    return p;
}

double density(const BipartiteGraph& g) {
    return static_cast<double>(g.fill()) /
           (static_cast<double>(g.agents()) * static_cast<double>(g.artifacts()));
}

Backbone::Backbone(std::size_t m)
    : agents(m), edges(m * m, 0), pvalues_upper(m * m, 1.0), pvalues_lower(m * m, 1.0) {}

void Backbone::set_edge(std::size_t i, std::size_t j, bool value) {
    if (i == j) throw std::invalid_argument("backbone has no self-loops");
    edges[i * agents + j] = value;
    edges[j * agents + i] = value;
}

std::size_t Backbone::edge_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < agents; ++i)
        for (std::size_t j = i + 1; j < agents; ++j) count += edges[i * agents + j];
    return count;
}

std::vector<std::pair<std::size_t, std::size_t>> Backbone::edge_list() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < agents; ++i)
        for (std::size_t j = i + 1; j < agents; ++j)
            if (edges[i * agents + j]) out.emplace_back(i, j);
    return out;
}

double Backbone::edge_density() const {
    if (agents < 2) return 0.0;
    const double pairs = static_cast<double>(agents) * static_cast<double>(agents - 1) / 2.0;
    return static_cast<double>(edge_count()) / pairs;
}

double jaccard(const Backbone& a, const Backbone& b) {
    if (a.agents != b.agents) {
        throw std::invalid_argument("jaccard: backbones have different agent counts (" +
                                    std::to_string(a.agents) + " vs " + std::to_string(b.agents) + ")");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    const std::size_t m = a.agents;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool x = a.edges[i * m + j] != 0;
            const bool y = b.edges[i * m + j] != 0;
            inter += x && y;
            uni += x || y;
        }
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace spine
