#pragma once

// Bipartite incidence matrices, their agent-side projections, and backbones.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spine {

class CurveballSampler;

// Binary m x n agent-by-artifact incidence matrix. Rows are bit-packed so
// that co-occurrence counts reduce to popcounts over 64-bit words. Row and
// column sums are cached and kept consistent by every mutator.
class BipartiteGraph {
public:
    BipartiteGraph(std::size_t agents, std::size_t artifacts);

    // Dense 0/1 rows; throws std::invalid_argument on ragged input or a cell
    // that is not 0 or 1.
    static BipartiteGraph from_dense(const std::vector<std::vector<int>>& rows);

    std::size_t agents() const { return agents_; }
    std::size_t artifacts() const { return artifacts_; }
    std::int64_t fill() const { return fill_; }

    bool at(std::size_t agent, std::size_t artifact) const {
        return (bits_[agent * words_per_row_ + artifact / 64] >> (artifact % 64)) & 1U;
    }
    void set(std::size_t agent, std::size_t artifact, bool value);

    const std::vector<int>& row_sums() const { return row_sums_; }
    const std::vector<int>& col_sums() const { return col_sums_; }

    std::size_t words_per_row() const { return words_per_row_; }
    std::span<const std::uint64_t> row_words(std::size_t agent) const {
        return {bits_.data() + agent * words_per_row_, words_per_row_};
    }

    // Artifact indices present in a row, ascending.
    std::vector<std::size_t> row_items(std::size_t agent) const;

    std::vector<std::vector<int>> to_dense() const;
    BipartiteGraph transposed() const;

    friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
        return a.agents_ == b.agents_ && a.artifacts_ == b.artifacts_ && a.bits_ == b.bits_;
    }

private:
    friend class CurveballSampler;

    std::size_t agents_;
    std::size_t artifacts_;
    std::size_t words_per_row_;
    std::vector<std::uint64_t> bits_;
    std::vector<int> row_sums_;
    std::vector<int> col_sums_;
    std::int64_t fill_ = 0;
};

// Number of artifacts shared by two rows.
int shared_count(const BipartiteGraph& g, std::size_t i, std::size_t j);

// Symmetric co-occurrence matrix P = B B^T. The diagonal holds agent degrees
// and is never tested.
struct Projection {
    std::size_t agents = 0;
    std::vector<int> weights;  // row-major agents x agents, diagonal included
    std::vector<int> diagonal;

    int weight(std::size_t i, std::size_t j) const { return weights[i * agents + j]; }
};

Projection project(const BipartiteGraph& g);

double density(const BipartiteGraph& g);

// Binary agent x agent network of significant edges plus both tails of every
// pair's p-value. Entries are row-major and symmetric; the diagonal is zero
// for edges and 1 for p-values.
struct Backbone {
    std::size_t agents = 0;
    std::vector<std::uint8_t> edges;
    std::vector<double> pvalues_upper;
    std::vector<double> pvalues_lower;
    std::string model_tag;
    std::vector<std::string> warnings;

    explicit Backbone(std::size_t m = 0);

    bool has_edge(std::size_t i, std::size_t j) const { return edges[i * agents + j] != 0; }
    void set_edge(std::size_t i, std::size_t j, bool value);
    std::size_t edge_count() const;
    // Unordered pairs (i < j) that are retained.
    std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
    double edge_density() const;
};

// |intersection| / |union| over unordered edge sets. Two empty edge sets are
// identical and score 1. Throws std::invalid_argument on size mismatch.
double jaccard(const Backbone& a, const Backbone& b);

}  // namespace spine
