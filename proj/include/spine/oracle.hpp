#pragma once

// Exhaustive enumeration of small fixed-degree-sequence ensembles. Ground
// truth for cell-probability accuracy and for sampler uniformity checks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spine/bigraph.hpp"
#include "spine/cellprob.hpp"
#include "spine/pmf.hpp"

namespace spine {

struct EnsembleEnumeration {
    std::vector<int> row_sums;
    std::vector<int> col_sums;
    std::vector<BipartiteGraph> members;
    std::vector<double> cell_marginals;  // row-major m x n; empty when no members

    std::size_t size() const { return members.size(); }
    double marginal(std::size_t i, std::size_t k) const { return cell_marginals[i * col_sums.size() + k]; }
    CellProbMatrix marginals_as_cell_probs() const;
};

constexpr std::size_t kMaxEnumerationLength = 6;

// Gale-Ryser test for the existence of a 0/1 matrix with the given margins.
bool is_bigraphic(std::span<const int> row_sums, std::span<const int> col_sums);

// One matrix with the given margins. Rows are placed in decreasing degree
// order onto the columns with the most remaining capacity, ties broken by a
// shuffle drawn from `seed`. Throws std::invalid_argument if not bigraphic.
BipartiteGraph realize(std::span<const int> row_sums, std::span<const int> col_sums, std::uint64_t seed = 0);

// Cells equal in every matrix with the margins of g: +1 forced one, 0 forced
// zero, -1 free. A cell is free iff it lies on an alternating cycle, i.e. its
// endpoints share a strongly connected component of the digraph with arcs
// agent->artifact on ones and artifact->agent on zeros.
std::vector<int> forced_cells(const BipartiteGraph& g);

// All 0/1 matrices with the given margins, rows filled in order with column
// subsets chosen lexicographically. Unrealizable margins give an empty
// enumeration; sequences longer than kMaxEnumerationLength throw.
EnsembleEnumeration enumerate_fdsm(std::span<const int> row_sums, std::span<const int> col_sums);

// Exact distribution of the co-occurrence of agents i and j over all members.
Pmf exact_edge_pmf(const EnsembleEnumeration& ensemble, std::size_t i, std::size_t j);

}  // namespace spine
