#pragma once

// Synthetic bipartite graphs with Beta-shaped degree distributions and
// planted two-group block structure.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spine/bigraph.hpp"

namespace spine {

struct DegreeShape {
    std::string name;
    double beta_a = 1.0;
    double beta_b = 1.0;

    static DegreeShape right() { return {"right", 1.0, 10.0}; }
    static DegreeShape left() { return {"left", 10.0, 1.0}; }
    static DegreeShape uniform() { return {"uniform", 1.0, 1.0}; }
    static DegreeShape constant() { return {"constant", 10000.0, 10000.0}; }
    static DegreeShape normal() { return {"normal", 10.0, 10.0}; }

    static std::vector<DegreeShape> presets();
    // Throws std::invalid_argument for unknown names.
    static DegreeShape parse(std::string_view name);
};

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Degree sequences proportional to Beta(a, b) weights with sum
// round(density m n), capped at the opposite side's size and resampled until
// they are jointly realizable (at most 100 attempts, else GenerationError).
// The graph is built by a greedy Gale-Ryser construction and then shuffled
// with curveball trades, so realized degrees and density are exact.
BipartiteGraph generate(std::size_t agents, std::size_t artifacts, double density, const DegreeShape& agent_shape,
                        const DegreeShape& artifact_shape, std::uint64_t seed);

// Integer sequence with the given total, as close to proportional to
// `weights` as the per-entry cap allows (largest-remainder rounding).
std::vector<int> apportion(const std::vector<double>& weights, long total, int cap);

struct PlantedPartition {
    std::vector<int> agent_groups;     // 0 or 1
    std::vector<int> artifact_groups;  // 0 or 1

    // Throws std::invalid_argument unless each side has both groups.
    void validate(std::size_t agents, std::size_t artifacts) const;
};

// Balanced split: a random ceil(k/2) of each side in group 0. With
// `balanced` false, every node flips a fair coin (redrawn until both groups
// are present).
PlantedPartition random_partition(std::size_t agents, std::size_t artifacts, std::uint64_t seed, bool balanced = true);

// Fraction of filled cells joining an agent and artifact of the same group.
// Throws std::domain_error when the graph is empty.
double within_fraction(const BipartiteGraph& g, const PlantedPartition& part);

struct PlantResult {
    BipartiteGraph graph;
    double within = 0.0;
    bool attained = false;
    std::size_t swaps = 0;
};

// Checkerboard swaps (i,k),(j,l) -> (i,l),(j,k) that turn two cross-group
// cells into two within-group cells, until the within fraction reaches
// `target`. Candidates are sampled uniformly from the cross-group cells;
// 50 f consecutive failed samples mark the target unattainable.
PlantResult plant_blocks(const BipartiteGraph& g, const PlantedPartition& part, double target, std::uint64_t seed);

}  // namespace spine
