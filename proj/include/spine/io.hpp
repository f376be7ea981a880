#pragma once

// Graph and backbone files.
//
// Edge list: one "agent_id,artifact_id" pair per line, an optional
// "agent,artifact" header, ids mapped to indices in order of first
// appearance. Writing also produces <path>.ids.json holding both id lists,
// which reading picks up so that id order and isolated nodes survive a
// round trip.
//
// Dense: CSV whose first row is a corner cell followed by artifact ids, and
// whose remaining rows are an agent id followed by 0/1 cells.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spine/bigraph.hpp"

namespace spine {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    // 1-based; 0 when the problem is not tied to a line.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct LabeledGraph {
    BipartiteGraph graph{1, 1};
    std::vector<std::string> agent_ids;
    std::vector<std::string> artifact_ids;
    std::vector<std::string> warnings;
};

enum class GraphFormat { edge_list, dense };

// ".csv" means dense; anything else is an edge list.
GraphFormat format_for_path(const std::filesystem::path& path);
GraphFormat parse_graph_format(std::string_view name);  // "edges" or "dense"

std::filesystem::path sidecar_path(const std::filesystem::path& path);

LabeledGraph parse_edge_list(std::istream& in, const std::vector<std::string>* agent_order = nullptr,
                             const std::vector<std::string>* artifact_order = nullptr);
LabeledGraph parse_dense(std::istream& in);

LabeledGraph read_graph(const std::filesystem::path& path, std::optional<GraphFormat> format = std::nullopt);
void write_graph(const LabeledGraph& g, const std::filesystem::path& path,
                 std::optional<GraphFormat> format = std::nullopt);

// Default ids a0.., k0.. for an unlabeled graph.
LabeledGraph label(BipartiteGraph g);

// <prefix>.edges.csv lists retained edges; <prefix>.pvalues.csv lists every
// unordered pair with weight, both tails and the decision.
void write_backbone(const Backbone& b, const Projection& p, const std::vector<std::string>& agent_ids,
                    const std::filesystem::path& prefix);

// p-values are written with 10 significant digits.
std::string format_pvalue(double p);

}  // namespace spine
