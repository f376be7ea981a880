#include "spine/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

namespace spine {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct IdMap {
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t get(const std::string& id) {
        auto [it, fresh] = index.emplace(id, ids.size());
        if (fresh) ids.push_back(id);
        return it->second;
    }
};

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

GraphFormat format_for_path(const std::filesystem::path& path) {
    return lower(path.extension().string()) == ".csv" ? GraphFormat::dense : GraphFormat::edge_list;
}

GraphFormat parse_graph_format(std::string_view name) {
    if (name == "edges") return GraphFormat::edge_list;
    if (name == "dense") return GraphFormat::dense;
    throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected edges or dense)");
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".ids.json");
}

LabeledGraph parse_edge_list(std::istream& in, const std::vector<std::string>* agent_order,
                             const std::vector<std::string>* artifact_order) {
    IdMap agents;
    IdMap artifacts;
    if (agent_order)
        for (const auto& id : *agent_order) agents.get(id);
    if (artifact_order)
        for (const auto& id : *artifact_order) artifacts.get(id);
    const std::size_t known_agents = agents.ids.size();
    const std::size_t known_artifacts = artifacts.ids.size();

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 2) throw ParseError(lineno, "expected two comma-separated fields, got " + std::to_string(fields.size()));
        if (first) {
            first = false;
            const auto a = lower(fields[0]);
            const auto b = lower(fields[1]);
            if ((a == "agent" || a == "agent_id") && (b == "artifact" || b == "artifact_id")) continue;
        }
        if (fields[0].empty() || fields[1].empty()) throw ParseError(lineno, "empty id");
        cells.emplace_back(agents.get(fields[0]), artifacts.get(fields[1]));
    }
    if (agents.ids.empty() || artifacts.ids.empty()) throw ParseError(lineno, "edge list has no edges");

    LabeledGraph out;
    out.graph = BipartiteGraph(agents.ids.size(), artifacts.ids.size());
    std::size_t duplicates = 0;
    for (auto [i, k] : cells) {
        if (out.graph.at(i, k))
            ++duplicates;
        else
            out.graph.set(i, k, true);
    }
    if (duplicates) out.warnings.push_back(std::to_string(duplicates) + " duplicate edge(s) collapsed");
    if ((agent_order && agents.ids.size() > known_agents) || (artifact_order && artifacts.ids.size() > known_artifacts))
        out.warnings.push_back("edge list mentions ids missing from the sidecar; they were appended");
    out.agent_ids = std::move(agents.ids);
    out.artifact_ids = std::move(artifacts.ids);
    return out;
}

LabeledGraph parse_dense(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    LabeledGraph out;
    std::vector<std::vector<int>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (header.empty()) {
            if (fields.size() < 2) throw ParseError(lineno, "header needs a corner cell and at least one artifact id");
            header = std::move(fields);
            continue;
        }
        if (fields.size() != header.size())
            throw ParseError(lineno, "expected " + std::to_string(header.size()) + " cells, got " +
                                         std::to_string(fields.size()));
        std::vector<int> row;
        row.reserve(fields.size() - 1);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c] != "0" && fields[c] != "1")
                throw ParseError(lineno, "cell '" + fields[c] + "' in column " + std::to_string(c + 1) + " is not 0 or 1");
            row.push_back(fields[c] == "1");
        }
        out.agent_ids.push_back(fields[0]);
        rows.push_back(std::move(row));
    }
    if (header.empty() || rows.empty()) throw ParseError(lineno, "matrix has no rows");
    out.artifact_ids.assign(header.begin() + 1, header.end());
    out.graph = BipartiteGraph::from_dense(rows);
    return out;
}

LabeledGraph read_graph(const std::filesystem::path& path, std::optional<GraphFormat> format) {
    const GraphFormat f = format.value_or(format_for_path(path));
    auto in = open_in(path);
    if (f == GraphFormat::dense) return parse_dense(in);
    const auto side = sidecar_path(path);
    if (!std::filesystem::exists(side)) return parse_edge_list(in);
    nlohmann::json ids;
    try {
        std::ifstream s(side);
        s >> ids;
        const auto agents = ids.at("agents").get<std::vector<std::string>>();
        const auto artifacts = ids.at("artifacts").get<std::vector<std::string>>();
        return parse_edge_list(in, &agents, &artifacts);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, side.string() + ": " + e.what());
    }
}

void write_graph(const LabeledGraph& g, const std::filesystem::path& path, std::optional<GraphFormat> format) {
    const GraphFormat f = format.value_or(format_for_path(path));
    const BipartiteGraph& b = g.graph;
    auto out = open_out(path);
    if (f == GraphFormat::dense) {
        out << "agent";
        for (const auto& id : g.artifact_ids) out << ',' << id;
        out << '\n';
        for (std::size_t i = 0; i < b.agents(); ++i) {
            out << g.agent_ids[i];
            for (std::size_t k = 0; k < b.artifacts(); ++k) out << ',' << (b.at(i, k) ? '1' : '0');
            out << '\n';
        }
        return;
    }
    out << "agent,artifact\n";
    for (std::size_t i = 0; i < b.agents(); ++i)
        for (std::size_t k : b.row_items(i)) out << g.agent_ids[i] << ',' << g.artifact_ids[k] << '\n';
    auto side = open_out(sidecar_path(path));
    side << nlohmann::json{{"agents", g.agent_ids}, {"artifacts", g.artifact_ids}}.dump(1) << '\n';
}

LabeledGraph label(BipartiteGraph g) {
    LabeledGraph out;
    for (std::size_t i = 0; i < g.agents(); ++i) out.agent_ids.push_back("a" + std::to_string(i));
    for (std::size_t k = 0; k < g.artifacts(); ++k) out.artifact_ids.push_back("k" + std::to_string(k));
    out.graph = std::move(g);
    return out;
}

std::string format_pvalue(double p) {
    std::ostringstream os;
    os << std::setprecision(10) << p;
    return os.str();
}

void write_backbone(const Backbone& b, const Projection& p, const std::vector<std::string>& agent_ids,
                    const std::filesystem::path& prefix) {
    if (agent_ids.size() != b.agents || p.agents != b.agents)
        throw std::invalid_argument("write_backbone: id list does not match the backbone");
    auto edges = open_out(prefix.string() + ".edges.csv");
    auto pvals = open_out(prefix.string() + ".pvalues.csv");
    edges << "agent_i,agent_j,weight,p_upper\n";
    pvals << "agent_i,agent_j,weight,p_upper,p_lower,retained\n";
    for (std::size_t i = 0; i < b.agents; ++i)
        for (std::size_t j = i + 1; j < b.agents; ++j) {
            const std::size_t c = i * b.agents + j;
            const std::string up = format_pvalue(b.pvalues_upper[c]);
            if (b.has_edge(i, j)) edges << agent_ids[i] << ',' << agent_ids[j] << ',' << p.weight(i, j) << ',' << up << '\n';
            pvals << agent_ids[i] << ',' << agent_ids[j] << ',' << p.weight(i, j) << ',' << up << ','
                  << format_pvalue(b.pvalues_lower[c]) << ',' << (b.has_edge(i, j) ? 1 : 0) << '\n';
        }
}

}  // namespace spine
