#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace epifamily::cld {

enum class Role { input, state, output, ignored };
Role parse_role(std::string_view name);
std::string_view to_string(Role role) noexcept;

struct Node {
    std::string id;
    Role role = Role::state;
    std::string label;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    std::string from;
    std::string to;
    /// +1 or -1.
    int sign = 1;
    bool covered = false;
    /// Dashed edge: the link is implemented inversely in the model.
    bool inverse = false;

    friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeKey = std::pair<std::string, std::string>;

class CldGraph {
  public:
    CldGraph() = default;

    /// Throws InputError on a duplicate id.
    void add_node(Node node);
    /// Throws InputError on a dangling endpoint, a duplicate edge, or a
    /// covered edge between two ignored nodes.
    void add_edge(Edge edge);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::optional<std::size_t> node_index(std::string_view id) const;
    const Node& node(std::string_view id) const;
    const Edge* find_edge(std::string_view from, std::string_view to) const;

    friend bool operator==(const CldGraph& a, const CldGraph& b)
    {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

  private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Parses the line DSL:
///   node <id> <input|state|output|ignored> ["label"]
///   edge <from> -> <to> <+|-> [covered] [inverse]
/// with `#` comments. Errors carry `origin:line`.
CldGraph parse_cld(std::string_view text, std::string_view origin = "<input>");
CldGraph read_cld(const std::filesystem::path& path);
std::string serialize_cld(const CldGraph& graph);
/// Graphviz export; ignored nodes and uncovered edges are drawn grey, inverse edges dashed.
std::string to_dot(const CldGraph& graph, std::string_view name = "cld");

/// Simple directed cycles, each listed once as node ids starting from its
/// smallest node index (the closing node is not repeated).
std::vector<std::vector<std::string>> enumerate_cycles(const CldGraph& graph, std::size_t limit = 1'000'000);

struct ModelCoverage {
    std::string name;
    std::set<std::string> nodes;
    std::set<EdgeKey> edges;
    /// Covered model edges that are not part of the system graph.
    std::set<EdgeKey> extra_edges;
    /// Covered system edges drawn as implemented inversely.
    std::set<EdgeKey> inverse_edges;
    /// System cycles the model covers partly: at least one covered and one uncovered edge.
    std::vector<std::vector<std::string>> broken_loops;
};

struct Overlap {
    std::set<std::string> nodes;
    std::set<EdgeKey> edges;
};

struct CoverageReport {
    std::vector<ModelCoverage> models;
    /// Keyed by the ordered model-name pair; both orders are present.
    std::map<std::pair<std::string, std::string>, Overlap> overlaps;
    std::set<std::string> covered_nodes;
    std::set<EdgeKey> covered_edges;
    std::set<std::string> uncovered_nodes;
    /// Node id -> the only model covering it.
    std::map<std::string, std::string> single_model_nodes;
    std::size_t system_cycles = 0;
    /// System cycles with at least one uncovered edge in every model.
    std::vector<std::vector<std::string>> broken_loops;

    const ModelCoverage& model(std::string_view name) const;
};

/// Throws InputError when a model node is missing from the system graph.
CoverageReport coverage_report(const CldGraph& system, const std::vector<std::pair<std::string, CldGraph>>& models);

nlohmann::json to_json(const CoverageReport& report);

} // namespace epifamily::cld
