#include "epifamily/cld.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "epifamily/error.hpp"

namespace epifamily::cld {

namespace {

constexpr std::array<std::string_view, 4> role_names{"input", "state", "output", "ignored"};

bool valid_id(std::string_view id)
{
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

struct Located {
    std::string message;
};

class LineScanner {
  public:
    explicit LineScanner(std::string_view line) : line_(line) {}

    std::optional<std::string_view> word()
    {
        skip_space();
        if (pos_ >= line_.size() || line_[pos_] == '"')
            return std::nullopt;
        const auto begin = pos_;
        while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])))
            ++pos_;
        return line_.substr(begin, pos_ - begin);
    }

    /// Quoted label with \" and \\ escapes; nullopt when none follows.
    std::optional<std::string> quoted()
    {
        skip_space();
        if (pos_ >= line_.size() || line_[pos_] != '"')
            return std::nullopt;
        ++pos_;
        std::string out;
        while (pos_ < line_.size()) {
            const char c = line_[pos_++];
            if (c == '"')
                return out;
            if (c == '\\' && pos_ < line_.size())
                out.push_back(line_[pos_++]);
            else
                out.push_back(c);
        }
        throw Located{"unterminated label"};
    }

    bool at_end()
    {
        skip_space();
        return pos_ >= line_.size();
    }

  private:
    void skip_space()
    {
        while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
            ++pos_;
    }

    std::string_view line_;
    std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line)
{
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && in_quote) {
            ++i;
        } else if (line[i] == '"') {
            in_quote = !in_quote;
        } else if (line[i] == '#' && !in_quote) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string quote(std::string_view label)
{
    std::string out = "\"";
    for (char c : label) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string edge_name(const EdgeKey& key) { return key.first + " -> " + key.second; }

} // namespace

Role parse_role(std::string_view name)
{
    for (std::size_t i = 0; i < role_names.size(); ++i)
        if (role_names[i] == name)
            return static_cast<Role>(i);
    throw InputError("unknown role '" + std::string(name) + "'");
}

std::string_view to_string(Role role) noexcept { return role_names[static_cast<std::size_t>(role)]; }

void CldGraph::add_node(Node node)
{
    if (!valid_id(node.id))
        throw InputError("invalid node id '" + node.id + "'");
    if (index_.count(node.id))
        throw InputError("duplicate node id '" + node.id + "'");
    index_.emplace(node.id, nodes_.size());
    nodes_.push_back(std::move(node));
}

void CldGraph::add_edge(Edge edge)
{
    for (const auto* end : {&edge.from, &edge.to})
        if (!index_.count(*end))
            throw InputError("edge endpoint '" + *end + "' is not a declared node");
    if (edge.sign != 1 && edge.sign != -1)
        throw InputError("edge sign must be + or -");
    if (find_edge(edge.from, edge.to))
        throw InputError("duplicate edge " + edge.from + " -> " + edge.to);
    if (edge.covered && node(edge.from).role == Role::ignored && node(edge.to).role == Role::ignored)
        throw InputError("covered edge " + edge.from + " -> " + edge.to + " connects two ignored nodes");
    edges_.push_back(std::move(edge));
}

std::optional<std::size_t> CldGraph::node_index(std::string_view id) const
{
    const auto it = index_.find(id);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

const Node& CldGraph::node(std::string_view id) const
{
    const auto i = node_index(id);
    if (!i)
        throw InputError("unknown node '" + std::string(id) + "'");
    return nodes_[*i];
}

const Edge* CldGraph::find_edge(std::string_view from, std::string_view to) const
{
    for (const auto& e : edges_)
        if (e.from == from && e.to == to)
            return &e;
    return nullptr;
}

CldGraph parse_cld(std::string_view text, std::string_view origin)
{
    CldGraph graph;
    std::vector<std::pair<std::size_t, Edge>> pending;
    std::size_t line_no = 0;
    auto where = [&](std::size_t line) { return std::string(origin) + ":" + std::to_string(line) + ": "; };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        try {
            LineScanner scan(strip_comment(line));
            const auto keyword = scan.word();
            if (!keyword) {
                if (!scan.at_end())
                    throw Located{"expected 'node' or 'edge'"};
                continue;
            }
            if (*keyword == "node") {
                const auto id = scan.word();
                const auto role = scan.word();
                if (!id || !role)
                    throw Located{"expected 'node <id> <role> [\"label\"]'"};
                Node node{std::string(*id), Role::state, {}};
                try {
                    node.role = parse_role(*role);
                } catch (const InputError& e) {
                    throw Located{e.what()};
                }
                if (auto label = scan.quoted())
                    node.label = std::move(*label);
                if (!scan.at_end())
                    throw Located{"unexpected text after node statement"};
                try {
                    graph.add_node(std::move(node));
                } catch (const InputError& e) {
                    throw Located{e.what()};
                }
            } else if (*keyword == "edge") {
                const auto from = scan.word();
                const auto arrow = scan.word();
                const auto to = scan.word();
                const auto sign = scan.word();
                if (!from || !arrow || *arrow != "->" || !to || !sign)
                    throw Located{"expected 'edge <from> -> <to> <+|-> [covered] [inverse]'"};
                Edge edge{std::string(*from), std::string(*to), 1, false, false};
                if (*sign == "+")
                    edge.sign = 1;
                else if (*sign == "-")
                    edge.sign = -1;
                else
                    throw Located{"edge sign must be + or -, got '" + std::string(*sign) + "'"};
                while (const auto flag = scan.word()) {
                    if (*flag == "covered" && !edge.covered)
                        edge.covered = true;
                    else if (*flag == "inverse" && !edge.inverse)
                        edge.inverse = true;
                    else
                        throw Located{"unexpected edge flag '" + std::string(*flag) + "'"};
                }
                if (!scan.at_end())
                    throw Located{"unexpected text after edge statement"};
                pending.emplace_back(line_no, std::move(edge));
            } else {
                throw Located{"unknown statement '" + std::string(*keyword) + "'"};
            }
        } catch (const Located& e) {
            throw InputError(where(line_no) + e.message);
        }
    }

    // Edges may reference nodes declared further down.
    for (auto& [line, edge] : pending) {
        try {
            graph.add_edge(std::move(edge));
        } catch (const InputError& e) {
            throw InputError(where(line) + e.what());
        }
    }
    return graph;
}

CldGraph read_cld(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open diagram " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_cld(buffer.str(), path.string());
}

std::string serialize_cld(const CldGraph& graph)
{
    std::string out;
    for (const auto& n : graph.nodes()) {
        out += "node " + n.id + " " + std::string(to_string(n.role));
        if (!n.label.empty())
            out += " " + quote(n.label);
        out += '\n';
    }
    for (const auto& e : graph.edges()) {
        out += "edge " + e.from + " -> " + e.to + (e.sign > 0 ? " +" : " -");
        if (e.covered)
            out += " covered";
        if (e.inverse)
            out += " inverse";
        out += '\n';
    }
    return out;
}

std::string to_dot(const CldGraph& graph, std::string_view name)
{
    static constexpr std::array<std::string_view, 4> colors{"darkgreen", "black", "blue", "lightgrey"};
    std::string out = "digraph " + quote(name) + " {\n";
    for (const auto& n : graph.nodes()) {
        const auto color = colors[static_cast<std::size_t>(n.role)];
        out += "  " + quote(n.id) + " [label=" + quote(n.label.empty() ? n.id : n.label) + ", color=" +
               std::string(color) + ", fontcolor=" + std::string(color) + "];\n";
    }
    for (const auto& e : graph.edges()) {
        out += "  " + quote(e.from) + " -> " + quote(e.to) + " [label=\"" + (e.sign > 0 ? "+" : "-") +
               "\", color=" + (e.covered ? "black" : "lightgrey");
        if (e.inverse)
            out += ", style=dashed";
        out += "];\n";
    }
    out += "}\n";
    return out;
}

std::vector<std::vector<std::string>> enumerate_cycles(const CldGraph& graph, std::size_t limit)
{
    const auto n = graph.nodes().size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : graph.edges())
        adj[*graph.node_index(e.from)].push_back(*graph.node_index(e.to));
    for (auto& a : adj)
        std::sort(a.begin(), a.end());

    std::vector<std::vector<std::string>> cycles;
    std::vector<std::size_t> path;
    std::vector<char> on_path(n, 0);

    // Depth-first search over paths whose nodes all exceed the start index.
    auto search = [&](auto&& self, std::size_t start, std::size_t v) -> void {
        for (const auto w : adj[v]) {
            if (w == start) {
                if (cycles.size() >= limit)
                    throw NumericalError("cycle enumeration exceeded " + std::to_string(limit) + " cycles");
                std::vector<std::string> ids;
                ids.reserve(path.size());
                for (const auto p : path)
                    ids.push_back(graph.nodes()[p].id);
                cycles.push_back(std::move(ids));
            } else if (w > start && !on_path[w]) {
                on_path[w] = 1;
                path.push_back(w);
                self(self, start, w);
                path.pop_back();
                on_path[w] = 0;
            }
        }
    };
    for (std::size_t s = 0; s < n; ++s) {
        path.assign(1, s);
        on_path[s] = 1;
        search(search, s, s);
        on_path[s] = 0;
    }
    return cycles;
}

const ModelCoverage& CoverageReport::model(std::string_view name) const
{
    for (const auto& m : models)
        if (m.name == name)
            return m;
    throw InputError("no model named '" + std::string(name) + "' in the report");
}

CoverageReport coverage_report(const CldGraph& system, const std::vector<std::pair<std::string, CldGraph>>& models)
{
    CoverageReport report;
    std::set<std::string> names;
    for (const auto& [name, graph] : models) {
        if (!names.insert(name).second)
            throw InputError("duplicate model name '" + name + "'");
        ModelCoverage cov;
        cov.name = name;
        for (const auto& n : graph.nodes()) {
            if (!system.node_index(n.id))
                throw InputError("model '" + name + "' node '" + n.id + "' is not in the system graph");
            if (n.role != Role::ignored)
                cov.nodes.insert(n.id);
        }
        for (const auto& e : graph.edges()) {
            if (!e.covered)
                continue;
            EdgeKey key{e.from, e.to};
            if (!system.find_edge(e.from, e.to)) {
                cov.extra_edges.insert(std::move(key));
                continue;
            }
            if (e.inverse)
                cov.inverse_edges.insert(key);
            cov.edges.insert(std::move(key));
        }
        report.covered_nodes.insert(cov.nodes.begin(), cov.nodes.end());
        report.covered_edges.insert(cov.edges.begin(), cov.edges.end());
        report.models.push_back(std::move(cov));
    }

    for (const auto& a : report.models) {
        for (const auto& b : report.models) {
            if (a.name == b.name)
                continue;
            Overlap o;
            std::set_intersection(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                                  std::inserter(o.nodes, o.nodes.end()));
            std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                                  std::inserter(o.edges, o.edges.end()));
            report.overlaps.emplace(std::pair{a.name, b.name}, std::move(o));
        }
    }

    for (const auto& n : system.nodes()) {
        if (!report.covered_nodes.count(n.id)) {
            report.uncovered_nodes.insert(n.id);
            continue;
        }
        const ModelCoverage* only = nullptr;
        std::size_t count = 0;
        for (const auto& m : report.models)
            if (m.nodes.count(n.id)) {
                only = &m;
                ++count;
            }
        if (count == 1)
            report.single_model_nodes.emplace(n.id, only->name);
    }

    const auto cycles = enumerate_cycles(system);
    report.system_cycles = cycles.size();
    for (const auto& cycle : cycles) {
        bool fully_covered_somewhere = false;
        for (auto& m : report.models) {
            std::size_t covered = 0;
            for (std::size_t i = 0; i < cycle.size(); ++i)
                covered += m.edges.count({cycle[i], cycle[(i + 1) % cycle.size()]});
            if (covered == cycle.size())
                fully_covered_somewhere = true;
            else if (covered > 0)
                m.broken_loops.push_back(cycle);
        }
        if (!fully_covered_somewhere)
            report.broken_loops.push_back(cycle);
    }
    return report;
}

nlohmann::json to_json(const CoverageReport& report)
{
    auto edges_json = [](const std::set<EdgeKey>& edges) {
        auto out = nlohmann::json::array();
        for (const auto& e : edges)
            out.push_back(edge_name(e));
        return out;
    };
    nlohmann::json j;
    j["models"] = nlohmann::json::array();
    for (const auto& m : report.models) {
        j["models"].push_back({{"name", m.name},
                               {"covered_nodes", m.nodes},
                               {"covered_edges", edges_json(m.edges)},
                               {"inverse_edges", edges_json(m.inverse_edges)},
                               {"extra_edges", edges_json(m.extra_edges)},
                               {"broken_loops", m.broken_loops}});
    }
    j["overlaps"] = nlohmann::json::array();
    for (const auto& [pair, o] : report.overlaps) {
        if (pair.first > pair.second)
            continue;
        j["overlaps"].push_back(
            {{"models", {pair.first, pair.second}}, {"nodes", o.nodes}, {"edges", edges_json(o.edges)}});
    }
    j["covered_nodes"] = report.covered_nodes;
    j["uncovered_nodes"] = report.uncovered_nodes;
    j["single_model_nodes"] = report.single_model_nodes;
    j["system_cycles"] = report.system_cycles;
    j["broken_loops"] = report.broken_loops;
    return j;
}

} // namespace epifamily::cld
