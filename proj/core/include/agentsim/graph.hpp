#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agentsim {

using NodeId = std::uint32_t;
using Port = std::int32_t;

// Far end of an edge as seen from one endpoint.
struct PortEntry {
    NodeId neighbor = 0;
    Port reverse = 0;

    friend bool operator==(const PortEntry &, const PortEntry &) = default;
};

struct Edge {
    NodeId u = 0;
    Port pu = 0;
    NodeId v = 0;
    Port pv = 0;

    friend bool operator==(const Edge &, const Edge &) = default;
};

// Undirected graph with a local port numbering at every node. Immutable once
// built; node ids exist for files and traces only.
class PortGraph {
public:
    PortGraph() = default;
    // Builds from per-node port tables without validating them.
    explicit PortGraph(std::vector<std::vector<PortEntry>> adjacency);

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return entries_.size() / 2; }
    Port degree(NodeId v) const noexcept { return static_cast<Port>(offsets_[v + 1] - offsets_[v]); }
    const PortEntry &at(NodeId v, Port p) const noexcept { return entries_[offsets_[v] + static_cast<std::size_t>(p)]; }
    std::span<const PortEntry> ports(NodeId v) const noexcept
    {
        return {entries_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }
    // Port at `v` leading to `u`, if adjacent.
    std::optional<Port> port_to(NodeId v, NodeId u) const noexcept;
    Port max_degree() const noexcept;

    // Each edge once with u < v.
    std::vector<Edge> edges() const;

    friend bool operator==(const PortGraph &, const PortGraph &) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<PortEntry> entries_;
};

struct Violation {
    std::string message;
    std::optional<NodeId> node;
    std::optional<Port> port;
};

struct ValidityReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

ValidityReport validate(const PortGraph &graph);

// Builds a graph from an edge list, numbering each node's ports by the rank of
// the neighbor id. Throws on self-loops, duplicates or out-of-range ids.
PortGraph canonical_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges);

// Renumbers each node's ports with a seeded shuffle.
PortGraph shuffle_ports(const PortGraph &graph, std::uint64_t seed);

// Renames node v to perm[v]; port tables move with their nodes.
PortGraph relabel(const PortGraph &graph, std::span<const NodeId> perm);

enum class Family { Path, Cycle, Star, Complete, RandomTree, RandomConnected };

struct GraphFamilySpec {
    Family family = Family::Path;
    std::size_t n = 1;
    std::optional<std::size_t> max_degree;
    std::uint64_t seed = 0;
};

class InfeasibleSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

PortGraph generate(const GraphFamilySpec &spec);
Family parse_family(const std::string &name);
std::string family_name(Family f);

class GraphParseError : public std::runtime_error {
public:
    GraphParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// `.pg` text format. read_pg validates and throws GraphParseError or
// std::invalid_argument on an invalid graph.
PortGraph read_pg(std::istream &in);
void write_pg(std::ostream &out, const PortGraph &graph);
PortGraph load_graph(const std::filesystem::path &path);
void save_graph(const std::filesystem::path &path, const PortGraph &graph);

// Every connected simple graph on n nodes (labelled: one per edge subset; up
// to isomorphism: one canonical representative per class), canonical ports.
std::vector<PortGraph> connected_graphs(std::size_t n, bool up_to_isomorphism);

} // namespace agentsim
