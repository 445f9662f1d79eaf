#pragma once

#include "agentsim/graph.hpp"
#include "agentsim/procedure.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agentsim {

// Frames for the R-path operations on namespace `ns`.
inline ScriptOp rp_init(unsigned ns) { return ScriptOp::call(Proc::RpInit, regs::ns(ns)); }
inline ScriptOp rp_move_to_top(unsigned ns) { return ScriptOp::call(Proc::RpMoveToTop, regs::ns(ns)); }
inline ScriptOp rp_move_one_hop(unsigned ns) { return ScriptOp::call(Proc::RpMoveOneHop, regs::ns(ns)); }
inline ScriptOp rp_move_target(unsigned ns) { return ScriptOp::call(Proc::RpMoveTarget, regs::ns(ns)); }
inline ScriptOp rp_modify_move(unsigned ns) { return ScriptOp::call(Proc::RpModifyMove, regs::ns(ns)); }
inline ScriptOp rp_delete(unsigned ns) { return ScriptOp::call(Proc::RpDelete, regs::ns(ns)); }
inline ScriptOp rp_copy(unsigned src, unsigned dst) { return ScriptOp::call(Proc::RpCopy, regs::ns2(src, dst)); }
inline ScriptOp rp_modify_successor(unsigned ns)
{
    return ScriptOp::call(Proc::RpModifyNeighbor, regs::modify_neighbor(ns, false));
}
inline ScriptOp rp_modify_predecessor(unsigned ns)
{
    return ScriptOp::call(Proc::RpModifyNeighbor, regs::modify_neighbor(ns, true));
}

// Storage schema with `count` R-path namespaces (named X0, X1, ...) plus the
// DFS fields and two more R-paths used internally by the neighbor operations.
struct RpathSetup {
    StorageSchema schema;
    Layout layout;
};
RpathSetup rpath_setup(unsigned count);

// Node-level view of one namespace.
struct RpathFieldsView {
    bool target = false;
    bool in_path = false;
    bool direction = false;
    unsigned color = 0;
};
RpathFieldsView rpath_fields(const StorageArray &storage, const Layout &layout, unsigned ns, NodeId v);

enum class Consistency { Strong, Consistent, Violation };

struct ConsistencyReport {
    Consistency level = Consistency::Violation;
    std::size_t components = 0;
    std::vector<std::string> violations;
    bool strong() const noexcept { return level == Consistency::Strong; }
};

// Global check of the three consistency conditions for the s-t path held in
// namespace `ns`; strong when the in-path nodes form a single component.
ConsistencyReport check_consistency(const StorageArray &storage, const Layout &layout, unsigned ns,
                                    const PortGraph &graph, NodeId source, NodeId target);

// In-path nodes in order from `source`, if they form a single simple path.
std::optional<std::vector<NodeId>> extract_path(const StorageArray &storage, const Layout &layout, unsigned ns,
                                                const PortGraph &graph, NodeId source);

// Reference model holding the path as an explicit node list.
class ShadowPath {
public:
    ShadowPath() = default;
    explicit ShadowPath(NodeId source) : nodes_{source} {}

    const std::vector<NodeId> &nodes() const noexcept { return nodes_; }
    NodeId source() const { return nodes_.front(); }
    NodeId target() const { return nodes_.back(); }

    // Retargets to t2, a neighbor of the current target. Returns the
    // branching node, or nullopt for the drop-the-tail case.
    std::optional<NodeId> modify_move(const PortGraph &graph, NodeId t2);
    void reset() { nodes_.resize(1); }
    void assign(std::vector<NodeId> nodes) { nodes_ = std::move(nodes); }

private:
    std::vector<NodeId> nodes_;
};

// Path held by the DFS head tracker at the first visit of each preorder node.
std::vector<std::vector<NodeId>> head_paths(const PortGraph &graph, NodeId root);

struct RpathFuzzConfig {
    std::uint64_t seed = 1;
    std::size_t sequences_per_graph = 25;
    std::size_t max_ops = 8;
    // Include successor/predecessor on graphs up to this size.
    std::size_t neighbor_ops_max_n = 12;
    // Flip one direction bit after the first extension, to exercise detection.
    bool inject_fault = false;
};

struct RpathFuzzReport {
    std::size_t graphs = 0;
    std::size_t sequences = 0;
    std::size_t operations = 0;
    std::size_t branching_checks = 0;
    std::uint64_t moves = 0;
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

// Runs random operation sequences on namespaces 0 and 1 of every graph,
// checking strong consistency and the shadow model after every operation and
// the branching-node coloring inside every ModifyMove.
RpathFuzzReport fuzz_rpath(std::span<const PortGraph> graphs, const RpathFuzzConfig &config);

} // namespace agentsim
