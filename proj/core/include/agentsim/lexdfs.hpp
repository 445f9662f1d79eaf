#pragma once

#include "agentsim/graph.hpp"
#include "agentsim/procedure.hpp"
#include "agentsim/runtime.hpp"

#include <memory>
#include <string>
#include <vector>

namespace agentsim {

inline constexpr NodeId kNoParent = static_cast<NodeId>(-1);

struct LexDfsOracleResult {
    std::vector<NodeId> preorder;
    std::vector<NodeId> parent;  // kNoParent at the root
};

// Recursive DFS expanding neighbors in ascending port order.
LexDfsOracleResult oracle_lexdfs(const PortGraph &graph, NodeId root);

// Brute-force check of the grey-path lemma on every root path of the oracle
// tree described by `result`. Returns human-readable violations.
std::vector<std::string> check_lemma1(const PortGraph &graph, NodeId root, const LexDfsOracleResult &result);
std::vector<std::string> check_lemma1(const PortGraph &graph, NodeId root);

// Nodes on the tree path from the root to v, root first.
std::vector<NodeId> tree_path(const LexDfsOracleResult &result, NodeId v);

// The DFS agent. With `reset`, a second pass with black and white swapped
// restores all DFS fields to zero before halting.
class DldfsProgram : public ProcedureProgram {
public:
    explicit DldfsProgram(bool reset = true);
};

// Writes |V| mod 2 into the `out` field at the final node.
class ParityProgram : public ProcedureProgram {
public:
    ParityProgram();
};

// Schema shared by the DFS-based programs.
struct DfsSetup {
    StorageSchema schema;
    Layout layout;
};
DfsSetup dfs_setup(bool with_out = false);

// Deliberately broken: the DFS agent plus a visited-node counter kept in
// memory with a width that grows with n.
class CountingDfsProgram : public AgentProgram {
public:
    CountingDfsProgram();
    std::string name() const override { return "counting-dfs"; }
    const StorageSchema &schema() const override { return inner_.schema(); }
    unsigned memory_width() const override { return inner_.memory_width() + 64; }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

private:
    DldfsProgram inner_;
};

struct DldfsRun {
    std::vector<NodeId> visit_order;
    ExecutionTrace trace;
    std::vector<std::string> violations;  // grey-set invariant failures
};

// Runs the DFS agent from `root`, collecting first visits. With
// `check_grey`, verifies after every activation that the grey and green
// nodes form exactly the oracle root path of the search head.
DldfsRun run_dldfs(const PortGraph &graph, NodeId root, bool reset = true, bool check_grey = false,
                   std::uint64_t step_limit = 100'000'000);

} // namespace agentsim
