#pragma once

#include "agentsim/graph.hpp"
#include "agentsim/runtime.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace agentsim {

// A decision task: a global predicate and the agent deciding it.
struct DecisionTask {
    std::string name;
    std::function<bool(const PortGraph &)> member;
    std::function<std::unique_ptr<AgentProgram>()> agent;
};

DecisionTask parity_task();

struct ParityResult {
    bool output = false;
    NodeId final_node = 0;
    TraceSummary summary;
};

// Runs the parity agent and reads the output register at its final node.
ParityResult parity_agent(const PortGraph &graph, NodeId start, std::uint64_t step_limit = 100'000'000);

// Verification corpus: every connected graph on up to `exhaustive_max_n`
// nodes with canonical ports, `permutations` port shuffles of one random
// graph for each n in `permutation_ns`, and `random_count` random connected
// graphs with 2..random_max_n nodes and degree at most random_max_degree.
struct CorpusSpec {
    std::size_t exhaustive_max_n = 5;
    std::vector<std::size_t> permutation_ns{6, 7, 8};
    std::size_t permutations = 50;
    std::size_t random_count = 500;
    std::size_t random_max_n = 64;
    std::size_t random_max_degree = 8;
    std::uint64_t seed = 1;
};

// "default", "small", or a comma list of key=value overrides applied to the
// default (keys: exhaustive, perm, perm_ns (colon separated), random, max_n,
// max_degree, seed).
CorpusSpec parse_corpus_spec(const std::string &text);

struct CorpusGraph {
    PortGraph graph;
    std::string label;
};
std::vector<CorpusGraph> build_corpus(const CorpusSpec &spec);

enum class VerifyTarget { Dldfs, Lemma1, Rpath, Successor, Budget, SimConst, SimOneBit, Chain, Parity, Slope };

VerifyTarget parse_verify_target(const std::string &name);
std::string target_name(VerifyTarget t);
std::vector<std::string> verify_target_names();

struct VerifyOptions {
    std::uint64_t seed = 1;
    unsigned threads = 0;              // 0: hardware concurrency
    bool inject_fault = false;         // rpath and simonebit negative controls
    std::size_t rpath_sequences = 10'000;
    std::size_t rpath_graphs = 40;
    std::size_t sim_const_max_n = 12;
    std::uint64_t sim_const_steps = 20;
    std::size_t onebit_max_n = 32;
    std::size_t chain_max_n = 6;
    std::uint64_t chain_bouncer_steps = 3;
    std::uint64_t chain_step_limit = 100'000'000;
    std::size_t parity_graphs = 100;
    double slope_limit = 5.0;
};

struct VerifyReport {
    std::string target;
    std::size_t cases = 0;
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    double seconds = 0;
    bool ok() const noexcept { return violations.empty(); }
};

VerifyReport verify(VerifyTarget target, const std::vector<CorpusGraph> &corpus, const VerifyOptions &options);
void print_report(std::ostream &out, const VerifyReport &report, std::size_t max_violations = 10);

enum class BenchTarget { Dldfs, Parity, SimConst, SimOneBit, Chain };
BenchTarget parse_bench_target(const std::string &name);

struct BenchRow {
    std::string family;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t moves = 0;
    std::size_t mem_bits = 0;
    unsigned storage_bits = 0;
    double ms = 0;
    bool truncated = false;
    std::uint64_t steps = 0;  // simulated steps (simulators only)
    std::uint64_t per_step_min = 0, per_step_max = 0;  // simulator moves per simulated step
};

struct BenchOptions {
    std::vector<std::string> families{"path", "cycle", "random-connected"};
    std::vector<std::size_t> ns{8, 16, 32, 64, 128, 256};
    std::uint64_t seed = 1;
    std::string machine = "rotor-walker";  // simconst and chain
    unsigned c = 4;                        // simonebit inner memory
    std::uint64_t sim_steps = 5;
    std::uint64_t step_limit = 100'000'000;
};

std::vector<BenchRow> bench(BenchTarget target, const BenchOptions &options);
void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows);

// Least-squares slope of log(moves) against log(n) over the rows of one
// family. Needs at least two distinct n.
double loglog_slope(const std::vector<BenchRow> &rows);

} // namespace agentsim
