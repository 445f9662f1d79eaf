#pragma once

#include "agentsim/procedure.hpp"
#include "agentsim/runtime.hpp"
#include "agentsim/turing.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace agentsim {

// The O(n)-bit agent a machine describes: its memory is tape 1 (two bits per
// cell), its storage the field "bA".
class TmAgentProgram : public AgentProgram {
public:
    TmAgentProgram(TuringMachine tm, unsigned storage_bits, std::size_t cells);

    std::string name() const override { return "tm-agent"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return static_cast<unsigned>(2 * cells_); }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

    const TuringMachine &machine() const noexcept { return tm_; }
    unsigned storage_bits() const noexcept { return storage_bits_; }
    std::size_t cells() const noexcept { return cells_; }

    std::vector<std::uint8_t> tape1(const BitString &memory) const;

private:
    TuringMachine tm_;
    unsigned storage_bits_;
    std::size_t cells_;
    StorageSchema schema_;
};

// R-path namespaces of the constant-memory simulator.
namespace simns {
inline constexpr unsigned kX = 0, kAux = 1, kLoc = 2, kT1 = 3;
inline constexpr unsigned tape(unsigned j) { return kT1 + j; }  // j = 0..4
} // namespace simns

// Constant-memory simulator of a TM agent. Tape cell i lives at the node
// with Lex-DFS preorder index i / k (from the start node), slot i % k.
class SimConstProgram : public ProcedureProgram {
public:
    SimConstProgram(TuringMachine tm, unsigned storage_bits, unsigned k = 1);

    const TuringMachine &machine() const noexcept { return tm_; }
    unsigned storage_bits() const noexcept { return storage_bits_; }
    unsigned cells_per_node() const noexcept { return k_; }

    // Global register layout.
    struct Globals {
        unsigned phase, state, state_bits, reads, j, flags, sub, sub_bits, buf, idx, idx_bits, total;
    };
    const Globals &globals() const noexcept { return g_; }

    // Head slot of tape j (0-based) in a live or saved snapshot.
    unsigned head_slot(const BitString &memory, unsigned j) const;
    std::uint8_t cell(const StorageArray &storage, NodeId v, unsigned j, unsigned slot) const;

private:
    TuringMachine tm_;
    unsigned storage_bits_;
    unsigned k_;
    Globals g_;
};

struct SimOptions {
    std::uint64_t max_sim_steps = 20;        // simulated agent steps
    std::uint64_t step_limit = 100'000'000;  // simulator activations
    bool check = true;                       // lock-step checks
};

struct SimRun {
    std::uint64_t simulated_steps = 0;
    bool halted = false;
    bool truncated = false;                  // hit step_limit
    std::vector<NodeId> locations;           // simulated location after each step, start first
    std::vector<std::uint64_t> storages;     // final b^A per node
    BitString memory;                        // final simulated memory (tape 1 or program memory)
    TraceSummary summary;                    // of the simulator itself
    std::vector<std::uint64_t> step_moves;   // simulator moves per simulated step
    std::uint64_t tm_steps = 0;
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

// Direct execution of a program for up to `max_sim_steps` activations.
SimRun run_direct(const AgentProgram &program, const PortGraph &graph, NodeId start, std::uint64_t max_sim_steps);

// Sim_const. With checking, runs the direct TM agent and a reference
// machine in lock step: every TM step compares the distributed tapes and
// heads, every simulated step the location, tape 1, b^A storages, π_in and
// the simulator's own bookkeeping fields.
SimRun sim_const(const TuringMachine &tm, unsigned storage_bits, const PortGraph &graph, NodeId start,
                 const SimOptions &options = {}, unsigned k = 1);

// Sim_1: a one-bit agent simulating `inner`, whose memory is c bits. Each node
// holds st (inner's storage, at offset 0), mem (c bits) and trans.
class OneBitProgram : public AgentProgram {
public:
    explicit OneBitProgram(std::shared_ptr<const AgentProgram> inner);

    std::string name() const override { return "onebit(" + inner_->name() + ")"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return 1; }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

    const AgentProgram &inner() const noexcept { return *inner_; }
    unsigned c() const noexcept { return c_; }
    unsigned trans_bits() const noexcept { return trans_bits_; }
    int trans(const StorageArray &storage, NodeId v) const;
    void set_trans(StorageArray &storage, NodeId v, int t) const;
    BitString mem(const StorageArray &storage, NodeId v) const;
    // st image of one node, in inner's layout.
    std::vector<std::uint64_t> st(const StorageArray &storage, NodeId v) const;

private:
    int read_trans(const StorageView &s) const;
    void write_trans(StorageView &s, int t) const;

    std::shared_ptr<const AgentProgram> inner_;
    unsigned c_;
    unsigned st_bits_;
    unsigned mem_off_;
    unsigned trans_off_;
    unsigned trans_bits_;
    StorageSchema schema_;
};

struct OneBitOptions : SimOptions {
    // Corrupts one trans field right after this simulated-step boundary.
    std::optional<std::uint64_t> corrupt_trans_after;
};

// Sim_1 with the three boundary invariants checked against a lock-step
// direct run of `inner`.
SimRun sim_onebit(std::shared_ptr<const AgentProgram> inner, const PortGraph &graph, NodeId start,
                  const OneBitOptions &options = {});

// Sim_1 over Sim_const. Compares against the direct TM agent at every
// simulated agent step; `options.max_sim_steps` counts those steps.
SimRun sim_chain(const TuringMachine &tm, unsigned storage_bits, const PortGraph &graph, NodeId start,
                 const SimOptions &options = {});

// Native constant-memory test programs.
// Walks like the rotor machine; memory counts activations modulo 2^c and it
// halts when the count wraps to zero.
class NativeRotorProgram : public AgentProgram {
public:
    explicit NativeRotorProgram(unsigned c = 4);
    std::string name() const override { return "native-rotor"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return c_; }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

private:
    unsigned c_;
    StorageSchema schema_;
};

// Mixes memory, a two-bit visit counter and the local view into the next
// port; halts on the third visit to any node.
class MixWalkerProgram : public AgentProgram {
public:
    explicit MixWalkerProgram(unsigned c);
    std::string name() const override { return "mix-walker"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return c_; }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

private:
    unsigned c_;
    StorageSchema schema_;
};

} // namespace agentsim
