#pragma once

#include "agentsim/bits.hpp"
#include "agentsim/graph.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace agentsim {

// π_in before the first move.
inline constexpr Port kInitialPort = -1;

// Out-of-band notifications a program may emit for checkers; never fed back
// into the program.
struct Event {
    std::uint32_t kind = 0;
    std::uint64_t value = 0;
};
// Collected events. A listener, when set, runs synchronously at the moment of
// emission, while the storage array still reflects the mid-activation state.
struct EventSink : std::vector<Event> {
    std::function<void(const Event &)> listener;

    void emit(const Event &e)
    {
        push_back(e);
        if (listener)
            listener(e);
    }
};

namespace events {
inline constexpr std::uint32_t kFirstVisit = 1;   // DFS colored the current node grey
inline constexpr std::uint32_t kSimBoundary = 2;  // a simulated agent step completed
inline constexpr std::uint32_t kTmStep = 3;       // one simulated TM transition applied
inline constexpr std::uint32_t kBranching = 4;    // R-path branching node colored; value = color
inline constexpr std::uint32_t kRpathOp = 5;      // a driver-level R-path operation finished
inline constexpr std::uint32_t kOneBitBoundary = 6;  // the one-bit simulator starts a simulated step
} // namespace events

struct Action {
    bool halt = false;
    Port port = 0;

    static Action move(Port p) { return {false, p}; }
    static Action stop() { return {true, 0}; }
};

// A deterministic activation function plus its declared budgets. Programs
// never see node ids.
class AgentProgram {
public:
    virtual ~AgentProgram() = default;

    virtual std::string name() const = 0;
    virtual const StorageSchema &schema() const = 0;
    // Upper bound on the serialized memory width in bits.
    virtual unsigned memory_width() const = 0;

    // `memory` holds the snapshot left by the previous activation (or
    // memory_width() zero bits at the start) and is replaced in place. The
    // program may resize it; the runtime enforces the declared bound.
    virtual Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const = 0;
};

class RunError : public std::runtime_error {
public:
    enum class Kind { BadStart, PortOutOfRange, MemoryBudget, ProgramFault };
    RunError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Thrown by programs for violated preconditions inside their own logic.
class AgentFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FieldWrite {
    std::size_t field = 0;
    std::uint64_t value = 0;
};

struct StepRecord {
    std::uint64_t step = 0;
    NodeId node = 0;
    Port pin = kInitialPort;
    bool halted = false;
    Port pout = 0;
    std::vector<FieldWrite> writes;
    BitString memory;
    std::vector<Event> events;
};

struct TraceSummary {
    std::uint64_t activations = 0;
    std::uint64_t moves = 0;
    std::size_t max_memory_bits = 0;
    unsigned storage_bits = 0;
    bool halted = false;
    bool truncated = false;
    NodeId final_node = 0;
    Port final_pin = kInitialPort;
};

struct ExecutionTrace {
    std::vector<StepRecord> steps;  // empty unless recording was requested
    TraceSummary summary;
    StorageArray storage;           // final whiteboards
    BitString memory;               // final memory snapshot
};

// Single agent executing on one graph. step() performs one activation and the
// move it requests.
class Runner {
public:
    Runner(const AgentProgram &program, const PortGraph &graph, NodeId start);

    // Returns false once the agent has halted.
    bool step(EventSink *events = nullptr, StepRecord *record = nullptr);

    const AgentProgram &program() const noexcept { return *program_; }
    const PortGraph &graph() const noexcept { return *graph_; }
    NodeId node() const noexcept { return node_; }
    Port pin() const noexcept { return pin_; }
    bool halted() const noexcept { return halted_; }
    std::uint64_t activations() const noexcept { return activations_; }
    std::uint64_t moves() const noexcept { return moves_; }
    std::size_t max_memory_bits() const noexcept { return max_memory_; }
    const BitString &memory() const noexcept { return memory_; }
    StorageArray &storage() noexcept { return storage_; }
    const StorageArray &storage() const noexcept { return storage_; }

    TraceSummary summary() const;

private:
    const AgentProgram *program_;
    const PortGraph *graph_;
    StorageArray storage_;
    BitString memory_;
    NodeId node_;
    Port pin_ = kInitialPort;
    bool halted_ = false;
    std::uint64_t activations_ = 0;
    std::uint64_t moves_ = 0;
    std::size_t max_memory_ = 0;
    std::vector<std::uint64_t> before_;
};

struct RunOptions {
    std::uint64_t step_limit = 100'000'000;
    bool record_steps = false;
    bool keep_events = false;
    // Called after every activation; the record is only filled in when
    // record_steps is set, the events when keep_events is set.
    std::function<void(const Runner &, const StepRecord &)> observer;
};

// Runs until halt or until step_limit activations (then flagged truncated).
ExecutionTrace run(const AgentProgram &program, const PortGraph &graph, NodeId start, const RunOptions &options = {});

// Line-oriented trace file.
void write_trace(std::ostream &out, const ExecutionTrace &trace, const StorageSchema &schema);

struct BudgetRow {
    std::size_t n = 0;
    std::size_t memory_bits = 0;
    unsigned storage_bits = 0;
    std::uint64_t moves = 0;
    bool halted = false;
};

struct BudgetReport {
    std::vector<BudgetRow> rows;
    bool constant = false;
};

// Runs the program from node 0 of every graph and compares the observed
// widths. Requires at least two distinct node counts.
BudgetReport audit_budget(const AgentProgram &program, std::span<const PortGraph> graphs,
                          std::uint64_t step_limit = 100'000'000);

} // namespace agentsim
