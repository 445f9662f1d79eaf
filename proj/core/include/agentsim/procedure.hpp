#pragma once

#include "agentsim/bits.hpp"
#include "agentsim/runtime.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace agentsim {

// Procedure ids shared by every frame-stack program. Encoded in 6 bits.
enum class Proc : std::uint8_t {
    None = 0,
    FindFirst,
    MarkPred,
    RpInit,
    RpMoveToTop,
    RpMoveOneHop,
    RpMoveTarget,
    RpModifyMove,
    RpDelete,
    RpCopy,
    RpModifyNeighbor,
    Dldfs,
    // program roots and program-specific procedures
    DldfsRoot,
    ParityRoot,
    RpDriver,
    SimRoot,
    SimLoadTape2,
    SimSweep,
    SimGoHead,
    SimTmStep,
    SimMoveHead,
    SimStoreTape2,
    SimClearTape,
    SimMovement,
    ScriptRoot,
    Count
};
inline constexpr unsigned kProcBits = 6;
inline constexpr unsigned kPcBits = 6;
static_assert(static_cast<unsigned>(Proc::Count) <= (1u << kProcBits));

// Storage offsets a program's procedures work against.
struct Layout {
    static constexpr unsigned kMaxRpath = 16;
    std::array<std::uint16_t, kMaxRpath> rp{};  // first bit of each R-path group
    std::uint16_t dfs = 0;                      // color (2 bits) then traversal (1 bit)
    std::uint8_t dfs_x = 0;                     // R-path tracking the DFS head
    std::uint8_t dfs_aux = 0;                   // auxiliary tracker for predecessor search
    std::uint16_t mark = 0;
    std::uint16_t past = 0;
    std::uint16_t cursor = 0;
    std::uint16_t out = 0;
    std::uint16_t tape = 0;                     // 5 tapes x k cells x 2 bits
    std::uint16_t tape_k = 1;
    std::uint16_t bA = 0;                       // simulated agent's storage
    std::uint16_t bA_bits = 0;
};

// R-path field offsets inside a group.
namespace rpf {
inline constexpr unsigned kTarget = 0;
inline constexpr unsigned kInPath = 1;
inline constexpr unsigned kDirection = 2;  // 0: back < fwd, 1: back > fwd
inline constexpr unsigned kColor = 3;      // 2 bits
inline constexpr unsigned kBits = 5;
enum Color : unsigned { White = 0, Red = 1, Blue = 2, Yellow = 3 };
} // namespace rpf

namespace dfsc {
enum Color : unsigned { White = 0, Grey = 1, Black = 2, Green = 3 };
}

enum class Order : std::uint8_t { HeadAscend = 0, MiddleAscend = 1, MiddleDescend = 2, TailDescend = 3 };

enum class PredKind : std::uint8_t {
    Any = 0,
    RpInPath,
    RpInPathYellow,
    RpYellow,
    RpRed,
    RpBlue,
    RpTarget,
    DfsColor,        // arg: color
    DfsGreyOpen,     // (grey and traversal clear) or green
    DfsGreyFlagged,  // grey and traversal set
    SimMark,
    SimPast,
    SimCursor,
};

enum class InstrKind : std::uint8_t {
    RpYellow = 0,     // color <- yellow
    RpNewTarget,      // target <- 1, color <- white
    RpDirGreater,     // direction <- back > fwd
    RpDirLess,        // direction <- back < fwd
    RpWhite,          // color <- white
    RpInPathSet,
    RpInPathClear,
    DfsSetColor,      // arg: color
    SimCursorSet,
    SimCursorClear,
    SimLeave,         // mark <- 0, past <- 1
    SimPastClear,
};

// Predicates and instructions are packed as kind (5 bits) | arg << 5.
constexpr std::uint32_t pred(PredKind k, unsigned arg = 0) { return static_cast<std::uint32_t>(k) | (arg << 5); }
constexpr std::uint32_t instr(InstrKind k, unsigned arg = 0) { return static_cast<std::uint32_t>(k) | (arg << 5); }

struct Frame {
    std::uint8_t proc = 0;
    std::uint8_t pc = 0;
    std::uint32_t regs = 0;

    std::uint32_t reg(unsigned off, unsigned width) const { return (regs >> off) & ((1u << width) - 1); }
    void set_reg(unsigned off, unsigned width, std::uint32_t v)
    {
        const std::uint32_t m = ((1u << width) - 1) << off;
        regs = (regs & ~m) | ((v << off) & m);
    }
    bool flag(unsigned off) const { return (regs >> off) & 1u; }
    void set_flag(unsigned off, bool v) { set_reg(off, 1, v ? 1u : 0u); }
};

struct Effect {
    enum class Kind : std::uint8_t { Continue, Call, Return, Move, Halt, Fault };
    Kind kind = Kind::Continue;
    bool flag = false;
    Port port = 0;
    Frame callee;
    const char *message = nullptr;

    static Effect next() { return {}; }
    static Effect call(Proc p, std::uint32_t regs = 0)
    {
        Effect e;
        e.kind = Kind::Call;
        e.callee = {static_cast<std::uint8_t>(p), 0, regs};
        return e;
    }
    static Effect ret(bool f = true)
    {
        Effect e;
        e.kind = Kind::Return;
        e.flag = f;
        return e;
    }
    static Effect move(Port p)
    {
        Effect e;
        e.kind = Kind::Move;
        e.port = p;
        return e;
    }
    static Effect halt()
    {
        Effect e;
        e.kind = Kind::Halt;
        return e;
    }
    static Effect fault(const char *msg)
    {
        Effect e;
        e.kind = Kind::Fault;
        e.message = msg;
        return e;
    }
};

class ProcedureProgram;

// What a procedure step sees: the current node's record, its degree, π_in,
// the last callee's return flag and the program's global registers.
struct Ctx {
    StorageView st;
    Port degree;
    Port pin;
    bool ret;
    const Layout &L;
    const ProcedureProgram &prog;
    BitString &mem;
    unsigned globals;
    EventSink *events;

    std::uint64_t g(unsigned off, unsigned width) const { return mem.read(globals + off, width); }
    void set_g(unsigned off, unsigned width, std::uint64_t v) { mem.write(globals + off, width, v); }
    bool gbit(unsigned off) const { return mem.get(globals + off); }
    void set_gbit(unsigned off, bool v) { mem.set(globals + off, v); }
    void emit(std::uint32_t kind, std::uint64_t value = 0) const
    {
        if (events)
            events->emit({kind, value});
    }

    // R-path fields at the current node.
    bool rp_target(unsigned ns) const { return st.bit(L.rp[ns] + rpf::kTarget); }
    bool rp_in_path(unsigned ns) const { return st.bit(L.rp[ns] + rpf::kInPath); }
    bool rp_dir(unsigned ns) const { return st.bit(L.rp[ns] + rpf::kDirection); }
    unsigned rp_color(unsigned ns) const { return static_cast<unsigned>(st.get(L.rp[ns] + rpf::kColor, 2)); }
    void set_rp_target(unsigned ns, bool v) { st.set_bit(L.rp[ns] + rpf::kTarget, v); }
    void set_rp_in_path(unsigned ns, bool v) { st.set_bit(L.rp[ns] + rpf::kInPath, v); }
    void set_rp_color(unsigned ns, unsigned c) { st.set(L.rp[ns] + rpf::kColor, 2, c); }

    unsigned dfs_color() const { return static_cast<unsigned>(st.get(L.dfs, 2)); }
    void set_dfs_color(unsigned c) { st.set(L.dfs, 2, c); }
    bool dfs_trav() const { return st.bit(L.dfs + 2); }
    void set_dfs_trav(bool v) { st.set_bit(L.dfs + 2, v); }
};

using StepFn = Effect (*)(Ctx &, Frame &);

struct ProcTable {
    std::array<StepFn, 1u << kProcBits> fns{};
    void set(Proc p, StepFn f) { fns[static_cast<unsigned>(p)] = f; }
};

void add_primitive_procs(ProcTable &t);
void add_rpath_procs(ProcTable &t);
void add_dfs_procs(ProcTable &t);

struct EngineConfig {
    unsigned reg_bits = 16;
    unsigned max_depth = 8;
    unsigned global_bits = 0;
    std::uint64_t local_step_cap = 1u << 22;
};

// An agent program written as nested procedures. The memory snapshot is
// [depth][return flag][globals][frame 0]...[frame max_depth-1]; all-zero
// memory starts the root procedure.
class ProcedureProgram : public AgentProgram {
public:
    ProcedureProgram(std::string name, StorageSchema schema, Layout layout, ProcTable table, Frame root,
                     EngineConfig config);

    std::string name() const override { return name_; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return width_; }
    Action activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const override;

    const Layout &layout() const noexcept { return layout_; }
    const EngineConfig &config() const noexcept { return config_; }
    unsigned globals_offset() const noexcept { return depth_bits_ + 1; }

    // Decoded call stack of a snapshot, bottom first.
    std::vector<Frame> frames(const BitString &memory) const;

private:
    std::string name_;
    StorageSchema schema_;
    Layout layout_;
    ProcTable table_;
    Frame root_;
    EngineConfig config_;
    unsigned depth_bits_;
    unsigned frame_bits_;
    unsigned frames_offset_;
    unsigned width_;
};

// Appends the five R-path fields for namespace `prefix` and returns the
// offset of the group.
std::uint16_t add_rpath_fields(StorageSchema &schema, const std::string &prefix);
// Appends DFS color and traversal fields.
std::uint16_t add_dfs_fields(StorageSchema &schema, const std::string &prefix = "dfs");

bool eval_pred(std::uint32_t pred, const StorageView &st, const Layout &L);
void apply_instr(std::uint32_t instr, StorageView &st, const Layout &L);

// Register layouts of the shared procedures.
namespace regs {
// FindFirst
inline constexpr unsigned kFfOrder = 0, kFfPred = 2, kFfMatched = 11;
inline std::uint32_t find_first(Order o, std::uint32_t p) { return static_cast<std::uint32_t>(o) | (p << kFfPred); }
// R-path procedures: namespace in bits 0..3
inline constexpr unsigned kNs = 0, kNs2 = 4;
inline std::uint32_t ns(unsigned a) { return a; }
inline std::uint32_t ns2(unsigned a, unsigned b) { return a | (b << kNs2); }
// ModifyNeighbor: namespace, direction (0 successor, 1 predecessor), result
inline constexpr unsigned kMnDir = 4, kMnResult = 5;
inline std::uint32_t modify_neighbor(unsigned y, bool predecessor) { return y | (predecessor ? 1u << kMnDir : 0u); }
// Dldfs
enum Hook : unsigned { HookNone = 0, HookParity = 1, HookSucc = 2, HookPred = 3 };
inline constexpr unsigned kDfReset = 0, kDfHook = 1, kDfY = 3, kDfPending = 7, kDfDone = 8, kDfParity = 9,
                          kDfClear = 10;
// `clear` wipes tapes 2-5 of the distributed tape fields at every first visit.
inline std::uint32_t dldfs(bool reset, Hook h, unsigned y = 0, bool clear = false)
{
    return (reset ? 1u : 0u) | (static_cast<unsigned>(h) << kDfHook) | (y << kDfY) | (clear ? 1u << kDfClear : 0u);
}
} // namespace regs

// One entry of a scripted driver: call a procedure, step out through a port
// and straight back, or call only when the current node is not the target of
// an R-path namespace.
struct ScriptOp {
    enum class Kind : std::uint8_t { Call, Bounce, CallUnlessTarget };
    Kind kind = Kind::Call;
    Frame frame;
    std::uint32_t port = 0;  // Bounce: taken modulo the degree
    unsigned ns = 0;         // CallUnlessTarget

    static ScriptOp call(Proc p, std::uint32_t r = 0) { return {Kind::Call, {static_cast<std::uint8_t>(p), 0, r}, 0, 0}; }
    static ScriptOp bounce(std::uint32_t port) { return {Kind::Bounce, {}, port, 0}; }
    static ScriptOp call_unless_target(unsigned ns, Proc p, std::uint32_t r = 0)
    {
        return {Kind::CallUnlessTarget, {static_cast<std::uint8_t>(p), 0, r}, 0, ns};
    }
};

// Test driver: runs a fixed list of operations, emitting events::kRpathOp
// with the operation index after each, then halts. Its memory grows with the
// script length, so it is not a constant-memory program.
class ScriptProgram : public ProcedureProgram {
public:
    ScriptProgram(std::string name, StorageSchema schema, Layout layout, std::vector<ScriptOp> ops,
                  unsigned max_depth = 10);
    const std::vector<ScriptOp> &ops() const noexcept { return ops_; }
    unsigned index_bits() const noexcept { return index_bits_; }

private:
    std::vector<ScriptOp> ops_;
    unsigned index_bits_;
};

// Procedure table with every shared procedure registered.
ProcTable standard_procs();

} // namespace agentsim
