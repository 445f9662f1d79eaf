#include "agentsim/simulation.hpp"

#include "agentsim/lexdfs.hpp"
#include "agentsim/rpath.hpp"

#include <algorithm>

namespace agentsim {

// ---- direct TM agent ----

TmAgentProgram::TmAgentProgram(TuringMachine tm, unsigned storage_bits, std::size_t cells)
    : tm_(std::move(tm)), storage_bits_(storage_bits), cells_(cells)
{
    tm_.validate();
    if (cells_ == 0)
        throw std::invalid_argument("TM agent needs at least one tape cell");
    if (storage_bits_ > 64)
        throw std::invalid_argument("TM agent storage wider than 64 bits");
    if (storage_bits_)
        schema_.add("bA", storage_bits_);
}

std::vector<std::uint8_t> TmAgentProgram::tape1(const BitString &memory) const
{
    std::vector<std::uint8_t> t(cells_, Blank);
    for (std::size_t i = 0; i < cells_ && 2 * i + 1 < memory.size(); ++i)
        t[i] = static_cast<std::uint8_t>(memory.read(2 * i, 2));
    return t;
}

Action TmAgentProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *) const
{
    if (memory.size() != 2 * cells_)
        memory.resize(2 * cells_);
    const std::uint64_t st = storage_bits_ ? storage.get(0, storage_bits_) : 0;
    ActivationResult r;
    try {
        r = run_activation(tm_, tape1(memory), st, storage_bits_, degree, pin, cells_);
    } catch (const TmError &e) {
        throw AgentFault(e.what());
    }
    for (std::size_t i = 0; i < cells_; ++i)
        memory.write(2 * i, 2, r.tape1[i]);
    if (storage_bits_)
        storage.set(0, storage_bits_, r.storage);
    return r.out ? Action::move(*r.out) : Action::stop();
}

// ---- Sim_const procedures ----

namespace {

using namespace simns;

enum Phase : unsigned {
    kBoot = 0,
    kBootTapes,
    kStep,
    kAtCur,
    kT2Load,
    kT2Write,
    kT2Moved,
    kT2Done,
    kSweep,
    kSweepPort,
    kSweepOut,
    kAtNeighbor,
    kT3Append,
    kT3Moved,
    kT3Go,
    kT3Write,
    kT4Append,
    kT4Moved,
    kT4Go,
    kT4Write,
    kReturn,
    kBackFind,
    kBackMove,
    kCursorFind,
    kCursorClear,
    kNextPort,
    kNextCheck,
    kSweepEnd,
    kRewind3,
    kRewind4,
    kTmStart,
    kTmCheck,
    kRead,
    kReadAt,
    kReadNext,
    kTrans,
    kWrite,
    kWriteAt,
    kWriteNext,
    kMove,
    kMoved,
    kTmEmit,
    kTmDone,
    kRewind,
    kAfterRewind,
    kT2Read,
    kT2ReadAt,
    kT2ReadMoved,
    kT2ReadDone,
    kStore,
    kStoreAt,
    kDecode,
    kOutFirst,
    kOutMark,
    kOutTop,
    kOutAdv,
    kOutPeek,
    kOutRead,
    kOutDecide,
    kOutCFind,
    kOutCClear,
    kOutNext,
    kOutNextChk,
    kOutFinal,
    kOutFFind,
    kOutFClear,
    kOutMove,
    kOutLeave,
    kOutLeave2,
    kClean,
    kClean2,
    kClean3,
    kClean4,
    kBoundary,
    kHaltClear,
    kHalt2,
    kHalt3,
    kHalt4,
    kPhaseCount
};
constexpr unsigned kPhaseBits = 7;
static_assert(kPhaseCount <= (1u << kPhaseBits));

enum Flag : unsigned { kStarted = 0, kT3Started, kT4Started, kT4Done, kFoundNow, kPeekOne, kFlagCount };

// SimMoveHead registers: tape (3 bits), left (1 bit).
constexpr unsigned kMhTape = 0, kMhLeft = 3;
std::uint32_t move_head(unsigned j, bool left) { return j | (left ? 1u << kMhLeft : 0u); }

const SimConstProgram &sim_of(const Ctx &c) { return static_cast<const SimConstProgram &>(c.prog); }

unsigned cell_offset(const Layout &L, unsigned j, unsigned slot) { return L.tape + (j * L.tape_k + slot) * 2; }

struct Regs {
    Ctx &c;
    const SimConstProgram::Globals &o;

    unsigned phase() const { return static_cast<unsigned>(c.g(o.phase, kPhaseBits)); }
    void go(unsigned p) { c.set_g(o.phase, kPhaseBits, p); }
    bool flag(Flag f) const { return c.gbit(o.flags + f); }
    void set_flag(Flag f, bool v) { c.set_gbit(o.flags + f, v); }
    unsigned j() const { return static_cast<unsigned>(c.g(o.j, 3)); }
    void set_j(unsigned v) { c.set_g(o.j, 3, v); }
    std::uint32_t state() const { return static_cast<std::uint32_t>(c.g(o.state, o.state_bits)); }
    void set_state(std::uint32_t s) { c.set_g(o.state, o.state_bits, s); }
    unsigned reads() const { return static_cast<unsigned>(c.g(o.reads, 5)); }
    void set_reads(unsigned r) { c.set_g(o.reads, 5, r); }
    unsigned sub(unsigned t) const { return o.sub_bits ? static_cast<unsigned>(c.g(o.sub + t * o.sub_bits, o.sub_bits)) : 0; }
    void set_sub(unsigned t, unsigned v)
    {
        if (o.sub_bits)
            c.set_g(o.sub + t * o.sub_bits, o.sub_bits, v);
    }
    unsigned idx() const { return o.idx_bits ? static_cast<unsigned>(c.g(o.idx, o.idx_bits)) : 0; }
    void set_idx(unsigned v)
    {
        if (o.idx_bits)
            c.set_g(o.idx, o.idx_bits, v);
    }

    std::uint8_t cell(unsigned t) const { return static_cast<std::uint8_t>(c.st.get(cell_offset(c.L, t, sub(t)), 2)); }
    void set_cell(unsigned t, std::uint8_t s) { c.st.set(cell_offset(c.L, t, sub(t)), 2, s); }

    Effect call(unsigned next, Proc p, std::uint32_t r = 0)
    {
        go(next);
        return Effect::call(p, r);
    }
    Effect then(unsigned next)
    {
        go(next);
        return Effect::next();
    }
};

Effect ffind(Order o, PredKind k, unsigned arg = 0)
{
    return Effect::call(Proc::FindFirst, regs::find_first(o, pred(k, arg)));
}

Effect sim_move_head(Ctx &c, Frame &f)
{
    const auto &P = sim_of(c);
    Regs r{c, P.globals()};
    const unsigned j = f.reg(kMhTape, 3);
    const bool left = f.flag(kMhLeft);
    const unsigned k = P.cells_per_node();
    switch (f.pc) {
    case 0: {
        const unsigned s = r.sub(j);
        if (!left) {
            if (s + 1 < k) {
                r.set_sub(j, s + 1);
                return Effect::ret(true);
            }
            f.pc = 1;
            return Effect::call(Proc::RpModifyNeighbor, regs::modify_neighbor(tape(j), false));
        }
        if (s > 0) {
            r.set_sub(j, s - 1);
            return Effect::ret(true);
        }
        // Called at the start node: the head is already on cell 0.
        if (c.rp_target(tape(j)))
            return Effect::ret(true);
        f.pc = 2;
        return Effect::call(Proc::RpModifyNeighbor, regs::modify_neighbor(tape(j), true));
    }
    case 1:
        if (c.ret)
            r.set_sub(j, 0);
        return Effect::ret(c.ret);
    default:
        if (c.ret)
            r.set_sub(j, k - 1);
        return Effect::ret(c.ret);
    }
}

// The simulator's driver. Its position in the phase list is kept in the
// global registers, so it needs no frame pc.
Effect sim_root(Ctx &c, Frame &)
{
    const auto &P = sim_of(c);
    const auto &tm = P.machine();
    const unsigned wA = P.storage_bits();
    Regs r{c, P.globals()};
    const auto &L = c.L;

    auto transition = [&]() -> const Transition & { return *tm.at(r.state(), r.reads()); };

    switch (r.phase()) {
    case kBoot:
        r.set_j(0);
        return r.call(kBootTapes, Proc::RpInit, regs::ns(kLoc));
    case kBootTapes: {
        const unsigned j = r.j();
        if (j == kTapes)
            return r.then(kStep);
        r.set_j(j + 1);
        return r.call(kBootTapes, Proc::RpInit, regs::ns(tape(j)));
    }

    // Initialization: b^A to tape 2, degree to tape 3, pin to tape 4.
    case kStep:
        return r.call(kAtCur, Proc::RpMoveTarget, regs::ns(kLoc));
    case kAtCur:
        for (unsigned b = 0; b < wA; ++b)
            c.set_gbit(r.o.buf + b, c.st.bit(L.bA + b));
        c.st.set_bit(L.mark, true);
        if (wA == 0)
            return r.then(kSweep);
        r.set_idx(0);
        return r.call(kT2Load, Proc::RpMoveToTop, regs::ns(kLoc));
    case kT2Load:
        return r.call(kT2Write, Proc::RpMoveTarget, regs::ns(tape(1)));
    case kT2Write: {
        const unsigned i = r.idx();
        r.set_cell(1, c.gbit(r.o.buf + i) ? One : Zero);
        r.set_idx(i + 1);
        if (i + 1 < wA)
            return r.call(kT2Moved, Proc::SimMoveHead, move_head(1, false));
        return r.call(kT2Done, Proc::RpDelete, regs::ns(tape(1)));
    }
    case kT2Moved:
        if (!c.ret)
            return Effect::fault("storage image does not fit the distributed tape");
        return r.then(kT2Load);
    case kT2Done:
        r.set_sub(1, 0);
        return r.call(kSweep, Proc::RpMoveTarget, regs::ns(kLoc));

    // Neighbor sweep from v_cur: one 1 on tape 3 per port, and on tape 4
    // until the neighbor carrying `past` has been counted.
    case kSweep:
        if (c.degree == 0)
            return r.then(kSweepEnd);
        r.go(kSweepPort);
        return ffind(Order::HeadAscend, PredKind::Any);
    case kSweepPort:
        return r.call(kSweepOut, Proc::MarkPred, instr(InstrKind::SimCursorSet));
    case kSweepOut:
        return r.call(kAtNeighbor, Proc::RpModifyMove, regs::ns(kLoc));
    case kAtNeighbor:
        if (r.flag(kStarted) && !r.flag(kT4Done) && c.st.bit(L.past)) {
            c.st.set_bit(L.past, false);
            r.set_flag(kFoundNow, true);
        }
        return r.call(kT3Append, Proc::RpMoveToTop, regs::ns(kLoc));
    case kT3Append:
        if (r.flag(kT3Started))
            return r.call(kT3Moved, Proc::SimMoveHead, move_head(2, false));
        return r.then(kT3Go);
    case kT3Moved:
        if (!c.ret)
            return Effect::fault("degree does not fit the distributed tape");
        return r.then(kT3Go);
    case kT3Go:
        r.set_flag(kT3Started, true);
        return r.call(kT3Write, Proc::RpMoveTarget, regs::ns(tape(2)));
    case kT3Write:
        r.set_cell(2, One);
        return r.call(kT4Append, Proc::RpMoveToTop, regs::ns(tape(2)));
    case kT4Append:
        if (!r.flag(kStarted) || r.flag(kT4Done))
            return r.then(kReturn);
        if (r.flag(kT4Started))
            return r.call(kT4Moved, Proc::SimMoveHead, move_head(3, false));
        return r.then(kT4Go);
    case kT4Moved:
        if (!c.ret)
            return Effect::fault("incoming port does not fit the distributed tape");
        return r.then(kT4Go);
    case kT4Go:
        r.set_flag(kT4Started, true);
        return r.call(kT4Write, Proc::RpMoveTarget, regs::ns(tape(3)));
    case kT4Write:
        r.set_cell(3, One);
        if (r.flag(kFoundNow))
            r.set_flag(kT4Done, true);
        return r.call(kReturn, Proc::RpMoveToTop, regs::ns(tape(3)));
    case kReturn:
        return r.call(kBackFind, Proc::RpMoveTarget, regs::ns(kLoc));
    case kBackFind:
        r.go(kBackMove);
        return ffind(Order::HeadAscend, PredKind::SimMark);
    case kBackMove:
        if (!c.ret)
            return Effect::fault("lost the marked node during the sweep");
        return r.call(kCursorFind, Proc::RpModifyMove, regs::ns(kLoc));
    case kCursorFind:
        r.go(kCursorClear);
        return ffind(Order::HeadAscend, PredKind::SimCursor);
    case kCursorClear:
        if (!c.ret)
            return Effect::fault("lost the sweep cursor");
        return r.call(kNextPort, Proc::MarkPred, instr(InstrKind::SimCursorClear));
    case kNextPort:
        r.go(kNextCheck);
        return ffind(Order::MiddleAscend, PredKind::Any);
    case kNextCheck:
        return r.then(c.ret ? kSweepPort : kSweepEnd);
    case kSweepEnd:
        c.st.set_bit(L.mark, false);
        if (r.flag(kStarted) && !r.flag(kT4Done))
            return Effect::fault("no neighbor carries the past flag");
        return r.call(kRewind3, Proc::RpMoveToTop, regs::ns(kLoc));
    case kRewind3:
        r.set_sub(2, 0);
        return r.call(kRewind4, Proc::RpDelete, regs::ns(tape(2)));
    case kRewind4:
        r.set_sub(3, 0);
        return r.call(kTmStart, Proc::RpDelete, regs::ns(tape(3)));

    // Local simulation, at the start node between TM steps.
    case kTmStart:
        r.set_state(start_state(tm, r.flag(kStarted) ? 0 : kInitialPort));
        return r.then(kTmCheck);
    case kTmCheck:
        if (r.state() == tm.q1)
            return r.then(kTmDone);
        r.set_j(0);
        r.set_reads(0);
        return r.then(kRead);
    case kRead: {
        const unsigned j = r.j();
        if (j + 1 == kTapes)
            return r.then(kTrans);
        if (c.rp_target(tape(j))) {
            r.set_reads(r.reads() | (r.cell(j) == One ? 1u << j : 0u));
            r.set_j(j + 1);
            return Effect::next();
        }
        return r.call(kReadAt, Proc::RpMoveTarget, regs::ns(tape(j)));
    }
    case kReadAt: {
        const unsigned j = r.j();
        r.set_reads(r.reads() | (r.cell(j) == One ? 1u << j : 0u));
        return r.call(kReadNext, Proc::RpMoveToTop, regs::ns(tape(j)));
    }
    case kReadNext:
        r.set_j(r.j() + 1);
        return r.then(kRead);
    case kTrans: {
        const auto &t = tm.at(r.state(), r.reads());
        if (!t)
            return Effect::fault("missing transition");
        for (unsigned i = 2; i < 4; ++i)
            if (((t->write ^ r.reads()) >> i) & 1u)
                return Effect::fault("write to a read-only tape");
        r.set_j(0);
        return r.then(kWrite);
    }
    case kWrite: {
        const auto &t = transition();
        unsigned j = r.j();
        // Tapes 1 and 2 need a visit only when the symbol changes.
        while (j < kTapes &&
               (j == 2 || j == 3 || (j < 2 && ((t.write >> j) & 1u) == ((r.reads() >> j) & 1u))))
            ++j;
        r.set_j(j);
        if (j == kTapes) {
            r.set_j(0);
            return r.then(kMove);
        }
        if (c.rp_target(tape(j))) {
            const bool w = (t.write >> j) & 1u;
            if (w != (r.cell(j) == One))
                r.set_cell(j, w ? One : Zero);
            r.set_j(j + 1);
            return Effect::next();
        }
        return r.call(kWriteAt, Proc::RpMoveTarget, regs::ns(tape(j)));
    }
    case kWriteAt: {
        const unsigned j = r.j();
        const bool w = (transition().write >> j) & 1u;
        if (w != (r.cell(j) == One))
            r.set_cell(j, w ? One : Zero);
        return r.call(kWriteNext, Proc::RpMoveToTop, regs::ns(tape(j)));
    }
    case kWriteNext:
        r.set_j(r.j() + 1);
        return r.then(kWrite);
    case kMove: {
        const auto &t = transition();
        if (t.next == tm.q1) {
            r.set_state(tm.q1);
            return r.then(kTmEmit);
        }
        unsigned j = r.j();
        for (; j < kTapes; ++j) {
            const bool left = !((t.move >> j) & 1u);
            if (left && r.sub(j) == 0 && c.rp_target(tape(j)))
                continue;  // clamped at cell 0
            r.set_j(j);
            return r.call(kMoved, Proc::SimMoveHead, move_head(j, left));
        }
        r.set_state(t.next);
        return r.then(kTmEmit);
    }
    case kMoved:
        if (!c.ret)
            return Effect::fault("head ran off the distributed tape");
        r.set_j(r.j() + 1);
        return r.then(kMove);
    case kTmEmit:
        c.emit(events::kTmStep);
        return r.then(kTmCheck);

    // Rewind every head, read tape 2 back into b^A.
    case kTmDone:
        r.set_j(0);
        return r.then(kRewind);
    case kRewind: {
        const unsigned j = r.j();
        if (j == kTapes)
            return r.then(kAfterRewind);
        r.set_sub(j, 0);
        r.set_j(j + 1);
        return r.call(kRewind, Proc::RpDelete, regs::ns(tape(j)));
    }
    case kAfterRewind:
        if (wA == 0)
            return r.then(kDecode);
        r.set_idx(0);
        return r.then(kT2Read);
    case kT2Read:
        return r.call(kT2ReadAt, Proc::RpMoveTarget, regs::ns(tape(1)));
    case kT2ReadAt: {
        const unsigned i = r.idx();
        c.set_gbit(r.o.buf + i, r.cell(1) == One);
        r.set_idx(i + 1);
        if (i + 1 < wA)
            return r.call(kT2ReadMoved, Proc::SimMoveHead, move_head(1, false));
        return r.call(kT2ReadDone, Proc::RpDelete, regs::ns(tape(1)));
    }
    case kT2ReadMoved:
        if (!c.ret)
            return Effect::fault("storage image does not fit the distributed tape");
        return r.then(kT2Read);
    case kT2ReadDone:
        r.set_sub(1, 0);
        return r.then(kStore);
    case kStore:
        return r.call(kStoreAt, Proc::RpMoveTarget, regs::ns(kLoc));
    case kStoreAt:
        for (unsigned b = 0; b < wA; ++b)
            c.st.set_bit(L.bA + b, c.gbit(r.o.buf + b));
        return r.call(kDecode, Proc::RpMoveToTop, regs::ns(kLoc));

    // Agent movement: each further 1 on tape 5 advances the cursor one port.
    case kDecode:
        if (r.cell(4) != One)
            return r.then(kHaltClear);
        return r.call(kOutFirst, Proc::RpMoveTarget, regs::ns(kLoc));
    case kOutFirst:
        if (c.degree == 0)
            return Effect::fault("output port not below the degree");
        c.st.set_bit(L.mark, true);
        r.go(kOutMark);
        return ffind(Order::HeadAscend, PredKind::Any);
    case kOutMark:
        return r.call(kOutTop, Proc::MarkPred, instr(InstrKind::SimCursorSet));
    case kOutTop:
        return r.call(kOutAdv, Proc::RpMoveToTop, regs::ns(kLoc));
    case kOutAdv:
        return r.call(kOutPeek, Proc::SimMoveHead, move_head(4, false));
    case kOutPeek:
        if (!c.ret)
            return r.then(kOutFinal);
        return r.call(kOutRead, Proc::RpMoveTarget, regs::ns(tape(4)));
    case kOutRead:
        r.set_flag(kPeekOne, r.cell(4) == One);
        return r.call(kOutDecide, Proc::RpMoveToTop, regs::ns(tape(4)));
    case kOutDecide:
        if (!r.flag(kPeekOne))
            return r.then(kOutFinal);
        return r.call(kOutCFind, Proc::RpMoveTarget, regs::ns(kLoc));
    case kOutCFind:
        r.go(kOutCClear);
        return ffind(Order::HeadAscend, PredKind::SimCursor);
    case kOutCClear:
        if (!c.ret)
            return Effect::fault("lost the output cursor");
        return r.call(kOutNext, Proc::MarkPred, instr(InstrKind::SimCursorClear));
    case kOutNext:
        r.go(kOutNextChk);
        return ffind(Order::MiddleAscend, PredKind::Any);
    case kOutNextChk:
        if (!c.ret)
            return Effect::fault("output port not below the degree");
        return r.call(kOutTop, Proc::MarkPred, instr(InstrKind::SimCursorSet));
    case kOutFinal:
        return r.call(kOutFFind, Proc::RpMoveTarget, regs::ns(kLoc));
    case kOutFFind:
        r.go(kOutFClear);
        return ffind(Order::HeadAscend, PredKind::SimCursor);
    case kOutFClear:
        if (!c.ret)
            return Effect::fault("lost the output cursor");
        return r.call(kOutMove, Proc::MarkPred, instr(InstrKind::SimCursorClear));
    case kOutMove:
        return r.call(kOutLeave, Proc::RpModifyMove, regs::ns(kLoc));
    case kOutLeave:
        r.go(kOutLeave2);
        return ffind(Order::HeadAscend, PredKind::SimMark);
    case kOutLeave2:
        if (!c.ret)
            return Effect::fault("lost the departure node");
        return r.call(kClean, Proc::MarkPred, instr(InstrKind::SimLeave));
    case kClean:
        r.set_flag(kStarted, true);
        return r.call(kClean2, Proc::RpMoveToTop, regs::ns(kLoc));
    case kClean2:
        r.set_sub(4, 0);
        return r.call(kClean3, Proc::RpDelete, regs::ns(tape(4)));
    case kClean3:
        return r.call(kClean4, Proc::Dldfs, regs::dldfs(false, regs::HookNone, 0, true));
    case kClean4:
        return r.call(kBoundary, Proc::Dldfs, regs::dldfs(true, regs::HookNone));
    case kBoundary:
        for (Flag f : {kT3Started, kT4Started, kT4Done, kFoundNow, kPeekOne})
            r.set_flag(f, false);
        c.emit(events::kSimBoundary, 0);
        return r.then(kStep);

    case kHaltClear:
        return r.call(kHalt2, Proc::Dldfs, regs::dldfs(false, regs::HookNone, 0, true));
    case kHalt2:
        return r.call(kHalt3, Proc::Dldfs, regs::dldfs(true, regs::HookNone));
    case kHalt3:
        return r.call(kHalt4, Proc::RpMoveTarget, regs::ns(kLoc));
    default:
        c.emit(events::kSimBoundary, 1);
        return Effect::halt();
    }
}

struct SimSetup {
    StorageSchema schema;
    Layout layout;
};

SimSetup sim_setup(unsigned storage_bits, unsigned k)
{
    SimSetup s;
    auto &L = s.layout;
    L.dfs = add_dfs_fields(s.schema);
    L.dfs_x = kX;
    L.dfs_aux = kAux;
    L.rp[kX] = add_rpath_fields(s.schema, "dfs.X");
    L.rp[kAux] = add_rpath_fields(s.schema, "dfs.Xaux");
    L.rp[kLoc] = add_rpath_fields(s.schema, "loc");
    for (unsigned j = 0; j < kTapes; ++j)
        L.rp[tape(j)] = add_rpath_fields(s.schema, "head" + std::to_string(j + 1));
    L.tape = static_cast<std::uint16_t>(s.schema.total_bits());
    L.tape_k = static_cast<std::uint16_t>(k);
    for (unsigned j = 0; j < kTapes; ++j)
        for (unsigned slot = 0; slot < k; ++slot)
            s.schema.add("tape" + std::to_string(j + 1) + "." + std::to_string(slot), 2);
    L.past = static_cast<std::uint16_t>(s.schema.total_bits());
    s.schema.add("past", 1);
    L.mark = static_cast<std::uint16_t>(s.schema.total_bits());
    s.schema.add("mark", 1);
    L.cursor = static_cast<std::uint16_t>(s.schema.total_bits());
    s.schema.add("cursor", 1);
    L.bA = static_cast<std::uint16_t>(s.schema.total_bits());
    L.bA_bits = static_cast<std::uint16_t>(storage_bits);
    if (storage_bits)
        s.schema.add("bA", storage_bits);
    return s;
}

SimConstProgram::Globals sim_globals(const TuringMachine &tm, unsigned storage_bits, unsigned k)
{
    SimConstProgram::Globals g{};
    unsigned at = 0;
    g.phase = at;
    at += kPhaseBits;
    g.state = at;
    g.state_bits = bits_for(tm.states);
    at += g.state_bits;
    g.reads = at;
    at += 5;
    g.j = at;
    at += 3;
    g.flags = at;
    at += kFlagCount;
    g.sub = at;
    g.sub_bits = bits_for(k);
    at += kTapes * g.sub_bits;
    g.buf = at;
    at += storage_bits;
    g.idx = at;
    g.idx_bits = bits_for(storage_bits + 1);
    at += g.idx_bits;
    g.total = at;
    return g;
}

ProcTable sim_table()
{
    auto t = standard_procs();
    t.set(Proc::SimRoot, &sim_root);
    t.set(Proc::SimMoveHead, &sim_move_head);
    return t;
}

// Deepest chain: root, head move, ModifyNeighbor, DFS, Copy, Delete,
// ModifyMove, MoveToTop, FindFirst.
constexpr unsigned kSimDepth = 9;

const TuringMachine &checked(const TuringMachine &tm, unsigned storage_bits, unsigned k)
{
    tm.validate();
    if (k == 0 || k > 8)
        throw std::invalid_argument("cells per node must be in 1..8");
    if (storage_bits > 64)
        throw std::invalid_argument("simulated storage wider than 64 bits");
    return tm;
}

} // namespace

SimConstProgram::SimConstProgram(TuringMachine tm, unsigned storage_bits, unsigned k)
    : ProcedureProgram("sim-const", sim_setup(storage_bits, k).schema, sim_setup(storage_bits, k).layout,
                       sim_table(), Frame{static_cast<std::uint8_t>(Proc::SimRoot), 0, 0},
                       EngineConfig{12, kSimDepth, sim_globals(checked(tm, storage_bits, k), storage_bits, k).total,
                                    1u << 22}),
      tm_(std::move(tm)), storage_bits_(storage_bits), k_(k), g_(sim_globals(tm_, storage_bits, k))
{
}

unsigned SimConstProgram::head_slot(const BitString &memory, unsigned j) const
{
    if (!g_.sub_bits)
        return 0;
    return static_cast<unsigned>(memory.read(globals_offset() + g_.sub + j * g_.sub_bits, g_.sub_bits));
}

std::uint8_t SimConstProgram::cell(const StorageArray &storage, NodeId v, unsigned j, unsigned slot) const
{
    return static_cast<std::uint8_t>(storage.get(v, cell_offset(layout(), j, slot), 2));
}

// ---- runs and checks ----

namespace {

std::string at_step(std::uint64_t s) { return "simulated step " + std::to_string(s) + ": "; }

std::vector<std::uint64_t> field_values(const StorageArray &storage, std::size_t n, unsigned offset, unsigned width)
{
    std::vector<std::uint64_t> v(n, 0);
    if (width)
        for (NodeId u = 0; u < n; ++u)
            v[u] = storage.get(u, offset, width);
    return v;
}

std::optional<NodeId> unique_target(const StorageArray &storage, const Layout &L, unsigned ns, std::size_t n)
{
    std::optional<NodeId> t;
    for (NodeId v = 0; v < n; ++v)
        if (storage.get(v, L.rp[ns] + rpf::kTarget, 1)) {
            if (t)
                return std::nullopt;
            t = v;
        }
    return t;
}

// Everything Sim_const keeps in storage and memory, compared with the
// distributed-tape view of the direct agent at a simulated-step boundary.
class ConstChecker {
public:
    ConstChecker(const SimConstProgram &prog, const PortGraph &g, NodeId start)
        : prog_(prog), g_(g), start_(start), n_(g.node_count()), k_(prog.cells_per_node()),
          preorder_(oracle_lexdfs(g, start).preorder), index_(n_, 0)
    {
        for (std::size_t i = 0; i < preorder_.size(); ++i)
            index_[preorder_[i]] = static_cast<NodeId>(i);
    }

    std::size_t cells() const { return n_ * k_; }

    std::uint8_t cell(const StorageArray &s, unsigned j, std::size_t i) const
    {
        return prog_.cell(s, preorder_[i / k_], j, static_cast<unsigned>(i % k_));
    }

    std::vector<std::uint8_t> tape1(const StorageArray &s) const
    {
        std::vector<std::uint8_t> t(cells());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = cell(s, 0, i);
        return t;
    }

    BitString tape1_memory(const StorageArray &s) const
    {
        BitString m(2 * cells());
        const auto t = tape1(s);
        for (std::size_t i = 0; i < t.size(); ++i)
            m.write(2 * i, 2, t[i]);
        return m;
    }

    std::optional<NodeId> location(const StorageArray &s) const
    {
        return unique_target(s, prog_.layout(), simns::kLoc, n_);
    }

    // Distributed tapes and heads against the reference machine.
    void compare_tapes(const StorageArray &s, const BitString &memory, const Tapes &ref, const std::string &where,
                       std::vector<std::string> &out) const
    {
        for (unsigned j = 0; j < kTapes; ++j) {
            for (std::size_t i = 0; i < cells(); ++i)
                if (cell(s, j, i) != ref.cells[j][i]) {
                    out.push_back(where + "tape " + std::to_string(j + 1) + " cell " + std::to_string(i) +
                                  " differs from the reference machine");
                    break;
                }
            const auto t = unique_target(s, prog_.layout(), simns::tape(j), n_);
            const std::size_t head = t ? index_[*t] * k_ + prog_.head_slot(memory, j) : ~std::size_t{0};
            if (head != ref.head[j])
                out.push_back(where + "head " + std::to_string(j + 1) + " at " +
                              (t ? std::to_string(head) : std::string("no unique target")) + ", reference at " +
                              std::to_string(ref.head[j]));
        }
    }

    // Boundary state against the direct agent after its matching step.
    void compare_boundary(const StorageArray &s, const BitString &memory, const Runner &ref,
                          const TmAgentProgram &direct, bool halted, const std::string &where,
                          std::vector<std::string> &out) const
    {
        const auto &L = prog_.layout();
        if (halted != ref.halted())
            out.push_back(where + (halted ? "simulator halted, direct agent did not"
                                          : "direct agent halted, simulator did not"));
        const auto loc = location(s);
        if (!loc)
            out.push_back(where + "simulated location is not a unique R-path target");
        else if (!halted && *loc != ref.node())
            out.push_back(where + "simulated location " + std::to_string(*loc) + ", direct " +
                          std::to_string(ref.node()));
        if (field_values(s, n_, L.bA, L.bA_bits) != field_values(ref.storage(), n_, 0, L.bA_bits))
            out.push_back(where + "b^A storages differ");
        if (tape1(s) != direct.tape1(ref.memory()))
            out.push_back(where + "tape 1 differs from the direct agent's memory");

        std::size_t marks = 0, cursors = 0, dirty = 0;
        std::vector<NodeId> past;
        for (NodeId v = 0; v < n_; ++v) {
            marks += s.get(v, L.mark, 1);
            cursors += s.get(v, L.cursor, 1);
            if (s.get(v, L.past, 1))
                past.push_back(v);
            for (unsigned j = 1; j < kTapes; ++j)
                for (unsigned slot = 0; slot < k_; ++slot)
                    dirty += prog_.cell(s, v, j, slot) != Blank;
            dirty += s.get(v, L.dfs, 3) != 0;
        }
        if (marks || cursors)
            out.push_back(where + "mark or cursor left set");
        if (dirty)
            out.push_back(where + "tapes 2-5 or DFS fields not cleared");
        for (unsigned j = 0; j < kTapes; ++j)
            if (unique_target(s, L, simns::tape(j), n_) != start_ || prog_.head_slot(memory, j) != 0)
                out.push_back(where + "head " + std::to_string(j + 1) + " not rewound");
        if (!halted && loc && !ref.halted()) {
            if (past.size() != 1)
                out.push_back(where + std::to_string(past.size()) + " nodes carry past");
            else if (g_.port_to(*loc, past[0]) != std::optional<Port>(ref.pin()))
                out.push_back(where + "past does not encode the direct agent's incoming port");
            const auto rep = check_consistency(s, L, simns::kLoc, g_, start_, *loc);
            if (!rep.strong())
                out.push_back(where + "location R-path not strongly consistent");
        }
    }

private:
    const SimConstProgram &prog_;
    const PortGraph &g_;
    NodeId start_;
    std::size_t n_;
    unsigned k_;
    std::vector<NodeId> preorder_;
    std::vector<NodeId> index_;
};

void step_reference(Runner &ref, std::vector<std::string> &out, const std::string &where)
{
    try {
        ref.step();
    } catch (const RunError &e) {
        out.push_back(where + "direct agent failed: " + e.what());
    }
}

} // namespace

SimRun run_direct(const AgentProgram &program, const PortGraph &graph, NodeId start, std::uint64_t max_sim_steps)
{
    Runner r(program, graph, start);
    SimRun out;
    out.locations.push_back(start);
    try {
        while (!r.halted() && out.simulated_steps < max_sim_steps) {
            r.step();
            ++out.simulated_steps;
            out.locations.push_back(r.node());
        }
    } catch (const RunError &e) {
        out.violations.push_back(e.what());
    }
    out.halted = r.halted();
    if (out.halted)
        out.locations.pop_back();
    const unsigned w = std::min(64u, program.schema().total_bits());
    out.storages = field_values(r.storage(), graph.node_count(), 0, w);
    out.memory = r.memory();
    out.summary = r.summary();
    return out;
}

SimRun sim_const(const TuringMachine &tm, unsigned storage_bits, const PortGraph &graph, NodeId start,
                 const SimOptions &options, unsigned k)
{
    const SimConstProgram prog(tm, storage_bits, k);
    const ConstChecker chk(prog, graph, start);
    const TmAgentProgram direct(tm, storage_bits, chk.cells());
    Runner sim(prog, graph, start);
    Runner ref(direct, graph, start);

    SimRun out;
    out.locations.push_back(start);
    std::optional<Tapes> tapes;
    std::uint32_t state = 0;
    bool stop = false;
    std::uint64_t last_moves = 0;

    EventSink ev;
    ev.listener = [&](const Event &e) {
        const std::string where = at_step(out.simulated_steps);
        if (e.kind == events::kTmStep) {
            ++out.tm_steps;
            if (!options.check || out.violations.size() >= 10)
                return;
            if (!tapes) {
                const NodeId u = ref.node();
                tapes = initial_tapes(direct.tape1(ref.memory()),
                                      storage_bits ? ref.storage().get(u, 0, storage_bits) : 0, storage_bits,
                                      graph.degree(u), ref.pin(), chk.cells());
                state = start_state(tm, ref.pin());
            }
            try {
                tm_step(tm, *tapes, state);
            } catch (const TmError &err) {
                out.violations.push_back(where + "reference machine failed: " + err.what());
                return;
            }
            chk.compare_tapes(sim.storage(), sim.memory(), *tapes, where, out.violations);
            return;
        }
        if (e.kind != events::kSimBoundary)
            return;
        const bool halted = e.value != 0;
        ++out.simulated_steps;
        out.step_moves.push_back(sim.moves() - last_moves);
        last_moves = sim.moves();
        tapes.reset();
        const auto loc = chk.location(sim.storage());
        if (!halted)
            out.locations.push_back(loc.value_or(start));
        if (options.check && out.violations.size() < 10) {
            step_reference(ref, out.violations, where);
            chk.compare_boundary(sim.storage(), sim.memory(), ref, direct, halted, where, out.violations);
        }
        if (out.simulated_steps >= options.max_sim_steps)
            stop = true;
    };

    try {
        while (!stop && !sim.halted() && sim.activations() < options.step_limit) {
            sim.step(&ev);
            ev.clear();
        }
    } catch (const RunError &e) {
        out.violations.push_back(at_step(out.simulated_steps) + e.what());
    }
    out.halted = sim.halted();
    out.truncated = !stop && !out.halted && out.violations.empty();
    out.storages = field_values(sim.storage(), graph.node_count(), prog.layout().bA, storage_bits);
    out.memory = chk.tape1_memory(sim.storage());
    out.summary = sim.summary();
    return out;
}

// ---- Sim_1 ----

OneBitProgram::OneBitProgram(std::shared_ptr<const AgentProgram> inner) : inner_(std::move(inner))
{
    if (!inner_)
        throw std::invalid_argument("one-bit simulator needs a program");
    c_ = inner_->memory_width();
    if (c_ == 0)
        throw std::invalid_argument("one-bit simulator needs at least one memory bit");
    for (const auto &f : inner_->schema().fields())
        schema_.add("st." + f.name, f.width);
    st_bits_ = schema_.total_bits();
    mem_off_ = st_bits_;
    for (unsigned b = 0, i = 0; b < c_; b += 64, ++i)
        schema_.add("mem." + std::to_string(i), std::min(64u, c_ - b));
    trans_off_ = schema_.total_bits();
    trans_bits_ = bits_for(2 * std::uint64_t{c_} - 1);
    if (trans_bits_)
        schema_.add("trans", trans_bits_);
}

int OneBitProgram::read_trans(const StorageView &s) const
{
    if (!trans_bits_)
        return 0;
    const auto raw = static_cast<std::int64_t>(s.get(trans_off_, trans_bits_));
    const std::int64_t half = std::int64_t{1} << (trans_bits_ - 1);
    return static_cast<int>(raw >= half ? raw - 2 * half : raw);
}

void OneBitProgram::write_trans(StorageView &s, int t) const
{
    if (trans_bits_)
        s.set(trans_off_, trans_bits_, static_cast<std::uint64_t>(t) & ((std::uint64_t{1} << trans_bits_) - 1));
}

int OneBitProgram::trans(const StorageArray &storage, NodeId v) const
{
    auto s = const_cast<StorageArray &>(storage).at(v);
    return read_trans(s);
}

void OneBitProgram::set_trans(StorageArray &storage, NodeId v, int t) const
{
    auto s = storage.at(v);
    write_trans(s, t);
}

BitString OneBitProgram::mem(const StorageArray &storage, NodeId v) const
{
    BitString m(c_);
    for (unsigned b = 0; b < c_; b += 64) {
        const unsigned w = std::min(64u, c_ - b);
        m.write(b, w, storage.get(v, mem_off_ + b, w));
    }
    return m;
}

std::vector<std::uint64_t> OneBitProgram::st(const StorageArray &storage, NodeId v) const
{
    std::vector<std::uint64_t> out;
    for (unsigned b = 0; b < st_bits_; b += 64)
        out.push_back(storage.get(v, b, std::min(64u, st_bits_ - b)));
    return out;
}

// trans = c-1 (or the first activation): finish the transfer and run one
// activation of the simulated program. trans in [0, c-1): destination,
// store the carried bit. trans < 0: departure, fetch the next bit.
Action OneBitProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *events) const
{
    if (memory.size() != 1)
        memory.resize(1);
    const int last = static_cast<int>(c_) - 1;
    const int t = read_trans(storage);
    auto mem_bit = [&](int i) { return storage.bit(mem_off_ + static_cast<unsigned>(i)); };
    auto set_mem_bit = [&](int i, bool v) { storage.set_bit(mem_off_ + static_cast<unsigned>(i), v); };

    if (pin >= 0 && t < 0) {
        memory.set(0, mem_bit(-t));
        write_trans(storage, t == -last ? 0 : t - 1);
        return Action::move(pin);
    }
    if (pin >= 0 && t < last) {
        set_mem_bit(t, memory.get(0));
        write_trans(storage, t + 1);
        return Action::move(pin);
    }
    if (pin >= 0) {
        set_mem_bit(last, memory.get(0));
        write_trans(storage, 0);
    }
    if (events)
        events->emit({events::kOneBitBoundary, 0});

    BitString a(c_);
    for (unsigned b = 0; b < c_; b += 64) {
        const unsigned w = std::min(64u, c_ - b);
        a.write(b, w, storage.get(mem_off_ + b, w));
    }
    const Action act = inner_->activate(a, storage, degree, pin, events);
    if (a.size() != c_)
        throw AgentFault("simulated program changed its memory width");
    for (unsigned b = 0; b < c_; b += 64) {
        const unsigned w = std::min(64u, c_ - b);
        storage.set(mem_off_ + b, w, a.read(b, w));
    }
    if (act.halt)
        return act;
    memory.set(0, a.get(0));
    if (last > 0)
        write_trans(storage, -1);
    return act;
}

SimRun sim_onebit(std::shared_ptr<const AgentProgram> inner, const PortGraph &graph, NodeId start,
                  const OneBitOptions &options)
{
    const OneBitProgram prog(inner);
    Runner sim(prog, graph, start);
    Runner ref(*inner, graph, start);
    const std::size_t n = graph.node_count();
    const unsigned inner_bits = inner->schema().total_bits();

    SimRun out;
    out.locations.push_back(start);
    bool stop = false;
    std::uint64_t boundaries = 0, last_moves = 0;

    auto compare_storage = [&](const std::string &where) {
        for (NodeId v = 0; v < n; ++v) {
            if (prog.trans(sim.storage(), v) != 0) {
                out.violations.push_back(where + "trans nonzero at node " + std::to_string(v));
                return;
            }
            std::vector<std::uint64_t> d;
            for (unsigned b = 0; b < inner_bits; b += 64)
                d.push_back(ref.storage().get(v, b, std::min(64u, inner_bits - b)));
            if (prog.st(sim.storage(), v) != d) {
                out.violations.push_back(where + "st differs from the direct storage at node " + std::to_string(v));
                return;
            }
        }
    };

    EventSink ev;
    ev.listener = [&](const Event &e) {
        if (e.kind != events::kOneBitBoundary)
            return;
        ++boundaries;
        if (boundaries > 1) {
            out.step_moves.push_back(sim.moves() - last_moves);
            out.locations.push_back(sim.node());
            ++out.simulated_steps;
        }
        last_moves = sim.moves();
        const std::string where = at_step(boundaries - 1);
        if (options.check && out.violations.size() < 10) {
            compare_storage(where);
            if (prog.mem(sim.storage(), sim.node()) != ref.memory())
                out.violations.push_back(where + "mem at the current node differs from the direct memory");
            if (sim.node() != ref.node() || sim.pin() != ref.pin())
                out.violations.push_back(where + "location or incoming port differs from the direct agent");
        }
        if (boundaries > options.max_sim_steps) {
            stop = true;
            return;
        }
        if (options.check)
            step_reference(ref, out.violations, where);
        if (options.corrupt_trans_after && *options.corrupt_trans_after + 1 == boundaries && n > 1) {
            const NodeId v = static_cast<NodeId>((sim.node() + 1) % n);
            if (prog.trans_bits())
                prog.set_trans(sim.storage(), v, 1);
            else
                sim.storage().at(v).set_bit(0, !sim.storage().at(v).bit(0));
        }
    };

    try {
        while (!stop && !sim.halted() && sim.activations() < options.step_limit) {
            sim.step(&ev);
            ev.clear();
        }
    } catch (const RunError &e) {
        out.violations.push_back(at_step(boundaries) + e.what());
    }
    out.halted = sim.halted();
    if (out.halted) {
        ++out.simulated_steps;
        if (options.check) {
            const std::string where = "after halting: ";
            if (!ref.halted())
                out.violations.push_back(where + "direct agent did not halt");
            compare_storage(where);
            if (prog.mem(sim.storage(), sim.node()) != ref.memory())
                out.violations.push_back(where + "final memory differs");
        }
    }
    out.truncated = !stop && !out.halted && out.violations.empty();
    out.storages = field_values(sim.storage(), n, 0, std::min(64u, inner_bits));
    out.memory = prog.mem(sim.storage(), sim.node());
    out.summary = sim.summary();
    return out;
}

SimRun sim_chain(const TuringMachine &tm, unsigned storage_bits, const PortGraph &graph, NodeId start,
                 const SimOptions &options)
{
    auto inner = std::make_shared<const SimConstProgram>(tm, storage_bits);
    const OneBitProgram prog(inner);
    const ConstChecker chk(*inner, graph, start);
    const TmAgentProgram direct(tm, storage_bits, chk.cells());
    Runner sim(prog, graph, start);
    Runner ref(direct, graph, start);

    SimRun out;
    out.locations.push_back(start);
    bool stop = false;
    std::uint64_t last_moves = 0;

    // Sim_const's fields sit at offset 0 of every record, so its checker
    // reads the chain's storage directly.
    EventSink ev;
    ev.listener = [&](const Event &e) {
        if (e.kind == events::kTmStep) {
            ++out.tm_steps;
            return;
        }
        if (e.kind != events::kSimBoundary)
            return;
        const bool halted = e.value != 0;
        const std::string where = at_step(out.simulated_steps);
        ++out.simulated_steps;
        out.step_moves.push_back(sim.moves() - last_moves);
        last_moves = sim.moves();
        const auto loc = chk.location(sim.storage());
        if (!halted)
            out.locations.push_back(loc.value_or(start));
        if (options.check && out.violations.size() < 10) {
            step_reference(ref, out.violations, where);
            if (halted != ref.halted())
                out.violations.push_back(where + "halting differs from the direct agent");
            if (!loc || (!halted && *loc != ref.node()))
                out.violations.push_back(where + "simulated location differs from the direct agent");
            if (field_values(sim.storage(), graph.node_count(), inner->layout().bA, storage_bits) !=
                field_values(ref.storage(), graph.node_count(), 0, storage_bits))
                out.violations.push_back(where + "b^A storages differ");
            if (chk.tape1(sim.storage()) != direct.tape1(ref.memory()))
                out.violations.push_back(where + "tape 1 differs from the direct agent's memory");
        }
        if (out.simulated_steps >= options.max_sim_steps)
            stop = true;
    };

    try {
        while (!stop && !sim.halted() && sim.activations() < options.step_limit) {
            sim.step(&ev);
            ev.clear();
        }
    } catch (const RunError &e) {
        out.violations.push_back(at_step(out.simulated_steps) + e.what());
    }
    out.halted = sim.halted();
    out.truncated = !stop && !out.halted && out.violations.empty();
    out.storages = field_values(sim.storage(), graph.node_count(), inner->layout().bA, storage_bits);
    out.memory = chk.tape1_memory(sim.storage());
    out.summary = sim.summary();
    return out;
}

// ---- native test programs ----

NativeRotorProgram::NativeRotorProgram(unsigned c) : c_(c)
{
    if (c_ == 0 || c_ > 64)
        throw std::invalid_argument("native rotor memory must be 1..64 bits");
    schema_.add("visits", 2);
}

Action NativeRotorProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *) const
{
    if (memory.size() != c_)
        memory.resize(c_);
    const std::uint64_t mask = c_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << c_) - 1;
    const std::uint64_t count = (memory.read(0, c_) + 1) & mask;
    memory.write(0, c_, count);
    storage.set(0, 2, std::min<std::uint64_t>(storage.get(0, 2) + 1, 3));
    if (count == 0 || degree == 0)
        return Action::stop();
    return Action::move(pin < 0 ? 0 : (pin + 1) % degree);
}

MixWalkerProgram::MixWalkerProgram(unsigned c) : c_(c)
{
    if (c_ == 0 || c_ > 64)
        throw std::invalid_argument("mix walker memory must be 1..64 bits");
    schema_.add("count", 2);
    schema_.add("tag", 1);
}

Action MixWalkerProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin, EventSink *) const
{
    if (memory.size() != c_)
        memory.resize(c_);
    const std::uint64_t mask = c_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << c_) - 1;
    const std::uint64_t m = memory.read(0, c_);
    const std::uint64_t count = storage.get(0, 2);
    const std::uint64_t tag = storage.get(2, 1);
    const std::uint64_t h = (m + 1) * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(pin + 2) * 0x632BE59BD9B4E019ull +
                            static_cast<std::uint64_t>(degree) * 31 + count * 7 + tag * 13;
    const std::uint64_t next = (h >> 17) & mask;
    memory.write(0, c_, next);
    storage.set(2, 1, tag ^ (next & 1u));
    if (count >= 2 || degree == 0) {
        storage.set(0, 2, 3);
        return Action::stop();
    }
    storage.set(0, 2, count + 1);
    return Action::move(static_cast<Port>((h >> 40) % static_cast<std::uint64_t>(degree)));
}

} // namespace agentsim
