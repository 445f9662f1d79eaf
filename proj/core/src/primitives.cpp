#include "agentsim/procedure.hpp"

namespace agentsim {

bool eval_pred(std::uint32_t p, const StorageView &st, const Layout &L)
{
    const auto kind = static_cast<PredKind>(p & 31u);
    const unsigned arg = p >> 5;
    auto rp_color = [&] { return st.get(L.rp[arg] + rpf::kColor, 2); };
    switch (kind) {
    case PredKind::Any:
        return true;
    case PredKind::RpInPath:
        return st.bit(L.rp[arg] + rpf::kInPath);
    case PredKind::RpInPathYellow:
        return st.bit(L.rp[arg] + rpf::kInPath) && rp_color() == rpf::Yellow;
    case PredKind::RpYellow:
        return rp_color() == rpf::Yellow;
    case PredKind::RpRed:
        return rp_color() == rpf::Red;
    case PredKind::RpBlue:
        return rp_color() == rpf::Blue;
    case PredKind::RpTarget:
        return st.bit(L.rp[arg] + rpf::kTarget);
    case PredKind::DfsColor:
        return st.get(L.dfs, 2) == arg;
    case PredKind::DfsGreyOpen: {
        const auto c = st.get(L.dfs, 2);
        return (c == dfsc::Grey && !st.bit(L.dfs + 2)) || c == dfsc::Green;
    }
    case PredKind::DfsGreyFlagged:
        return st.get(L.dfs, 2) == dfsc::Grey && st.bit(L.dfs + 2);
    case PredKind::SimMark:
        return st.bit(L.mark);
    case PredKind::SimPast:
        return st.bit(L.past);
    case PredKind::SimCursor:
        return st.bit(L.cursor);
    }
    return false;
}

void apply_instr(std::uint32_t i, StorageView &st, const Layout &L)
{
    const auto kind = static_cast<InstrKind>(i & 31u);
    const unsigned arg = i >> 5;
    const unsigned rp = L.rp[arg & 15u];
    switch (kind) {
    case InstrKind::RpYellow:
        st.set(rp + rpf::kColor, 2, rpf::Yellow);
        break;
    case InstrKind::RpNewTarget:
        st.set_bit(rp + rpf::kTarget, true);
        st.set(rp + rpf::kColor, 2, rpf::White);
        break;
    case InstrKind::RpDirGreater:
        st.set_bit(rp + rpf::kDirection, true);
        break;
    case InstrKind::RpDirLess:
        st.set_bit(rp + rpf::kDirection, false);
        break;
    case InstrKind::RpWhite:
        st.set(rp + rpf::kColor, 2, rpf::White);
        break;
    case InstrKind::RpInPathSet:
        st.set_bit(rp + rpf::kInPath, true);
        break;
    case InstrKind::RpInPathClear:
        st.set_bit(rp + rpf::kInPath, false);
        st.set_bit(rp + rpf::kDirection, false);
        break;
    case InstrKind::DfsSetColor:
        st.set(L.dfs, 2, arg);
        break;
    case InstrKind::SimCursorSet:
        st.set_bit(L.cursor, true);
        break;
    case InstrKind::SimCursorClear:
        st.set_bit(L.cursor, false);
        break;
    case InstrKind::SimLeave:
        st.set_bit(L.mark, false);
        st.set_bit(L.past, true);
        break;
    case InstrKind::SimPastClear:
        st.set_bit(L.past, false);
        break;
    }
}

namespace {

// pc 0: first probe; 1: at the probed neighbor; 2: back at the origin.
Effect find_first(Ctx &c, Frame &f)
{
    const auto order = static_cast<Order>(f.reg(regs::kFfOrder, 2));
    const bool ascending = order == Order::HeadAscend || order == Order::MiddleAscend;
    switch (f.pc) {
    case 0: {
        if (c.degree == 0)
            return Effect::ret(false);
        Port p = 0;
        switch (order) {
        case Order::HeadAscend: p = 0; break;
        case Order::TailDescend: p = c.degree - 1; break;
        case Order::MiddleAscend:
        case Order::MiddleDescend:
            if (c.pin < 0)
                return Effect::fault("middle-order search without a valid incoming port");
            p = ascending ? c.pin + 1 : c.pin - 1;
            break;
        }
        if (p < 0 || p >= c.degree)
            return Effect::ret(false);
        f.pc = 1;
        return Effect::move(p);
    }
    case 1:
        f.set_flag(regs::kFfMatched, eval_pred(f.reg(regs::kFfPred, 9), c.st, c.L));
        f.pc = 2;
        return Effect::move(c.pin);
    default: {
        if (f.flag(regs::kFfMatched))
            return Effect::ret(true);
        const Port p = ascending ? c.pin + 1 : c.pin - 1;
        if (p < 0 || p >= c.degree)
            return Effect::ret(false);
        f.pc = 1;
        return Effect::move(p);
    }
    }
}

Effect mark_pred(Ctx &c, Frame &f)
{
    switch (f.pc) {
    case 0:
        if (c.pin < 0)
            return Effect::fault("MarkPred without a valid incoming port");
        f.pc = 1;
        return Effect::move(c.pin);
    case 1:
        apply_instr(f.regs, c.st, c.L);
        f.pc = 2;
        return Effect::move(c.pin);
    default:
        return Effect::ret(true);
    }
}

} // namespace

void add_primitive_procs(ProcTable &t)
{
    t.set(Proc::FindFirst, &find_first);
    t.set(Proc::MarkPred, &mark_pred);
}

} // namespace agentsim
