#include "agentsim/lexdfs.hpp"

#include <algorithm>
#include <bit>

namespace agentsim {

namespace {

Effect ff(Order o, PredKind k, unsigned arg = 0)
{
    return Effect::call(Proc::FindFirst, regs::find_first(o, pred(k, arg)));
}

Effect mark(std::uint32_t i) { return Effect::call(Proc::MarkPred, i); }

// pcs of the DFS procedure
enum : std::uint8_t {
    kStart = 0,
    kRootColored,
    kFirstVisit,
    kSuccCopied,
    kPredCopied,
    kPredAtRoot,
    kPredDone,
    kLoop,
    kChildSearched,
    kChildMarked,
    kParentSearched,
    kWalkUp,
    kWalkSearched,
    kWalkArrived,
    kAtParent,
    kParentMarked,
    kBackAtChild,
    kRetargeted,
    kWalkDown,
    kWalkDownSearched,
    kEnd,
    kAuxDeleted,
    kFinish,
};

// One depth-first pass from the current node. The head is tracked by the
// R-path dfs_x; the grey nodes are exactly its path. When backtracking from
// u the agent colors u green, climbs the grey path to find u's parent
// (flagging visited grey nodes with the traversal bit) and clears the flags
// again on the way back down.
Effect dldfs(Ctx &c, Frame &f)
{
    const bool reset = f.flag(regs::kDfReset);
    const auto hook = static_cast<regs::Hook>(f.reg(regs::kDfHook, 2));
    const unsigned y = f.reg(regs::kDfY, 4);
    const unsigned x = c.L.dfs_x;
    const unsigned aux = c.L.dfs_aux;
    const unsigned unvisited = reset ? dfsc::Black : dfsc::White;
    const unsigned done = reset ? dfsc::White : dfsc::Black;

    switch (f.pc) {
    case kStart:
        f.pc = kRootColored;
        return Effect::call(Proc::RpInit, regs::ns(x));
    case kRootColored:
        c.set_dfs_color(dfsc::Grey);
        f.pc = kFirstVisit;
        if (hook == regs::HookPred)
            return Effect::call(Proc::RpInit, regs::ns(aux));
        return Effect::next();

    case kFirstVisit:
        c.emit(events::kFirstVisit, reset ? 1 : 0);
        if (f.flag(regs::kDfClear))
            for (unsigned b = 2u * c.L.tape_k; b < 10u * c.L.tape_k; b += 32)
                c.st.set(c.L.tape + b, std::min(32u, 10u * c.L.tape_k - b), 0);
        f.pc = kLoop;
        switch (hook) {
        case regs::HookNone:
            break;
        case regs::HookParity:
            f.set_flag(regs::kDfParity, !f.flag(regs::kDfParity));
            break;
        case regs::HookSucc:
            if (f.flag(regs::kDfDone))
                break;
            if (f.flag(regs::kDfPending)) {
                f.pc = kSuccCopied;
                return Effect::call(Proc::RpCopy, regs::ns2(x, y));
            }
            if (c.rp_target(y))
                f.set_flag(regs::kDfPending, true);
            break;
        case regs::HookPred:
            if (f.flag(regs::kDfDone))
                break;
            if (c.rp_target(y)) {
                f.pc = kPredCopied;
                return Effect::call(Proc::RpCopy, regs::ns2(aux, y));
            }
            return Effect::call(Proc::RpCopy, regs::ns2(x, aux));
        }
        return Effect::next();
    case kSuccCopied:
        f.set_flag(regs::kDfDone, true);
        f.pc = kLoop;
        return Effect::next();
    case kPredCopied:
        f.pc = kPredAtRoot;
        return Effect::call(Proc::RpMoveToTop, regs::ns(aux));
    case kPredAtRoot:
        f.pc = kPredDone;
        return Effect::call(Proc::RpMoveTarget, regs::ns(x));
    case kPredDone:
        f.set_flag(regs::kDfDone, true);
        f.pc = kLoop;
        return Effect::next();

    case kLoop:
        f.pc = kChildSearched;
        return ff(Order::HeadAscend, PredKind::DfsColor, unvisited);
    case kChildSearched:
        if (c.ret) {
            f.pc = kChildMarked;
            return mark(instr(InstrKind::DfsSetColor, dfsc::Grey));
        }
        f.pc = kParentSearched;
        return ff(Order::HeadAscend, PredKind::RpInPath, x);
    case kChildMarked:
        f.pc = kFirstVisit;
        return Effect::call(Proc::RpModifyMove, regs::ns(x));
    case kParentSearched:
        if (!c.ret) {
            f.pc = kEnd;
            return Effect::next();
        }
        c.set_dfs_color(dfsc::Green);
        f.pc = kWalkUp;
        return Effect::call(Proc::RpMoveToTop, regs::ns(x));

    // Climb from the root: at each grey node the next path node is the
    // first neighbor that is grey and unflagged, or green.
    case kWalkUp:
        c.set_dfs_trav(true);
        f.pc = kWalkSearched;
        return ff(Order::HeadAscend, PredKind::DfsGreyOpen);
    case kWalkSearched:
        if (!c.ret)
            return Effect::fault("grey path broken during backtrack");
        f.pc = kWalkArrived;
        return Effect::move(c.pin);
    case kWalkArrived:
        if (c.dfs_color() == dfsc::Green) {
            f.pc = kAtParent;
            return Effect::move(c.pin);
        }
        f.pc = kWalkUp;
        return Effect::next();
    case kAtParent:
        f.pc = kParentMarked;
        return mark(instr(InstrKind::DfsSetColor, done));
    case kParentMarked:
        f.pc = kBackAtChild;
        return Effect::move(c.pin);
    case kBackAtChild:
        f.pc = kRetargeted;
        return Effect::call(Proc::RpModifyMove, regs::ns(x));
    case kRetargeted:
        f.pc = kWalkDown;
        return Effect::call(Proc::RpMoveToTop, regs::ns(x));
    case kWalkDown:
        c.set_dfs_trav(false);
        if (c.rp_target(x)) {
            f.pc = kLoop;
            return Effect::next();
        }
        f.pc = kWalkDownSearched;
        return ff(Order::HeadAscend, PredKind::DfsGreyFlagged);
    case kWalkDownSearched:
        if (!c.ret)
            return Effect::fault("flagged grey path broken");
        f.pc = kWalkDown;
        return Effect::move(c.pin);

    case kEnd:
        c.set_dfs_color(done);
        c.st.set(c.L.rp[x], rpf::kBits, 0);
        f.pc = kFinish;
        if (hook == regs::HookPred) {
            f.pc = kAuxDeleted;
            return Effect::call(Proc::RpDelete, regs::ns(aux));
        }
        return Effect::next();
    case kAuxDeleted:
        c.st.set(c.L.rp[aux], rpf::kBits, 0);
        f.pc = kFinish;
        return Effect::next();
    default:
        switch (hook) {
        case regs::HookParity:
            return Effect::ret(f.flag(regs::kDfParity));
        case regs::HookNone:
            return Effect::ret(true);
        default:
            return Effect::ret(f.flag(regs::kDfDone));
        }
    }
}

// regs bit 0: run the reset pass
Effect dldfs_root(Ctx &c, Frame &f)
{
    (void)c;
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return Effect::call(Proc::Dldfs, regs::dldfs(false, regs::HookNone));
    case 1:
        f.pc = 2;
        if (f.flag(0))
            return Effect::call(Proc::Dldfs, regs::dldfs(true, regs::HookNone));
        return Effect::next();
    default:
        return Effect::halt();
    }
}

Effect parity_root(Ctx &c, Frame &f)
{
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return Effect::call(Proc::Dldfs, regs::dldfs(false, regs::HookParity));
    case 1:
        c.st.set_bit(c.L.out, c.ret);
        f.pc = 2;
        return Effect::call(Proc::Dldfs, regs::dldfs(true, regs::HookNone));
    default:
        return Effect::halt();
    }
}

ProcTable dfs_table(Proc root, StepFn fn)
{
    auto t = standard_procs();
    t.set(root, fn);
    return t;
}

// Deepest chain: root, DFS, Copy, ModifyMove, MoveToTop, FindFirst.
constexpr EngineConfig kDfsEngine{12, 6, 0, 1u << 22};

} // namespace

void add_dfs_procs(ProcTable &t) { t.set(Proc::Dldfs, &dldfs); }

DfsSetup dfs_setup(bool with_out)
{
    DfsSetup s;
    s.layout.dfs = add_dfs_fields(s.schema);
    s.layout.dfs_x = 0;
    s.layout.dfs_aux = 1;
    s.layout.rp[0] = add_rpath_fields(s.schema, "dfs.X");
    if (with_out) {
        s.layout.out = static_cast<std::uint16_t>(s.schema.total_bits());
        s.schema.add("out", 1);
    }
    return s;
}

DldfsProgram::DldfsProgram(bool reset)
    : ProcedureProgram(reset ? "lexdfs" : "lexdfs-noreset", dfs_setup().schema, dfs_setup().layout,
                       dfs_table(Proc::DldfsRoot, &dldfs_root),
                       Frame{static_cast<std::uint8_t>(Proc::DldfsRoot), 0, reset ? 1u : 0u}, kDfsEngine)
{
}

ParityProgram::ParityProgram()
    : ProcedureProgram("parity", dfs_setup(true).schema, dfs_setup(true).layout,
                       dfs_table(Proc::ParityRoot, &parity_root),
                       Frame{static_cast<std::uint8_t>(Proc::ParityRoot), 0, 0}, kDfsEngine)
{
}

CountingDfsProgram::CountingDfsProgram() : inner_(true) {}

Action CountingDfsProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin,
                                    EventSink *events) const
{
    const unsigned w = inner_.memory_width();
    std::uint64_t count = memory.size() > w ? memory.read(w, static_cast<unsigned>(memory.size() - w)) : 0;
    BitString inner(w);
    for (unsigned b = 0; b < w; b += 64)
        inner.write(b, std::min(64u, w - b), memory.size() >= w ? memory.read(b, std::min(64u, w - b)) : 0);

    EventSink local;
    const Action act = inner_.activate(inner, storage, degree, pin, &local);
    for (const auto &e : local) {
        if (e.kind == events::kFirstVisit && e.value == 0)
            ++count;
        if (events)
            events->emit(e);
    }

    const auto cbits = static_cast<unsigned>(std::bit_width(count));
    memory.resize(w + cbits);
    for (unsigned b = 0; b < w; b += 64)
        memory.write(b, std::min(64u, w - b), inner.read(b, std::min(64u, w - b)));
    if (cbits)
        memory.write(w, cbits, count);
    return act;
}

LexDfsOracleResult oracle_lexdfs(const PortGraph &g, NodeId root)
{
    const std::size_t n = g.node_count();
    if (root >= n)
        throw std::invalid_argument("oracle root out of range");
    LexDfsOracleResult r;
    r.parent.assign(n, kNoParent);
    std::vector<bool> seen(n, false);
    std::vector<std::pair<NodeId, Port>> stack{{root, 0}};
    seen[root] = true;
    r.preorder.push_back(root);
    while (!stack.empty()) {
        auto &[u, next] = stack.back();
        if (next >= g.degree(u)) {
            stack.pop_back();
            continue;
        }
        const NodeId v = g.at(u, next++).neighbor;
        if (seen[v])
            continue;
        seen[v] = true;
        r.parent[v] = u;
        r.preorder.push_back(v);
        stack.push_back({v, 0});
    }
    return r;
}

std::vector<NodeId> tree_path(const LexDfsOracleResult &result, NodeId v)
{
    std::vector<NodeId> p;
    for (NodeId u = v; u != kNoParent; u = result.parent[u])
        p.push_back(u);
    std::reverse(p.begin(), p.end());
    return p;
}

std::vector<std::string> check_lemma1(const PortGraph &g, NodeId root, const LexDfsOracleResult &result)
{
    std::vector<std::string> out;
    for (const NodeId v : result.preorder) {
        const auto p = tree_path(result, v);
        if (p.front() != root) {
            out.push_back("tree path of " + std::to_string(v) + " does not start at the root");
            continue;
        }
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const auto step = g.port_to(p[i], p[i + 1]);
            if (!step) {
                out.push_back("tree edge " + std::to_string(p[i]) + "-" + std::to_string(p[i + 1]) + " missing");
                continue;
            }
            Port best = *step;
            for (std::size_t j = i + 2; j < p.size(); ++j)
                if (const auto q = g.port_to(p[i], p[j]))
                    best = std::min(best, *q);
            if (best != *step)
                out.push_back("path to " + std::to_string(v) + ": node " + std::to_string(p[i]) +
                              " does not exit through its smallest port towards the rest of the path");
        }
    }
    return out;
}

std::vector<std::string> check_lemma1(const PortGraph &g, NodeId root)
{
    return check_lemma1(g, root, oracle_lexdfs(g, root));
}

DldfsRun run_dldfs(const PortGraph &g, NodeId root, bool reset, bool check_grey, std::uint64_t step_limit)
{
    const DldfsProgram prog(reset);
    const auto &L = prog.layout();
    Runner r(prog, g, root);
    DldfsRun out;
    const std::size_t n = g.node_count();
    LexDfsOracleResult oracle;
    std::vector<std::size_t> depth;
    if (check_grey) {
        oracle = oracle_lexdfs(g, root);
        depth.assign(n, 0);
        for (const NodeId v : oracle.preorder)
            depth[v] = oracle.parent[v] == kNoParent ? 0 : depth[oracle.parent[v]] + 1;
    }

    EventSink ev;
    std::vector<char> on(n);
    while (!r.halted() && r.activations() < step_limit) {
        const NodeId here = r.node();
        ev.clear();
        r.step(&ev);
        for (const auto &e : ev)
            if (e.kind == events::kFirstVisit && e.value == 0)
                out.visit_order.push_back(here);
        if (!check_grey || out.violations.size() >= 10)
            continue;

        std::size_t count = 0;
        std::size_t green = 0;
        NodeId deepest = kNoParent;
        for (NodeId v = 0; v < n; ++v) {
            const auto col = r.storage().get(v, L.dfs, 2);
            on[v] = col == dfsc::Grey || col == dfsc::Green;
            if (!on[v])
                continue;
            ++count;
            green += col == dfsc::Green;
            if (deepest == kNoParent || depth[v] > depth[deepest])
                deepest = v;
        }
        if (count == 0)
            continue;
        const auto expect = tree_path(oracle, deepest);
        bool ok = expect.size() == count && green <= 1 && std::all_of(expect.begin(), expect.end(), [&](NodeId v) { return on[v]; });
        if (!ok)
            out.violations.push_back("after activation " + std::to_string(r.activations()) +
                                     ": grey nodes are not a root path of the search tree");
    }
    out.trace.summary = r.summary();
    out.trace.storage = r.storage();
    out.trace.memory = r.memory();
    return out;
}

} // namespace agentsim
