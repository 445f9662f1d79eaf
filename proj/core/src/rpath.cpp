#include "agentsim/rpath.hpp"

#include "agentsim/lexdfs.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace agentsim {

namespace {

using regs::kNs;

unsigned ns_of(const Frame &f) { return f.reg(kNs, 4); }

Effect ff(Order o, PredKind k, unsigned arg) { return Effect::call(Proc::FindFirst, regs::find_first(o, pred(k, arg))); }
Effect mark(InstrKind k, unsigned arg) { return Effect::call(Proc::MarkPred, instr(k, arg)); }

// Nodes leaving the path also drop their direction bit so that an emptied
// namespace is all-zero again.
void leave_path(Ctx &c, unsigned ns)
{
    c.set_rp_in_path(ns, false);
    c.st.set_bit(c.L.rp[ns] + rpf::kDirection, false);
}

Effect rp_init(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    if (c.rp_in_path(ns) || c.rp_target(ns))
        return Effect::fault("R-path initialized twice");
    c.set_rp_in_path(ns, true);
    c.set_rp_target(ns, true);
    return Effect::ret(true);
}

Effect move_to_top(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return ff(Order::HeadAscend, PredKind::RpInPath, ns);
    case 1:
        if (!c.ret)
            return Effect::ret(true);
        if (c.rp_target(ns)) {
            f.pc = 0;
            return Effect::move(c.pin);
        }
        f.pc = 2;
        return ff(Order::MiddleAscend, PredKind::RpInPath, ns);
    case 2:
        if (!c.ret)
            return Effect::ret(true);  // only one in-path neighbor: this is the source
        if (c.rp_dir(ns)) {
            f.pc = 0;
            return Effect::move(c.pin);
        }
        f.pc = 3;
        return ff(Order::MiddleDescend, PredKind::RpInPath, ns);
    default:
        f.pc = 0;
        return Effect::move(c.pin);
    }
}

Effect move_one_hop(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    switch (f.pc) {
    case 0:
        if (c.rp_target(ns))
            return Effect::fault("MoveOneHopForward called at the target");
        f.pc = 1;
        return ff(c.rp_dir(ns) ? Order::HeadAscend : Order::TailDescend, PredKind::RpInPath, ns);
    case 1:
        if (!c.ret)
            return Effect::fault("no forward neighbor on the path");
        f.pc = 2;
        return Effect::move(c.pin);
    default:
        return Effect::ret(true);
    }
}

Effect move_target(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    if (c.rp_target(ns))
        return Effect::ret(true);
    return Effect::call(Proc::RpMoveOneHop, regs::ns(ns));
}

Effect modify_move(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return mark(InstrKind::RpYellow, ns);
    case 1:
        f.pc = 2;
        return ff(Order::HeadAscend, PredKind::RpInPathYellow, ns);
    case 2:
        if (c.ret) {
            // t' is back(t): drop the tail edge
            c.set_rp_target(ns, false);
            leave_path(c, ns);
            f.pc = 3;
            return mark(InstrKind::RpNewTarget, ns);
        }
        f.pc = 5;
        return Effect::call(Proc::RpMoveToTop, regs::ns(ns));
    case 3:
        f.pc = 4;
        return Effect::move(c.pin);
    case 4:
        return Effect::ret(true);

    // find phase
    case 5:
        f.pc = 6;
        return ff(Order::HeadAscend, PredKind::RpYellow, ns);
    case 6:
        if (!c.ret) {
            f.pc = 5;
            return Effect::call(Proc::RpMoveOneHop, regs::ns(ns));
        }
        c.set_rp_color(ns, rpf::Red);
        if (c.rp_dir(ns)) {
            f.pc = 7;
            return ff(Order::MiddleAscend, PredKind::RpInPath, ns);
        }
        f.pc = 8;
        return ff(Order::MiddleDescend, PredKind::RpInPath, ns);
    case 7:
    case 8:
        if ((f.pc == 7) != c.ret)
            c.set_rp_color(ns, rpf::Blue);
        c.emit(events::kBranching, c.rp_color(ns) | (ns << 2));
        f.pc = 10;
        // When the branching node is the old target there is nothing further down.
        if (c.rp_target(ns))
            return Effect::next();
        return Effect::call(Proc::RpMoveOneHop, regs::ns(ns));

    // delete phase
    case 10:
        if (c.rp_target(ns)) {
            c.set_rp_target(ns, false);
            leave_path(c, ns);
            f.pc = 11;
            return ff(Order::HeadAscend, PredKind::RpYellow, ns);
        }
        f.pc = 15;
        return Effect::call(Proc::RpMoveOneHop, regs::ns(ns));
    case 11:
        if (!c.ret)
            return Effect::fault("new target vanished");
        f.pc = 12;
        return Effect::move(c.pin);
    case 12:
        c.set_rp_color(ns, rpf::White);
        c.set_rp_in_path(ns, true);
        c.set_rp_target(ns, true);
        f.pc = 13;
        return ff(Order::HeadAscend, PredKind::RpRed, ns);
    case 13:
        if (c.ret) {
            f.pc = 16;
            return mark(InstrKind::RpDirGreater, ns);
        }
        f.pc = 14;
        return ff(Order::HeadAscend, PredKind::RpBlue, ns);
    case 14:
        if (!c.ret)
            return Effect::fault("branching node vanished");
        f.pc = 16;
        return mark(InstrKind::RpDirLess, ns);
    case 15:
        f.pc = 10;
        return mark(InstrKind::RpInPathClear, ns);
    case 16:
        f.pc = 17;
        return mark(InstrKind::RpWhite, ns);
    case 17:
        f.pc = 18;
        return mark(InstrKind::RpInPathSet, ns);
    default:
        return Effect::ret(true);
    }
}

Effect rp_delete(Ctx &c, Frame &f)
{
    const unsigned ns = ns_of(f);
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return Effect::call(Proc::RpMoveTarget, regs::ns(ns));
    case 1:
        f.pc = 2;
        return ff(Order::HeadAscend, PredKind::RpInPath, ns);
    default:
        if (!c.ret)
            return Effect::ret(true);
        f.pc = 1;
        return Effect::call(Proc::RpModifyMove, regs::ns(ns));
    }
}

Effect rp_copy(Ctx &c, Frame &f)
{
    const unsigned src = f.reg(regs::kNs, 4);
    const unsigned dst = f.reg(regs::kNs2, 4);
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return Effect::call(Proc::RpMoveToTop, regs::ns(src));
    case 1:
        if (!c.rp_in_path(dst))
            return Effect::fault("copy between R-paths with different sources");
        f.pc = 2;
        return Effect::call(Proc::RpDelete, regs::ns(dst));
    case 2:
        if (c.rp_target(src))
            return Effect::ret(true);
        f.pc = 3;
        return ff(c.rp_dir(src) ? Order::HeadAscend : Order::TailDescend, PredKind::RpInPath, src);
    default:
        f.pc = 2;
        return Effect::call(Proc::RpModifyMove, regs::ns(dst));
    }
}

Effect modify_neighbor(Ctx &c, Frame &f)
{
    const unsigned y = f.reg(regs::kNs, 4);
    const bool predecessor = f.flag(regs::kMnDir);
    switch (f.pc) {
    case 0:
        f.pc = 1;
        return Effect::call(Proc::RpMoveToTop, regs::ns(y));
    case 1:
        if (predecessor && c.rp_target(y))
            return Effect::ret(false);
        f.pc = 2;
        return Effect::call(Proc::Dldfs,
                            regs::dldfs(false, predecessor ? regs::HookPred : regs::HookSucc, y));
    case 2:
        f.set_flag(regs::kMnResult, c.ret);
        f.pc = 3;
        return Effect::call(Proc::Dldfs, regs::dldfs(true, regs::HookNone));
    default:
        return Effect::ret(f.flag(regs::kMnResult));
    }
}

} // namespace

void add_rpath_procs(ProcTable &t)
{
    t.set(Proc::RpInit, &rp_init);
    t.set(Proc::RpMoveToTop, &move_to_top);
    t.set(Proc::RpMoveOneHop, &move_one_hop);
    t.set(Proc::RpMoveTarget, &move_target);
    t.set(Proc::RpModifyMove, &modify_move);
    t.set(Proc::RpDelete, &rp_delete);
    t.set(Proc::RpCopy, &rp_copy);
    t.set(Proc::RpModifyNeighbor, &modify_neighbor);
}

RpathSetup rpath_setup(unsigned count)
{
    if (count + 2 > Layout::kMaxRpath)
        throw std::invalid_argument("too many R-path namespaces");
    RpathSetup s;
    for (unsigned i = 0; i < count; ++i)
        s.layout.rp[i] = add_rpath_fields(s.schema, "X" + std::to_string(i));
    s.layout.dfs = add_dfs_fields(s.schema);
    s.layout.dfs_x = static_cast<std::uint8_t>(count);
    s.layout.dfs_aux = static_cast<std::uint8_t>(count + 1);
    s.layout.rp[count] = add_rpath_fields(s.schema, "dfs.X");
    s.layout.rp[count + 1] = add_rpath_fields(s.schema, "dfs.Xaux");
    return s;
}

RpathFieldsView rpath_fields(const StorageArray &storage, const Layout &layout, unsigned ns, NodeId v)
{
    const unsigned b = layout.rp[ns];
    RpathFieldsView r;
    r.target = storage.get(v, b + rpf::kTarget, 1);
    r.in_path = storage.get(v, b + rpf::kInPath, 1);
    r.direction = storage.get(v, b + rpf::kDirection, 1);
    r.color = static_cast<unsigned>(storage.get(v, b + rpf::kColor, 2));
    return r;
}

namespace {

// Connected components of the in-path induced subgraph.
std::vector<std::vector<NodeId>> in_path_components(const StorageArray &storage, const Layout &layout, unsigned ns,
                                                    const PortGraph &g)
{
    const std::size_t n = g.node_count();
    std::vector<char> in(n), seen(n);
    for (NodeId v = 0; v < n; ++v)
        in[v] = rpath_fields(storage, layout, ns, v).in_path;
    std::vector<std::vector<NodeId>> comps;
    for (NodeId v = 0; v < n; ++v) {
        if (!in[v] || seen[v])
            continue;
        comps.emplace_back();
        std::vector<NodeId> stack{v};
        seen[v] = 1;
        while (!stack.empty()) {
            const NodeId x = stack.back();
            stack.pop_back();
            comps.back().push_back(x);
            for (const auto &e : g.ports(x))
                if (in[e.neighbor] && !seen[e.neighbor]) {
                    seen[e.neighbor] = 1;
                    stack.push_back(e.neighbor);
                }
        }
    }
    return comps;
}

// Walks a path-shaped component from endpoint `from`.
std::vector<NodeId> order_from(const StorageArray &storage, const Layout &layout, unsigned ns, const PortGraph &g,
                               NodeId from)
{
    std::vector<NodeId> out{from};
    NodeId prev = from, cur = from;
    bool first = true;
    while (true) {
        std::optional<NodeId> next;
        for (const auto &e : g.ports(cur))
            if (rpath_fields(storage, layout, ns, e.neighbor).in_path && (first || e.neighbor != prev)) {
                next = e.neighbor;
                break;
            }
        if (!next)
            break;
        prev = cur;
        cur = *next;
        first = false;
        out.push_back(cur);
        if (out.size() > g.node_count())
            break;
    }
    return out;
}

std::size_t induced_degree(const StorageArray &storage, const Layout &layout, unsigned ns, const PortGraph &g, NodeId v)
{
    std::size_t d = 0;
    for (const auto &e : g.ports(v))
        d += rpath_fields(storage, layout, ns, e.neighbor).in_path;
    return d;
}

} // namespace

ConsistencyReport check_consistency(const StorageArray &storage, const Layout &layout, unsigned ns,
                                    const PortGraph &g, NodeId source, NodeId target)
{
    ConsistencyReport rep;
    const std::size_t n = g.node_count();
    auto node = [](NodeId v) { return "node " + std::to_string(v); };

    // (1) target flag exactly at the expected target
    for (NodeId v = 0; v < n; ++v) {
        const bool t = rpath_fields(storage, layout, ns, v).target;
        if (t && v != target)
            rep.violations.push_back("condition 1: stray target flag at " + node(v));
        if (!t && v == target)
            rep.violations.push_back("condition 1: target flag missing at " + node(v));
    }

    // (2) every component is a path graph
    const auto comps = in_path_components(storage, layout, ns, g);
    rep.components = comps.size();
    std::vector<int> comp_of(n, -1);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        std::size_t deg_sum = 0, max_deg = 0;
        for (NodeId v : comps[i]) {
            comp_of[v] = static_cast<int>(i);
            const auto d = induced_degree(storage, layout, ns, g, v);
            deg_sum += d;
            max_deg = std::max(max_deg, d);
        }
        if (deg_sum != 2 * (comps[i].size() - 1) || max_deg > 2)
            rep.violations.push_back("condition 2: component containing " + node(comps[i].front()) +
                                     " is not a path");
    }
    if (comp_of[source] < 0)
        rep.violations.push_back("source " + node(source) + " is not in the path");
    if (comp_of[target] < 0)
        rep.violations.push_back("target " + node(target) + " is not in the path");

    // (3) direction bits on components touching s or t
    if (rep.violations.empty()) {
        auto check_dirs = [&](const std::vector<NodeId> &seq) {
            for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
                const NodeId v = seq[i];
                const Port pb = *g.port_to(v, seq[i - 1]);
                const Port pf = *g.port_to(v, seq[i + 1]);
                if (rpath_fields(storage, layout, ns, v).direction != (pb > pf))
                    rep.violations.push_back("condition 3: direction bit wrong at " + node(v));
            }
        };
        auto endpoint = [&](NodeId v) { return induced_degree(storage, layout, ns, g, v) <= 1; };
        if (!endpoint(source))
            rep.violations.push_back("source " + node(source) + " is not a path endpoint");
        else
            check_dirs(order_from(storage, layout, ns, g, source));
        if (comp_of[target] != comp_of[source]) {
            if (!endpoint(target)) {
                rep.violations.push_back("target " + node(target) + " is not a path endpoint");
            } else {
                auto seq = order_from(storage, layout, ns, g, target);
                std::reverse(seq.begin(), seq.end());
                check_dirs(seq);
            }
        } else if (source != target && !endpoint(target)) {
            rep.violations.push_back("target " + node(target) + " is not a path endpoint");
        }
    }

    if (!rep.violations.empty())
        rep.level = Consistency::Violation;
    else
        rep.level = rep.components == 1 ? Consistency::Strong : Consistency::Consistent;
    return rep;
}

std::optional<std::vector<NodeId>> extract_path(const StorageArray &storage, const Layout &layout, unsigned ns,
                                                const PortGraph &g, NodeId source)
{
    if (!rpath_fields(storage, layout, ns, source).in_path || induced_degree(storage, layout, ns, g, source) > 1)
        return std::nullopt;
    auto seq = order_from(storage, layout, ns, g, source);
    for (NodeId v : seq)
        if (induced_degree(storage, layout, ns, g, v) > 2)
            return std::nullopt;
    return seq;
}

std::optional<NodeId> ShadowPath::modify_move(const PortGraph &g, NodeId t2)
{
    if (nodes_.size() >= 2 && nodes_[nodes_.size() - 2] == t2) {
        nodes_.pop_back();
        return std::nullopt;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (g.port_to(nodes_[i], t2)) {
            const NodeId u = nodes_[i];
            nodes_.resize(i + 1);
            nodes_.push_back(t2);
            return u;
        }
    throw std::logic_error("new target is not adjacent to the path");
}

std::vector<std::vector<NodeId>> head_paths(const PortGraph &g, NodeId root)
{
    const auto oracle = oracle_lexdfs(g, root);
    std::vector<std::vector<NodeId>> out;
    ShadowPath x(root);
    out.push_back(x.nodes());
    // Replay the head walk: forward along tree edges in preorder, backtrack
    // to the parent when a subtree is exhausted.
    std::vector<NodeId> stack{root};
    for (std::size_t i = 1; i < oracle.preorder.size(); ++i) {
        const NodeId v = oracle.preorder[i];
        const NodeId p = oracle.parent[v];
        while (stack.back() != p) {
            stack.pop_back();
            x.modify_move(g, stack.back());
        }
        x.modify_move(g, v);
        stack.push_back(v);
        out.push_back(x.nodes());
    }
    return out;
}

namespace {

struct ShadowOp {
    enum Kind { Init, Top, Hop, Target, Bounce, Modify, Delete, Copy, Succ, Pred } kind;
    static constexpr const char *kNames[] = {"init",   "move_to_top", "move_one_hop", "move_target",      "bounce",
                                             "modify", "delete",      "copy",         "modify_successor", "modify_predecessor"};
    unsigned ns = 0;
    unsigned ns2 = 0;
    std::uint32_t port = 0;
};

} // namespace

RpathFuzzReport fuzz_rpath(std::span<const PortGraph> graphs, const RpathFuzzConfig &cfg)
{
    RpathFuzzReport rep;
    const auto setup = rpath_setup(2);
    std::mt19937_64 rng(cfg.seed);

    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const PortGraph &g = graphs[gi];
        const std::size_t n = g.node_count();
        ++rep.graphs;
        const bool neighbor_ops = n <= cfg.neighbor_ops_max_n;

        for (std::size_t seq = 0; seq < cfg.sequences_per_graph; ++seq) {
            ++rep.sequences;
            const NodeId s = static_cast<NodeId>(rng() % n);
            const auto preorder = oracle_lexdfs(g, s).preorder;
            std::vector<std::size_t> rank(n);
            for (std::size_t i = 0; i < n; ++i)
                rank[preorder[i]] = i;
            const auto hpaths = head_paths(g, s);

            std::vector<ScriptOp> ops;
            std::vector<ShadowOp> sops;
            auto push = [&](ScriptOp op, ShadowOp sop) {
                ops.push_back(op);
                sops.push_back(sop);
            };
            push(rp_init(0), {ShadowOp::Init, 0});
            push(rp_init(1), {ShadowOp::Init, 1});
            unsigned cur = 0;
            const std::size_t count = 1 + rng() % cfg.max_ops;
            for (std::size_t k = 0; k < count; ++k) {
                const unsigned i = static_cast<unsigned>(rng() % 2);
                const unsigned choice = static_cast<unsigned>(rng() % (neighbor_ops ? 10 : 8));
                if (cur != i) {
                    push(rp_move_to_top(cur), {ShadowOp::Top, cur});
                    cur = i;
                }
                switch (choice) {
                case 0:
                    push(rp_move_to_top(i), {ShadowOp::Top, i});
                    break;
                case 1:
                    push(ScriptOp::call_unless_target(i, Proc::RpMoveOneHop, regs::ns(i)),
                         {ShadowOp::Hop, i});
                    break;
                case 2:
                    push(rp_move_target(i), {ShadowOp::Target, i});
                    break;
                case 3:
                case 4:
                case 5: {
                    const auto port = static_cast<std::uint32_t>(rng() % 64);
                    push(rp_move_target(i), {ShadowOp::Target, i});
                    push(ScriptOp::bounce(port), {ShadowOp::Bounce, i, 0, port});
                    push(rp_modify_move(i), {ShadowOp::Modify, i});
                    break;
                }
                case 6:
                    push(rp_delete(i), {ShadowOp::Delete, i});
                    break;
                case 7:
                    push(rp_copy(i, 1 - i), {ShadowOp::Copy, i, 1 - i});
                    break;
                case 8:
                    push(rp_modify_successor(i), {ShadowOp::Succ, i});
                    break;
                default:
                    push(rp_modify_predecessor(i), {ShadowOp::Pred, i});
                    break;
                }
            }

            ScriptProgram prog("rpath-fuzz", setup.schema, setup.layout, ops, 12);
            Runner runner(prog, g, s);
            std::array<ShadowPath, 2> shadow{ShadowPath(s), ShadowPath(s)};
            std::array<bool, 2> live{};
            NodeId pos = s;
            std::optional<NodeId> pending;
            EventSink ev;
            bool injected = false;
            bool failed = false;
            std::size_t op_index = 0;
            auto fail = [&](const std::string &msg) {
                std::string where = "graph " + std::to_string(gi) + " seq " + std::to_string(seq) + " op " +
                                    std::to_string(op_index) + " (" + ShadowOp::kNames[sops[op_index].kind] + " on " +
                                    std::to_string(sops[op_index].ns) + "): ";
                rep.violations.push_back(where + msg);
                failed = true;
            };

            ev.listener = [&](const Event &e) {
                    if (failed)
                        return;
                    if (e.kind == events::kBranching) {
                        const unsigned ns = static_cast<unsigned>(e.value >> 2);
                        const unsigned color = static_cast<unsigned>(e.value & 3);
                        const NodeId u = runner.node();
                        const auto path = extract_path(runner.storage(), setup.layout, ns, g, s);
                        std::optional<NodeId> yellow;
                        for (NodeId v = 0; v < n; ++v)
                            if (rpath_fields(runner.storage(), setup.layout, ns, v).color == rpf::Yellow)
                                yellow = v;
                        if (!path || !yellow) {
                            fail("branching check: path or yellow node not recoverable");
                            return;
                        }
                        const auto it = std::find(path->begin(), path->end(), u);
                        if (it == path->end()) {
                            fail("branching node off the path");
                            return;
                        }
                        if (it != path->begin()) {
                            ++rep.branching_checks;
                            const bool want_red = *g.port_to(u, *yellow) < *g.port_to(u, *(it - 1));
                            if (want_red != (color == rpf::Red))
                                fail("branching node " + std::to_string(u) + " colored " +
                                     (color == rpf::Red ? "red" : "blue"));
                        }
                    }
                    if (e.kind != events::kRpathOp)
                        return;
                    op_index = static_cast<std::size_t>(e.value);
                    const auto &sop = sops[op_index];
                    ++rep.operations;
                    auto &sh = shadow[sop.ns];
                    switch (sop.kind) {
                    case ShadowOp::Init:
                        live[sop.ns] = true;
                        break;
                    case ShadowOp::Top:
                        pos = s;
                        break;
                    case ShadowOp::Hop:
                        if (pos != sh.target()) {
                            const auto it = std::find(sh.nodes().begin(), sh.nodes().end(), pos);
                            pos = *(it + 1);
                        }
                        break;
                    case ShadowOp::Target:
                        pos = sh.target();
                        break;
                    case ShadowOp::Bounce:
                        pending = g.degree(pos) ? std::optional<NodeId>(g.at(pos, static_cast<Port>(
                                                                                      sop.port % g.degree(pos)))
                                                                              .neighbor)
                                                : std::nullopt;
                        break;
                    case ShadowOp::Modify:
                        if (pending) {
                            sh.modify_move(g, *pending);
                            pos = *pending;
                        }
                        break;
                    case ShadowOp::Delete:
                        sh.reset();
                        pos = s;
                        break;
                    case ShadowOp::Copy:
                        shadow[sop.ns2].assign(sh.nodes());
                        pos = sh.target();
                        break;
                    case ShadowOp::Succ:
                    case ShadowOp::Pred: {
                        const std::size_t r = rank[sh.target()];
                        if (sop.kind == ShadowOp::Succ && r + 1 < n)
                            sh.assign(hpaths[r + 1]);
                        if (sop.kind == ShadowOp::Pred && r > 0)
                            sh.assign(hpaths[r - 1]);
                        pos = s;
                        for (NodeId v = 0; v < n; ++v) {
                            const auto d = runner.storage().get(v, setup.layout.dfs, 3);
                            const auto x = runner.storage().get(v, setup.layout.rp[2], 5);
                            const auto xa = runner.storage().get(v, setup.layout.rp[3], 5);
                            if (d || x || xa) {
                                fail("DFS residue at node " + std::to_string(v));
                                break;
                            }
                        }
                        break;
                    }
                    }
                    if (failed)
                        return;
                    if (sop.kind == ShadowOp::Modify && !pending)
                        return;
                    if (runner.node() != pos) {
                        fail("agent at node " + std::to_string(runner.node()) + ", expected " + std::to_string(pos));
                        return;
                    }
                    if (cfg.inject_fault && !injected && shadow[0].nodes().size() >= 3) {
                        const NodeId v = shadow[0].nodes()[1];
                        auto view = runner.storage().at(v);
                        view.set_bit(setup.layout.rp[0] + rpf::kDirection,
                                     !view.bit(setup.layout.rp[0] + rpf::kDirection));
                        injected = true;
                    }
                    for (unsigned j = 0; j < 2 && !failed; ++j) {
                        if (!live[j])
                            continue;
                        const auto cr = check_consistency(runner.storage(), setup.layout, j, g, s,
                                                          shadow[j].target());
                        if (!cr.strong()) {
                            fail("instance " + std::to_string(j) + " not strongly consistent: " +
                                 (cr.violations.empty() ? std::string("several components")
                                                        : cr.violations.front()));
                            break;
                        }
                        std::set<NodeId> have, want(shadow[j].nodes().begin(), shadow[j].nodes().end());
                        for (NodeId v = 0; v < n; ++v)
                            if (rpath_fields(runner.storage(), setup.layout, j, v).in_path)
                                have.insert(v);
                        if (have != want)
                            fail("instance " + std::to_string(j) + " in-path set differs from the shadow model");
                    }
            };
            try {
                while (!failed && !runner.halted()) {
                    runner.step(&ev);
                    ev.clear();
                }
            } catch (const std::exception &e) {
                fail(std::string("run error: ") + e.what());
            }
            rep.moves += runner.moves();
        }
    }
    return rep;
}

} // namespace agentsim
