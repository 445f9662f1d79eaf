#include "agentsim/graph.hpp"
#include "agentsim/lexdfs.hpp"
#include "agentsim/rpath.hpp"

#include <gtest/gtest.h>

using namespace agentsim;

namespace {


// Runs a script and records the agent position after every op.
std::vector<NodeId> drive(const PortGraph &g, NodeId start, std::vector<ScriptOp> ops, StorageArray *final_storage,
                          const RpathSetup &setup)
{
    ScriptProgram prog("test", setup.schema, setup.layout, std::move(ops), 12);
    Runner r(prog, g, start);
    EventSink ev;
    std::vector<NodeId> pos;
    ev.listener = [&](const Event &e) {
        if (e.kind == events::kRpathOp)
            pos.push_back(r.node());
    };
    while (!r.halted()) {
        r.step(&ev);
        ev.clear();
    }
    if (final_storage)
        *final_storage = r.storage();
    return pos;
}

std::vector<NodeId> in_path(const StorageArray &st, const Layout &L, unsigned ns, std::size_t n)
{
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v)
        if (rpath_fields(st, L, ns, v).in_path)
            out.push_back(v);
    return out;
}

NodeId target_of(const StorageArray &st, const Layout &L, unsigned ns, std::size_t n)
{
    for (NodeId v = 0; v < n; ++v)
        if (rpath_fields(st, L, ns, v).target)
            return v;
    return kNoParent;
}

} // namespace

TEST(Rpath, InitOnK2)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::Path, 2, {}, 0});
    StorageArray st;
    const auto pos = drive(g, 0, {rp_init(0), rp_move_to_top(0)}, &st, setup);
    ASSERT_EQ(pos.size(), 2u);
    EXPECT_EQ(pos[1], 0u);
    EXPECT_TRUE(rpath_fields(st, setup.layout, 0, 0).target);
    EXPECT_TRUE(rpath_fields(st, setup.layout, 0, 0).in_path);
    EXPECT_FALSE(rpath_fields(st, setup.layout, 0, 1).in_path);
    EXPECT_FALSE(rpath_fields(st, setup.layout, 0, 1).target);
    EXPECT_TRUE(check_consistency(st, setup.layout, 0, g, 0, 0).strong());
}

TEST(Rpath, ExtendThenShortcut)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::Path, 3, {}, 0});
    StorageArray st;
    // 0 -> 1 -> 2, then back to 1 drops the tail edge
    const auto pos = drive(g, 0,
                           {rp_init(0), ScriptOp::bounce(0), rp_modify_move(0), ScriptOp::bounce(1), rp_modify_move(0),
                            rp_move_to_top(0), rp_move_one_hop(0), rp_move_target(0), ScriptOp::bounce(0),
                            rp_modify_move(0)},
                           &st, setup);
    ASSERT_EQ(pos.size(), 10u);
    EXPECT_EQ(pos[2], 1u);
    EXPECT_EQ(pos[4], 2u);
    EXPECT_EQ(pos[5], 0u);
    EXPECT_EQ(pos[6], 1u);
    EXPECT_EQ(pos[7], 2u);
    EXPECT_EQ(pos[9], 1u);
    EXPECT_EQ(in_path(st, setup.layout, 0, 3), (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(target_of(st, setup.layout, 0, 3), 1u);
    EXPECT_TRUE(check_consistency(st, setup.layout, 0, g, 0, 1).strong());
}

TEST(Rpath, TriangleBranchAtSource)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::Complete, 3, {}, 0});
    StorageArray st;
    // path 0-1 (port 0 at node 0), then from 1 step to 2 (port 1): branch at 0
    const auto pos = drive(g, 0, {rp_init(0), ScriptOp::bounce(0), rp_modify_move(0), ScriptOp::bounce(1),
                                  rp_modify_move(0)},
                           &st, setup);
    EXPECT_EQ(pos.back(), 2u);
    EXPECT_EQ(in_path(st, setup.layout, 0, 3), (std::vector<NodeId>{0, 2}));
    EXPECT_EQ(target_of(st, setup.layout, 0, 3), 2u);
    EXPECT_TRUE(check_consistency(st, setup.layout, 0, g, 0, 2).strong());
    for (NodeId v = 0; v < 3; ++v)
        EXPECT_EQ(rpath_fields(st, setup.layout, 0, v).color, rpf::White);
}

TEST(Rpath, DeleteAndCopy)
{
    const auto setup = rpath_setup(2);
    const auto g = generate({Family::Path, 4, {}, 0});
    StorageArray st;
    const auto pos = drive(g, 0,
                           {rp_init(0), rp_init(1), ScriptOp::bounce(0), rp_modify_move(0), ScriptOp::bounce(1),
                            rp_modify_move(0), rp_copy(0, 1), rp_move_to_top(1), rp_delete(0)},
                           &st, setup);
    EXPECT_EQ(pos[6], 2u);
    EXPECT_EQ(pos.back(), 0u);
    EXPECT_EQ(in_path(st, setup.layout, 0, 4), (std::vector<NodeId>{0}));
    EXPECT_EQ(in_path(st, setup.layout, 1, 4), (std::vector<NodeId>{0, 1, 2}));
    EXPECT_TRUE(check_consistency(st, setup.layout, 1, g, 0, 2).strong());
    EXPECT_TRUE(check_consistency(st, setup.layout, 0, g, 0, 0).strong());
}

TEST(Rpath, ConsistencyCheckerRejects)
{
    const auto setup = rpath_setup(1);
    const auto tri = generate({Family::Complete, 3, {}, 0});
    StorageArray st(3, setup.schema.total_bits());
    for (NodeId v = 0; v < 3; ++v)
        st.at(v).set_bit(setup.layout.rp[0] + rpf::kInPath, true);
    st.at(2).set_bit(setup.layout.rp[0] + rpf::kTarget, true);
    const auto r = check_consistency(st, setup.layout, 0, tri, 0, 2);
    EXPECT_EQ(r.level, Consistency::Violation);
    ASSERT_FALSE(r.violations.empty());
    EXPECT_NE(r.violations.front().find("condition 2"), std::string::npos);

    const auto p = generate({Family::Path, 3, {}, 0});
    StorageArray ps(3, setup.schema.total_bits());
    for (NodeId v = 0; v < 3; ++v)
        ps.at(v).set_bit(setup.layout.rp[0] + rpf::kInPath, true);
    ps.at(2).set_bit(setup.layout.rp[0] + rpf::kTarget, true);
    EXPECT_TRUE(check_consistency(ps, setup.layout, 0, p, 0, 2).strong());
    // node 1: back port 0 < fwd port 1, so the bit must stay clear
    ps.at(1).set_bit(setup.layout.rp[0] + rpf::kDirection, true);
    const auto r3 = check_consistency(ps, setup.layout, 0, p, 0, 2);
    ASSERT_FALSE(r3.violations.empty());
    EXPECT_NE(r3.violations.front().find("condition 3"), std::string::npos);
}

TEST(Rpath, SuccessorOnTriangle)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::Complete, 3, {}, 0});
    StorageArray st;
    drive(g, 0, {rp_init(0), rp_modify_successor(0)}, &st, setup);
    EXPECT_EQ(target_of(st, setup.layout, 0, 3), 1u);
}

TEST(Rpath, SuccessorWalkIsPreorder)
{
    const auto setup = rpath_setup(1);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto g = generate({Family::RandomConnected, 7 + seed, 4, seed});
        const auto pre = oracle_lexdfs(g, 0).preorder;
        std::vector<ScriptOp> ops{rp_init(0)};
        for (std::size_t i = 0; i + 1 < g.node_count(); ++i) {
            ops.push_back(rp_modify_successor(0));
            ops.push_back(rp_move_target(0));
        }
        const auto pos = drive(g, 0, ops, nullptr, setup);
        ASSERT_EQ(pos.size(), ops.size());
        for (std::size_t i = 1; i < g.node_count(); ++i)
            EXPECT_EQ(pos[2 * i], pre[i]) << "seed " << seed << " step " << i;
    }
}

TEST(Rpath, SuccessorThenPredecessorIsIdentity)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::RandomConnected, 9, 3, 4});
    const auto pre = oracle_lexdfs(g, 2).preorder;
    for (std::size_t k = 0; k + 1 < pre.size(); ++k) {
        std::vector<ScriptOp> ops{rp_init(0)};
        for (std::size_t i = 0; i < k; ++i)
            ops.push_back(rp_modify_successor(0));
        ops.push_back(rp_modify_successor(0));
        ops.push_back(rp_modify_predecessor(0));
        ops.push_back(rp_move_target(0));
        StorageArray st;
        const auto pos = drive(g, 2, ops, &st, setup);
        EXPECT_EQ(pos.back(), pre[k]);
        EXPECT_TRUE(check_consistency(st, setup.layout, 0, g, 2, pre[k]).strong());
    }
}

TEST(Rpath, OutOfRangeNeighborsAreNoOps)
{
    const auto setup = rpath_setup(1);
    const auto g = generate({Family::Path, 3, {}, 0});
    StorageArray st;
    drive(g, 0, {rp_init(0), rp_modify_predecessor(0)}, &st, setup);
    EXPECT_EQ(target_of(st, setup.layout, 0, 3), 0u);
    drive(g, 0, {rp_init(0), rp_modify_successor(0), rp_modify_successor(0), rp_modify_successor(0)}, &st, setup);
    EXPECT_EQ(target_of(st, setup.layout, 0, 3), 2u);
}

TEST(RpathFuzz, SmallCorpusClean)
{
    std::vector<PortGraph> gs;
    for (std::uint64_t s = 1; s <= 6; ++s)
        gs.push_back(generate({Family::RandomConnected, 4 + 2 * s, 4, s}));
    gs.push_back(generate({Family::Complete, 5, {}, 0}));
    gs.push_back(generate({Family::Star, 6, {}, 0}));
    RpathFuzzConfig cfg;
    cfg.sequences_per_graph = 15;
    const auto r = fuzz_rpath(gs, cfg);
    EXPECT_TRUE(r.ok()) << r.violations.front();
    EXPECT_EQ(r.sequences, gs.size() * 15);
    EXPECT_GT(r.branching_checks, 0u);
}

TEST(RpathFuzz, InjectedFaultDetected)
{
    std::vector<PortGraph> gs{generate({Family::Path, 6, {}, 0}), generate({Family::Cycle, 7, {}, 0})};
    RpathFuzzConfig cfg;
    cfg.sequences_per_graph = 30;
    cfg.inject_fault = true;
    const auto r = fuzz_rpath(gs, cfg);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.violations.front().find("condition 3"), std::string::npos) << r.violations.front();
}
