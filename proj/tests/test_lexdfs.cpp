#include "agentsim/graph.hpp"
#include "agentsim/lexdfs.hpp"

#include <gtest/gtest.h>

using namespace agentsim;

TEST(Oracle, TriangleAndPath)
{
    const auto tri = generate({Family::Complete, 3, {}, 0});
    EXPECT_EQ(oracle_lexdfs(tri, 0).preorder, (std::vector<NodeId>{0, 1, 2}));
    const auto path = generate({Family::Path, 4, {}, 0});
    EXPECT_EQ(oracle_lexdfs(path, 2).preorder, (std::vector<NodeId>{2, 1, 0, 3}));
    const auto r = oracle_lexdfs(tri, 0);
    EXPECT_EQ(r.parent[2], 1u);
    EXPECT_EQ(tree_path(r, 2), (std::vector<NodeId>{0, 1, 2}));
}

TEST(Oracle, PortOrderMatters)
{
    // star center 0 with ports reversed: leaves visited from the highest id
    const PortGraph g({{{3, 0}, {2, 0}, {1, 0}}, {{0, 2}}, {{0, 1}}, {{0, 0}}});
    ASSERT_TRUE(validate(g).ok());
    EXPECT_EQ(oracle_lexdfs(g, 0).preorder, (std::vector<NodeId>{0, 3, 2, 1}));
}

TEST(Lemma1, HoldsOnSmallGraphs)
{
    for (std::size_t n = 1; n <= 5; ++n)
        for (const auto &g : connected_graphs(n, false))
            for (NodeId r = 0; r < n; ++r)
                EXPECT_TRUE(check_lemma1(g, r).empty());
}

TEST(Lemma1, DetectsNonLexTree)
{
    // triangle: claim 2's parent is 0, which skips the smaller-port exit at 0
    const auto tri = generate({Family::Complete, 3, {}, 0});
    LexDfsOracleResult bad;
    bad.preorder = {0, 1, 2};
    bad.parent = {kNoParent, 0, 1};
    EXPECT_TRUE(check_lemma1(tri, 0, bad).empty());
    bad.parent = {kNoParent, 2, 0};
    bad.preorder = {0, 2, 1};
    EXPECT_FALSE(check_lemma1(tri, 0, bad).empty());
}

TEST(Dldfs, SingleNodeAndK2)
{
    const PortGraph one(std::vector<std::vector<PortEntry>>(1));
    const auto r1 = run_dldfs(one, 0);
    EXPECT_EQ(r1.visit_order, (std::vector<NodeId>{0}));
    EXPECT_TRUE(r1.trace.summary.halted);
    const auto k2 = generate({Family::Path, 2, {}, 0});
    EXPECT_EQ(run_dldfs(k2, 1).visit_order, (std::vector<NodeId>{1, 0}));
}

TEST(Dldfs, MatchesOracleAndGreyInvariant)
{
    for (std::size_t n = 1; n <= 5; ++n)
        for (const auto &g : connected_graphs(n, true))
            for (NodeId r = 0; r < n; ++r) {
                const auto run = run_dldfs(g, r, true, true);
                EXPECT_EQ(run.visit_order, oracle_lexdfs(g, r).preorder);
                EXPECT_TRUE(run.violations.empty()) << run.violations.front();
                EXPECT_TRUE(run.trace.summary.halted);
            }
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto g = generate({Family::RandomConnected, 10 + s, 5, s});
        const auto run = run_dldfs(g, static_cast<NodeId>(s % g.node_count()), true, true);
        EXPECT_EQ(run.visit_order, oracle_lexdfs(g, static_cast<NodeId>(s % g.node_count())).preorder);
        EXPECT_TRUE(run.violations.empty());
    }
}

TEST(Dldfs, ResetLeavesZeroStorage)
{
    const auto g = generate({Family::RandomConnected, 24, 4, 9});
    const auto with = run_dldfs(g, 3, true);
    EXPECT_EQ(with.trace.summary.final_node, 3u);
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (auto w : with.trace.storage.record(v))
            EXPECT_EQ(w, 0u) << "node " << v;

    const auto without = run_dldfs(g, 3, false);
    const auto L = dfs_setup().layout;
    for (NodeId v = 0; v < g.node_count(); ++v)
        EXPECT_EQ(without.trace.storage.get(v, L.dfs, 2), dfsc::Black);
}

TEST(Parity, SmallCases)
{
    const ParityProgram p;
    const auto L = dfs_setup(true).layout;
    const PortGraph one(std::vector<std::vector<PortEntry>>(1));
    auto t = run(p, one, 0);
    EXPECT_EQ(t.storage.get(t.summary.final_node, L.out, 1), 1u);
    t = run(p, generate({Family::Path, 2, {}, 0}), 0);
    EXPECT_EQ(t.storage.get(t.summary.final_node, L.out, 1), 0u);
    for (std::size_t n = 3; n <= 12; ++n) {
        t = run(p, generate({Family::RandomConnected, n, 4, n}), 0);
        EXPECT_EQ(t.storage.get(t.summary.final_node, L.out, 1), n % 2);
    }
}
