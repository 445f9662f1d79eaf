#include "agentsim/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace agentsim;

namespace {

PortGraph from_edges(std::size_t n, std::vector<std::pair<NodeId, NodeId>> e) { return canonical_graph(n, e); }

bool has_message(const ValidityReport &r, const std::string &needle)
{
    return std::any_of(r.violations.begin(), r.violations.end(),
                       [&](const Violation &v) { return v.message.find(needle) != std::string::npos; });
}

void expect_symmetric(const PortGraph &g)
{
    for (NodeId v = 0; v < g.node_count(); ++v) {
        std::vector<bool> used(g.degree(v), false);
        for (Port p = 0; p < g.degree(v); ++p) {
            const auto &e = g.at(v, p);
            ASSERT_LT(e.reverse, g.degree(e.neighbor));
            EXPECT_EQ(g.at(e.neighbor, e.reverse).neighbor, v);
            EXPECT_EQ(g.at(e.neighbor, e.reverse).reverse, p);
            used[p] = true;
        }
        EXPECT_TRUE(std::all_of(used.begin(), used.end(), [](bool b) { return b; }));
    }
}

} // namespace

TEST(Validate, SingleEdgeIsValid)
{
    const auto g = from_edges(2, {{0, 1}});
    EXPECT_TRUE(validate(g).ok());
    EXPECT_EQ(g.at(0, 0).reverse, 0);
}

TEST(Validate, SelfLoopReported)
{
    PortGraph g({{{1, 0}, {0, 2}, {0, 1}}, {{0, 0}}});
    const auto r = validate(g);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_message(r, "self-loop at node 0")) << r.summary();
}

TEST(Validate, DisjointEdgesDisconnected)
{
    const PortGraph g({{{1, 0}}, {{0, 0}}, {{3, 0}}, {{2, 0}}});
    const auto r = validate(g);
    EXPECT_TRUE(has_message(r, "disconnected")) << r.summary();
}

TEST(Validate, SingleNodeAllowed)
{
    const PortGraph g(std::vector<std::vector<PortEntry>>(1));
    EXPECT_TRUE(validate(g).ok());
}

TEST(Generate, CanonicalPath)
{
    const auto g = generate({Family::Path, 3, {}, 0});
    ASSERT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.port_to(0, 1), 0);
    EXPECT_EQ(g.port_to(1, 0), 0);
    EXPECT_EQ(g.port_to(1, 2), 1);
    EXPECT_EQ(g.port_to(2, 1), 0);
}

TEST(Generate, TriangleRanksNeighbors)
{
    const auto g = generate({Family::Complete, 3, {}, 0});
    EXPECT_EQ(g.port_to(0, 1), 0);
    EXPECT_EQ(g.port_to(0, 2), 1);
    EXPECT_EQ(g.port_to(1, 0), 0);
    EXPECT_EQ(g.port_to(1, 2), 1);
    EXPECT_EQ(g.port_to(2, 0), 0);
    EXPECT_EQ(g.port_to(2, 1), 1);
}

TEST(Generate, RandomIsDeterministic)
{
    const GraphFamilySpec s{Family::RandomConnected, 20, 4, 7};
    const auto a = generate(s);
    const auto b = generate(s);
    EXPECT_EQ(a, b);
    EXPECT_LE(a.max_degree(), 4);
    EXPECT_TRUE(validate(a).ok());
    EXPECT_NE(a, generate({Family::RandomConnected, 20, 4, 8}));
}

TEST(Generate, AllFamiliesSymmetric)
{
    for (auto fam : {Family::Path, Family::Cycle, Family::Star, Family::Complete, Family::RandomTree,
                     Family::RandomConnected})
        for (std::size_t n : {3u, 5u, 9u, 17u})
            for (std::uint64_t seed : {1u, 2u}) {
                const auto g = generate({fam, n, {}, seed});
                EXPECT_EQ(g.node_count(), n);
                EXPECT_TRUE(validate(g).ok()) << family_name(fam) << " n=" << n;
                expect_symmetric(g);
            }
}

TEST(Generate, InfeasibleSpecs)
{
    EXPECT_THROW(generate({Family::Cycle, 2, {}, 0}), InfeasibleSpec);
    EXPECT_THROW(generate({Family::RandomTree, 10, 1, 0}), InfeasibleSpec);
    EXPECT_THROW(generate({Family::Star, 6, 3, 0}), InfeasibleSpec);
    EXPECT_THROW(generate({Family::Path, 0, {}, 0}), InfeasibleSpec);
}

TEST(Generate, FamilyNamesRoundTrip)
{
    for (auto fam : {Family::Path, Family::Cycle, Family::Star, Family::Complete, Family::RandomTree,
                     Family::RandomConnected})
        EXPECT_EQ(parse_family(family_name(fam)), fam);
    EXPECT_THROW(parse_family("hypercube"), std::invalid_argument);
}

TEST(PgFile, RoundTrip)
{
    for (const auto &g : {from_edges(2, {{0, 1}}), generate({Family::RandomConnected, 12, 5, 3}),
                          PortGraph(std::vector<std::vector<PortEntry>>(1))}) {
        std::stringstream ss;
        write_pg(ss, g);
        EXPECT_EQ(read_pg(ss), g);
    }
}

TEST(PgFile, DuplicatePortRejected)
{
    std::istringstream in("pg 1\n3 2\n0 0 1 0\n0 0 2 0\n");
    EXPECT_ANY_THROW(read_pg(in));
}

TEST(PgFile, MismatchedReverseRejected)
{
    // node 1 uses port 1 for its only edge
    std::istringstream in("pg 1\n2 1\n0 0 1 1\n");
    EXPECT_ANY_THROW(read_pg(in));
}

TEST(PgFile, ParseErrorsCarryLine)
{
    std::istringstream bad_header("graph\n");
    try {
        read_pg(bad_header);
        FAIL();
    } catch (const GraphParseError &e) {
        EXPECT_EQ(e.line(), 1u);
    }
    std::istringstream bad_edge("pg 1\n2 1\n1 0 0 0\n");
    try {
        read_pg(bad_edge);
        FAIL();
    } catch (const GraphParseError &e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Enumeration, KnownCounts)
{
    // connected graphs up to isomorphism: 1, 1, 2, 6, 21, 112
    const std::size_t iso[] = {0, 1, 1, 2, 6, 21, 112};
    for (std::size_t n = 1; n <= 6; ++n)
        EXPECT_EQ(connected_graphs(n, true).size(), iso[n]) << n;
    // labelled connected graphs: 1, 1, 4, 38, 728
    EXPECT_EQ(connected_graphs(3, false).size(), 4u);
    EXPECT_EQ(connected_graphs(4, false).size(), 38u);
    EXPECT_EQ(connected_graphs(5, false).size(), 728u);
}

TEST(Relabel, PreservesStructure)
{
    const auto g = generate({Family::RandomConnected, 8, {}, 11});
    const std::vector<NodeId> perm{3, 1, 7, 0, 2, 6, 5, 4};
    const auto h = relabel(g, perm);
    EXPECT_TRUE(validate(h).ok());
    for (NodeId v = 0; v < 8; ++v)
        for (Port p = 0; p < g.degree(v); ++p)
            EXPECT_EQ(h.at(perm[v], p).neighbor, perm[g.at(v, p).neighbor]);
}
