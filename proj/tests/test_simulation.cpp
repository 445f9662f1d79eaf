#include "agentsim/simulation.hpp"

#include <gtest/gtest.h>

using namespace agentsim;

namespace {

// Port 0 always leads clockwise.
PortGraph oriented_cycle(std::size_t n)
{
    std::vector<std::vector<PortEntry>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        adj[i] = {{static_cast<NodeId>((i + 1) % n), 1}, {static_cast<NodeId>((i + n - 1) % n), 0}};
    return PortGraph(std::move(adj));
}

std::string joined(const std::vector<std::string> &v)
{
    std::string s;
    for (const auto &x : v)
        s += x + "\n";
    return s;
}

SimRun direct_tm(const std::string &name, const PortGraph &g, NodeId start, std::uint64_t steps, unsigned k = 1)
{
    const TmAgentProgram p(sample_machine(name), sample_storage_bits(name), g.node_count() * k);
    return run_direct(p, g, start, steps);
}

} // namespace

TEST(TmAgent, BouncerOnK2)
{
    const auto k2 = generate({Family::Path, 2, {}, 0});
    const auto r = direct_tm("bouncer", k2, 0, 5);
    EXPECT_EQ(r.locations, (std::vector<NodeId>{0, 1, 0, 1, 0, 1}));
    EXPECT_FALSE(r.halted);
}

TEST(SimConst, BouncerOnK2)
{
    const auto k2 = generate({Family::Path, 2, {}, 0});
    SimOptions o;
    o.max_sim_steps = 6;
    const auto r = sim_const(bouncer_machine(), 0, k2, 0, o);
    EXPECT_TRUE(r.ok()) << joined(r.violations);
    EXPECT_EQ(r.simulated_steps, 6u);
    EXPECT_EQ(r.locations, (std::vector<NodeId>{0, 1, 0, 1, 0, 1, 0}));
    EXPECT_EQ(r.locations, direct_tm("bouncer", k2, 0, 6).locations);
}

TEST(SimConst, PortZeroWalkerOnOrientedC4)
{
    const auto c4 = oriented_cycle(4);
    ASSERT_TRUE(validate(c4).ok());
    const auto r = sim_const(port_zero_walker_machine(), 1, c4, 0);
    EXPECT_TRUE(r.ok()) << joined(r.violations);
    EXPECT_TRUE(r.halted);
    EXPECT_EQ(r.locations, (std::vector<NodeId>{0, 1, 2, 3, 0}));
    EXPECT_EQ(r.storages, (std::vector<std::uint64_t>{1, 1, 1, 1}));
}

TEST(SimConst, PortZeroWalkerOnPath)
{
    const auto p4 = generate({Family::Path, 4, {}, 0});
    for (NodeId s = 0; s < 4; ++s) {
        const auto r = sim_const(port_zero_walker_machine(), 1, p4, s);
        const auto d = direct_tm("port-zero-walker", p4, s, 20);
        EXPECT_TRUE(r.ok()) << joined(r.violations);
        EXPECT_TRUE(r.halted);
        EXPECT_EQ(r.locations, d.locations);
        EXPECT_EQ(r.storages, d.storages);
    }
}

TEST(SimConst, RotorWalkerOnTriangle)
{
    const auto tri = generate({Family::Complete, 3, {}, 0});
    SimOptions o;
    o.max_sim_steps = 6;
    const auto r = sim_const(rotor_walker_machine(), 0, tri, 0, o);
    EXPECT_TRUE(r.ok()) << joined(r.violations);
    EXPECT_EQ(r.locations, direct_tm("rotor-walker", tri, 0, 6).locations);
    EXPECT_GT(r.tm_steps, 6u);
}

TEST(SimConst, TwoCellsPerNode)
{
    const auto star = generate({Family::Star, 4, {}, 0});
    SimOptions o;
    o.max_sim_steps = 8;
    for (const auto &name : sample_machine_names()) {
        const auto r = sim_const(sample_machine(name), sample_storage_bits(name), star, 1, o, 2);
        EXPECT_TRUE(r.ok()) << name << "\n" << joined(r.violations);
        EXPECT_EQ(r.locations, direct_tm(name, star, 1, 8, 2).locations) << name;
    }
}

TEST(SimConst, MemoryIndependentOfN)
{
    std::size_t first = 0;
    for (std::size_t n : {3, 6, 12}) {
        const auto g = generate({Family::RandomConnected, n, {}, 11});
        SimOptions o;
        o.max_sim_steps = 3;
        o.check = false;
        const auto r = sim_const(rotor_walker_machine(), 0, g, 0, o);
        if (!first)
            first = r.summary.max_memory_bits;
        EXPECT_EQ(r.summary.max_memory_bits, first);
    }
}

TEST(SimConst, FaultsOnBadOutput)
{
    // always outputs port 1, which a node of K2 does not have
    MachineBuilder b;
    const auto s = b.state();
    b.on(b.start(), Cond{}, s, Writes{}.put(5, true), Moves{}.r(5));
    b.on(s, Cond{}, b.halt_state(), Writes{}.put(5, true));
    const auto k2 = generate({Family::Path, 2, {}, 0});
    const auto r = sim_const(b.build(), 0, k2, 0);
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.halted);
}

TEST(SimOneBit, InvariantsAndMoveCount)
{
    for (unsigned c : {1u, 2u, 4u, 8u})
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const auto g = generate({Family::RandomConnected, 6 + seed * 5, {}, seed});
            const auto inner = std::make_shared<const MixWalkerProgram>(c);
            OneBitOptions o;
            o.max_sim_steps = 1000;
            const auto r = sim_onebit(inner, g, 0, o);
            const auto d = run_direct(*inner, g, 0, 1000);
            EXPECT_TRUE(r.ok()) << "c=" << c << "\n" << joined(r.violations);
            EXPECT_TRUE(r.halted);
            EXPECT_EQ(r.locations, d.locations);
            EXPECT_EQ(r.storages, d.storages);
            EXPECT_EQ(r.summary.max_memory_bits, 1u);
            // c-1 departure moves fetching bits 1..c-1, then c destination
            // moves delivering bits 0..c-1.
            for (auto m : r.step_moves)
                EXPECT_EQ(m, (c - 1) + c) << "c=" << c;
        }
}

TEST(SimOneBit, NativeRotorOnTriangle)
{
    const auto tri = generate({Family::Complete, 3, {}, 0});
    const auto inner = std::make_shared<const NativeRotorProgram>(4);
    OneBitOptions o;
    o.max_sim_steps = 100;
    const auto full = sim_onebit(inner, tri, 0, o);
    const auto d = run_direct(*inner, tri, 0, 100);
    EXPECT_TRUE(full.ok()) << joined(full.violations);
    EXPECT_TRUE(full.halted);
    EXPECT_TRUE(d.halted);
    EXPECT_EQ(full.locations, d.locations);
    EXPECT_EQ(full.storages, d.storages);
    EXPECT_EQ(full.memory, d.memory);
    EXPECT_EQ(d.simulated_steps, 16u);
    EXPECT_EQ(full.simulated_steps, 16u);
}

TEST(SimOneBit, DetectsCorruptedTrans)
{
    const auto g = generate({Family::Cycle, 5, {}, 0});
    const auto inner = std::make_shared<const NativeRotorProgram>(4);
    OneBitOptions o;
    o.max_sim_steps = 12;
    o.corrupt_trans_after = 2;
    EXPECT_FALSE(sim_onebit(inner, g, 0, o).ok());
    o.corrupt_trans_after.reset();
    EXPECT_TRUE(sim_onebit(inner, g, 0, o).ok());
}

TEST(SimChain, BouncerOnK2)
{
    const auto k2 = generate({Family::Path, 2, {}, 0});
    SimOptions o;
    o.max_sim_steps = 3;
    const auto r = sim_chain(bouncer_machine(), 0, k2, 0, o);
    EXPECT_TRUE(r.ok()) << joined(r.violations);
    EXPECT_EQ(r.locations, (std::vector<NodeId>{0, 1, 0, 1}));
    EXPECT_EQ(r.summary.max_memory_bits, 1u);
}

TEST(SimChain, PortZeroWalkerOnP4)
{
    const auto p4 = generate({Family::Path, 4, {}, 0});
    const auto r = sim_chain(port_zero_walker_machine(), 1, p4, 1);
    const auto d = direct_tm("port-zero-walker", p4, 1, 20);
    EXPECT_TRUE(r.ok()) << joined(r.violations);
    EXPECT_TRUE(r.halted);
    EXPECT_EQ(r.locations, d.locations);
    EXPECT_EQ(r.storages, d.storages);
}
