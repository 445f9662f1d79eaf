#include "agentsim/graph.hpp"
#include "agentsim/lexdfs.hpp"
#include "agentsim/runtime.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace agentsim;

namespace {

class AlwaysHalt : public AgentProgram {
public:
    AlwaysHalt() { schema_.add("flag", 1); }
    std::string name() const override { return "halt"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return 0; }
    Action activate(BitString &, StorageView, Port, Port, EventSink *) const override { return Action::stop(); }

private:
    StorageSchema schema_;
};

// Exit port 0; halt where the flag is already set, else set it.
class FlagWalker : public AgentProgram {
public:
    FlagWalker() { schema_.add("flag", 1); }
    std::string name() const override { return "flag-walker"; }
    const StorageSchema &schema() const override { return schema_; }
    unsigned memory_width() const override { return 0; }
    Action activate(BitString &, StorageView st, Port, Port, EventSink *) const override
    {
        if (st.bit(0))
            return Action::stop();
        st.set_bit(0, true);
        return Action::move(0);
    }

private:
    StorageSchema schema_;
};

class BadPort : public AlwaysHalt {
public:
    Action activate(BitString &, StorageView, Port degree, Port, EventSink *) const override
    {
        return Action::move(degree);
    }
};

class Greedy : public AlwaysHalt {
public:
    Action activate(BitString &m, StorageView, Port, Port, EventSink *) const override
    {
        m.resize(m.size() + 1);
        return Action::move(0);
    }
};

PortGraph oriented_c3()
{
    // port 0 always leads to the next node around the cycle
    return PortGraph({{{1, 1}, {2, 0}}, {{2, 1}, {0, 0}}, {{0, 1}, {1, 0}}});
}

} // namespace

TEST(Run, AlwaysHaltOnK2)
{
    const AlwaysHalt p;
    const auto t = run(p, generate({Family::Path, 2, {}, 0}), 0);
    EXPECT_EQ(t.summary.activations, 1u);
    EXPECT_EQ(t.summary.moves, 0u);
    EXPECT_TRUE(t.summary.halted);
}

TEST(Run, FlagWalkerOnC3)
{
    const FlagWalker p;
    const auto g = oriented_c3();
    ASSERT_TRUE(validate(g).ok());
    RunOptions o;
    o.record_steps = true;
    const auto t = run(p, g, 0, o);
    ASSERT_EQ(t.steps.size(), 4u);
    EXPECT_EQ(t.steps[0].node, 0u);
    EXPECT_EQ(t.steps[1].node, 1u);
    EXPECT_EQ(t.steps[2].node, 2u);
    EXPECT_EQ(t.steps[3].node, 0u);
    EXPECT_EQ(t.steps[0].pin, kInitialPort);
    EXPECT_EQ(t.summary.moves, 3u);
    EXPECT_EQ(t.summary.final_node, 0u);
    for (std::size_t k = 0; k + 1 < t.steps.size(); ++k)
        EXPECT_EQ(g.at(t.steps[k].node, t.steps[k].pout).neighbor, t.steps[k + 1].node);
}

TEST(Run, Errors)
{
    const auto g = generate({Family::Path, 3, {}, 0});
    const BadPort bad;
    try {
        run(bad, g, 0);
        FAIL();
    } catch (const RunError &e) {
        EXPECT_EQ(e.kind(), RunError::Kind::PortOutOfRange);
    }
    const Greedy greedy;
    try {
        run(greedy, g, 0);
        FAIL();
    } catch (const RunError &e) {
        EXPECT_EQ(e.kind(), RunError::Kind::MemoryBudget);
    }
    try {
        run(bad, g, 7);
        FAIL();
    } catch (const RunError &e) {
        EXPECT_EQ(e.kind(), RunError::Kind::BadStart);
    }
}

TEST(Run, StepLimitTruncates)
{
    const DldfsProgram p;
    RunOptions o;
    o.step_limit = 10;
    const auto t = run(p, generate({Family::Cycle, 8, {}, 0}), 0, o);
    EXPECT_TRUE(t.summary.truncated);
    EXPECT_FALSE(t.summary.halted);
    EXPECT_EQ(t.summary.activations, 10u);
}

TEST(Run, ReplayDeterministicTraces)
{
    const DldfsProgram p;
    const auto g = generate({Family::RandomConnected, 12, 4, 5});
    RunOptions o;
    o.record_steps = true;
    std::ostringstream a, b;
    write_trace(a, run(p, g, 3, o), p.schema());
    write_trace(b, run(p, g, 3, o), p.schema());
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str().find("step=0 node=3 pin=INITIAL"), std::string::npos);
}

TEST(Run, AnonymityUnderRelabeling)
{
    const DldfsProgram p;
    const auto g = generate({Family::RandomConnected, 10, 4, 21});
    const std::vector<NodeId> perm{9, 4, 2, 7, 0, 1, 8, 3, 6, 5};
    const auto h = relabel(g, perm);
    RunOptions o;
    o.record_steps = true;
    const auto tg = run(p, g, 0, o);
    const auto th = run(p, h, perm[0], o);
    ASSERT_EQ(tg.steps.size(), th.steps.size());
    for (std::size_t k = 0; k < tg.steps.size(); ++k) {
        EXPECT_EQ(tg.steps[k].pout, th.steps[k].pout);
        EXPECT_EQ(perm[tg.steps[k].node], th.steps[k].node);
    }
}

TEST(Budget, DfsConstantCounterNot)
{
    std::vector<PortGraph> gs;
    for (std::size_t n : {8u, 16u, 32u, 64u})
        gs.push_back(generate({Family::RandomConnected, n, 4, n}));
    const DldfsProgram dfs;
    const auto r = audit_budget(dfs, gs);
    EXPECT_TRUE(r.constant);
    for (const auto &row : r.rows)
        EXPECT_TRUE(row.halted);
    const CountingDfsProgram counting;
    const auto bad = audit_budget(counting, gs);
    EXPECT_FALSE(bad.constant);
    EXPECT_THROW(audit_budget(dfs, std::span(gs).first(1)), std::invalid_argument);
}
