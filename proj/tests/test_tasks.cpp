#include "agentsim/tasks.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace agentsim;

TEST(Corpus, ParseOverrides)
{
    const auto s = parse_corpus_spec("exhaustive=3,perm_ns=7:9,random=4,seed=9");
    EXPECT_EQ(s.exhaustive_max_n, 3u);
    EXPECT_EQ(s.permutation_ns, (std::vector<std::size_t>{7, 9}));
    EXPECT_EQ(s.random_count, 4u);
    EXPECT_EQ(s.seed, 9u);
    EXPECT_EQ(s.random_max_n, CorpusSpec{}.random_max_n);
    EXPECT_THROW(parse_corpus_spec("bogus=1"), std::invalid_argument);
    EXPECT_THROW(parse_corpus_spec("exhaustive"), std::invalid_argument);
}

TEST(Corpus, SmallIsValidAndDeterministic)
{
    const auto a = build_corpus(parse_corpus_spec("small"));
    const auto b = build_corpus(parse_corpus_spec("small"));
    ASSERT_EQ(a.size(), b.size());
    ASSERT_FALSE(a.empty());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(validate(a[i].graph).ok()) << a[i].label;
        EXPECT_EQ(a[i].label, b[i].label);
        EXPECT_EQ(a[i].graph.node_count(), b[i].graph.node_count());
    }
}

TEST(Parity, SmallGraphs)
{
    for (std::size_t n = 1; n <= 7; ++n) {
        const auto g = generate({Family::Path, n, {}, 0});
        for (NodeId s = 0; s < n; ++s)
            EXPECT_EQ(parity_agent(g, s).output, n % 2 == 1) << "n=" << n << " start=" << s;
    }
    const auto task = parity_task();
    EXPECT_TRUE(task.member(generate({Family::Cycle, 5, {}, 0})));
    EXPECT_FALSE(task.member(generate({Family::Cycle, 6, {}, 0})));
}

TEST(Bench, LogLogSlope)
{
    std::vector<BenchRow> rows;
    for (std::size_t n : {4, 8, 16, 32}) {
        BenchRow r;
        r.family = "x";
        r.n = n;
        r.moves = 3 * n * n * n;
        rows.push_back(r);
    }
    EXPECT_NEAR(loglog_slope(rows), 3.0, 1e-9);
}

TEST(Verify, TargetNamesRoundTrip)
{
    for (const auto &name : verify_target_names())
        EXPECT_EQ(target_name(parse_verify_target(name)), name);
    EXPECT_THROW(parse_verify_target("nope"), std::exception);
}
