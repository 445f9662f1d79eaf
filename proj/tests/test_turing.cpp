#include "agentsim/runtime.hpp"
#include "agentsim/turing.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace agentsim;

namespace {

Tapes blank_tapes(std::size_t cells)
{
    Tapes t;
    for (auto &c : t.cells)
        c.assign(cells, Blank);
    return t;
}

// One-state machine: every read mask goes to `next` with the given writes and moves.
TuringMachine uniform(std::uint32_t states, std::uint32_t from, Transition t)
{
    TuringMachine tm;
    tm.states = states;
    tm.table.assign(states * 32, std::nullopt);
    for (unsigned r = 0; r < 32; ++r)
        tm.at(from, r) = t;
    return tm;
}

} // namespace

TEST(Unary, RoundTrip)
{
    for (std::size_t k = 0; k < 6; ++k) {
        auto cells = encode_unary(k);
        EXPECT_EQ(decode_unary(cells), k);
        cells.push_back(Zero);
        cells.push_back(One);
        EXPECT_EQ(decode_unary(cells), k);
    }
}

TEST(Tapes, InitialLayout)
{
    const auto t = initial_tapes(std::vector<std::uint8_t>(6, Blank), 0b101, 3, 3, 1, 6);
    EXPECT_EQ(t.cells[1], (std::vector<std::uint8_t>{One, Zero, One, Blank, Blank, Blank}));
    EXPECT_EQ(decode_unary(t.cells[2]), 3u);
    EXPECT_EQ(decode_unary(t.cells[3]), 2u);
    EXPECT_EQ(decode_unary(t.cells[4]), 0u);
    const auto first = initial_tapes(std::vector<std::uint8_t>(6, Blank), 0, 0, 2, kInitialPort, 6);
    EXPECT_EQ(first.cells[3], std::vector<std::uint8_t>(6, Blank));
    EXPECT_THROW(initial_tapes(std::vector<std::uint8_t>(2, Blank), 0, 0, 3, 0, 2), std::invalid_argument);
}

TEST(Tapes, DecodeOutput)
{
    EXPECT_EQ(decode_output({Blank, Blank}, 3), std::nullopt);
    EXPECT_EQ(decode_output({One, One, Zero, One}, 3), std::optional<Port>(1));
    EXPECT_THROW(decode_output({One, One, One}, 2), TmError);
}

TEST(Step, WritesAndMoves)
{
    // write 1 on tape 1, move tapes 1 and 2 right, go to state 2
    const auto tm = uniform(3, 0, Transition{2, 0b00001, 0b00011});
    auto t = blank_tapes(4);
    std::uint32_t q = 0;
    tm_step(tm, t, q);
    EXPECT_EQ(q, 2u);
    EXPECT_EQ(t.cells[0][0], One);
    EXPECT_EQ(t.cells[1][0], Blank);  // wrote the 0 it read: unchanged
    EXPECT_EQ(t.head, (std::array<std::size_t, kTapes>{1, 1, 0, 0, 0}));
}

TEST(Step, LeftClampsRightOverflows)
{
    const auto left = uniform(3, 0, Transition{0, 0, 0});
    auto t = blank_tapes(2);
    std::uint32_t q = 0;
    tm_step(left, t, q);
    EXPECT_EQ(t.head[0], 0u);
    const auto right = uniform(3, 0, Transition{0, 0, 0b00001});
    tm_step(right, t, q);
    EXPECT_EQ(t.head[0], 1u);
    try {
        tm_step(right, t, q);
        FAIL();
    } catch (const TmError &e) {
        EXPECT_EQ(e.kind(), TmError::Kind::Overflow);
    }
}

TEST(Step, ReadOnlyAndMissing)
{
    const auto bad = uniform(3, 0, Transition{2, 0b00100, 0});
    auto t = blank_tapes(2);
    std::uint32_t q = 0;
    try {
        tm_step(bad, t, q);
        FAIL();
    } catch (const TmError &e) {
        EXPECT_EQ(e.kind(), TmError::Kind::ReadOnly);
    }
    // tape 3 holding 1 and rewriting 1 is fine
    t.cells[2][0] = One;
    const auto same = uniform(3, 0, Transition{2, 0b00100, 0});
    q = 0;
    EXPECT_NO_THROW(tm_step(same, t, q));
    try {
        tm_step(same, t, q);  // state 2 has no rules
        FAIL();
    } catch (const TmError &e) {
        EXPECT_EQ(e.kind(), TmError::Kind::MissingTransition);
    }
}

TEST(Step, HaltSkipsMoves)
{
    const auto tm = uniform(2, 0, Transition{1, 0b10000, 0b11111});
    auto t = blank_tapes(3);
    std::uint32_t q = 0;
    tm_step(tm, t, q);
    EXPECT_EQ(q, 1u);
    EXPECT_EQ(t.cells[4][0], One);
    EXPECT_EQ(t.head, (std::array<std::size_t, kTapes>{}));
}

TEST(Step, Tape5ReadsZero)
{
    auto t = blank_tapes(2);
    t.cells[4][0] = One;
    t.cells[0][0] = One;
    EXPECT_EQ(t.reads(), 0b00001u);
}

TEST(Samples, MatchReferenceRules)
{
    std::mt19937_64 rng(7);
    for (const auto &name : sample_machine_names()) {
        const auto tm = sample_machine(name);
        const unsigned bits = sample_storage_bits(name);
        for (int i = 0; i < 1000; ++i) {
            const Port degree = static_cast<Port>(rng() % 7);
            const Port pin = degree == 0 || rng() % 4 == 0 ? kInitialPort : static_cast<Port>(rng() % degree);
            const std::uint64_t storage = bits ? rng() & ((1u << bits) - 1) : 0;
            const std::size_t cells = 8;
            const auto r = run_activation(tm, std::vector<std::uint8_t>(cells, Blank), storage, bits, degree, pin, cells);
            const auto want = sample_reference(name, storage, degree, pin);
            ASSERT_EQ(r.out, want.out) << name << " degree " << degree << " pin " << pin;
            ASSERT_EQ(r.storage, want.storage) << name;
            ASSERT_EQ(r.tape1, std::vector<std::uint8_t>(cells, Blank)) << name;
        }
    }
}

TEST(Samples, RotorStepCounts)
{
    const auto tm = rotor_walker_machine();
    // pin 2 of degree 3: three scan steps then the wipe back
    const auto r = run_activation(tm, std::vector<std::uint8_t>(4, Blank), 0, 0, 3, 2, 4);
    EXPECT_EQ(r.out, std::optional<Port>(0));
    EXPECT_GT(r.tm_steps, 3u);
}

TEST(MachineFile, RoundTrip)
{
    for (const auto &name : sample_machine_names()) {
        const auto tm = sample_machine(name);
        std::stringstream s;
        write_machine(s, tm);
        EXPECT_EQ(read_machine(s), tm) << name;
    }
}

TEST(MachineFile, Errors)
{
    std::istringstream missing("tm 1\nstates 2\n");
    EXPECT_THROW(read_machine(missing), GraphParseError);
    std::istringstream bad_sym("tm 1\nstates 2\nq0 0\nq1 1\n0 00x00 -> 1 00000 LLLLL\n");
    EXPECT_THROW(read_machine(bad_sym), GraphParseError);
    std::istringstream leaves_q1("tm 1\nstates 2\nq0 0\nq1 1\n1 00000 -> 0 00000 LLLLL\n");
    EXPECT_THROW(read_machine(leaves_q1), GraphParseError);
    std::istringstream ok("# walker\ntm 1\nstates 2\nq0 0\nq1 1\n0 00000 -> 1 00001 LLLLR\n");
    const auto tm = read_machine(ok);
    ASSERT_TRUE(tm.at(0, 0));
    EXPECT_EQ(tm.at(0, 0)->write, 0b10000);
    EXPECT_EQ(tm.at(0, 0)->move, 0b10000);
}

TEST(Builder, BudgetAndFirstMatch)
{
    MachineBuilder b(3);
    const auto s = b.state();
    EXPECT_THROW(b.state(), MachineBuildError);
    b.on(b.start(), Cond{}.is(1, true), b.halt_state(), Writes{}.put(5, true));
    b.on(b.start(), Cond{}, s);
    b.on(s, Cond{}, b.halt_state());
    const auto tm = b.build();
    EXPECT_EQ(tm.at(0, 0b00001)->next, 1u);
    EXPECT_EQ(tm.at(0, 0b00001)->write, 0b10001);
    EXPECT_EQ(tm.at(0, 0b00000)->next, s);
    EXPECT_THROW(b.on(b.halt_state(), Cond{}, s), MachineBuildError);
}
