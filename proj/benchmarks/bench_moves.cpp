#include "agentsim/lexdfs.hpp"
#include "agentsim/rpath.hpp"
#include "agentsim/simulation.hpp"
#include "agentsim/tasks.hpp"

#include <benchmark/benchmark.h>

using namespace agentsim;

namespace {

void BM_DldfsPath(benchmark::State &state)
{
    const auto g = generate({Family::Path, static_cast<std::size_t>(state.range(0)), {}, 1});
    const DldfsProgram p;
    std::uint64_t moves = 0;
    for (auto _ : state)
        moves = run(p, g, 0).summary.moves;
    state.counters["moves"] = static_cast<double>(moves);
    state.counters["moves_per_s"] = benchmark::Counter(static_cast<double>(moves), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_DldfsPath)->RangeMultiplier(2)->Range(8, 256)->Unit(benchmark::kMillisecond);

void BM_DldfsRandom(benchmark::State &state)
{
    const auto g = generate({Family::RandomConnected, static_cast<std::size_t>(state.range(0)), 4, 1});
    const DldfsProgram p;
    std::uint64_t moves = 0;
    for (auto _ : state)
        moves = run(p, g, 0).summary.moves;
    state.counters["moves"] = static_cast<double>(moves);
}
BENCHMARK(BM_DldfsRandom)->RangeMultiplier(2)->Range(8, 256)->Unit(benchmark::kMillisecond);

void BM_RpathFuzz(benchmark::State &state)
{
    std::vector<PortGraph> gs{generate({Family::RandomConnected, 12, 4, 3})};
    RpathFuzzConfig cfg;
    cfg.sequences_per_graph = 50;
    std::uint64_t ops = 0;
    for (auto _ : state)
        ops = fuzz_rpath(gs, cfg).operations;
    state.counters["ops"] = static_cast<double>(ops);
}
BENCHMARK(BM_RpathFuzz)->Unit(benchmark::kMillisecond);

// Simulator moves for five simulated steps of the rotor machine.
void BM_SimConst(benchmark::State &state)
{
    const auto g = generate({Family::RandomConnected, static_cast<std::size_t>(state.range(0)), 4, 1});
    SimOptions o;
    o.max_sim_steps = 5;
    o.check = false;
    std::uint64_t moves = 0;
    for (auto _ : state)
        moves = sim_const(rotor_walker_machine(), 0, g, 0, o).summary.moves;
    state.counters["moves"] = static_cast<double>(moves);
}
BENCHMARK(BM_SimConst)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SimOneBit(benchmark::State &state)
{
    const unsigned c = static_cast<unsigned>(state.range(0));
    const auto g = generate({Family::Cycle, 16, {}, 1});
    const auto inner = std::make_shared<const NativeRotorProgram>(c);
    OneBitOptions o;
    o.max_sim_steps = 64;
    o.check = false;
    SimRun r;
    for (auto _ : state)
        r = sim_onebit(inner, g, 0, o);
    state.counters["moves_per_step"] = r.step_moves.empty() ? 0.0 : static_cast<double>(r.step_moves.front());
}
BENCHMARK(BM_SimOneBit)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Chain(benchmark::State &state)
{
    const auto g = generate({Family::Path, static_cast<std::size_t>(state.range(0)), {}, 1});
    SimOptions o;
    o.max_sim_steps = 2;
    o.check = false;
    std::uint64_t moves = 0;
    for (auto _ : state)
        moves = sim_chain(bouncer_machine(), 0, g, 0, o).summary.moves;
    state.counters["moves"] = static_cast<double>(moves);
}
BENCHMARK(BM_Chain)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
