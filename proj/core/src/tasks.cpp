#include "agentsim/tasks.hpp"

#include "agentsim/lexdfs.hpp"
#include "agentsim/rpath.hpp"
#include "agentsim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace agentsim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs body(i) for i < count on a few threads and returns the per-case
// violation lists in index order.
std::vector<std::vector<std::string>> run_cases(std::size_t count, unsigned threads,
                                                const std::function<std::vector<std::string>(std::size_t)> &body)
{
    std::vector<std::vector<std::string>> out(count);
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                out[i] = body(i);
            } catch (const std::exception &e) {
                out[i] = {std::string("exception: ") + e.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    return out;
}

void collect(VerifyReport &rep, const std::vector<std::vector<std::string>> &per_case)
{
    for (const auto &v : per_case)
        rep.violations.insert(rep.violations.end(), v.begin(), v.end());
}

std::vector<const CorpusGraph *> up_to(const std::vector<CorpusGraph> &corpus, std::size_t max_n)
{
    std::vector<const CorpusGraph *> out;
    for (const auto &c : corpus)
        if (c.graph.node_count() <= max_n)
            out.push_back(&c);
    return out;
}

std::vector<NodeId> roots_for(const PortGraph &g)
{
    const std::size_t n = g.node_count();
    std::vector<NodeId> r;
    if (n <= 8) {
        for (NodeId v = 0; v < n; ++v)
            r.push_back(v);
    } else {
        r = {0, static_cast<NodeId>(n / 2), static_cast<NodeId>(n - 1)};
    }
    return r;
}

std::string fmt(double x, int prec = 2)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(prec);
    s << x;
    return s.str();
}

// ---- targets ----

void verify_dldfs(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    rep.cases = corpus.size();
    collect(rep, run_cases(corpus.size(), o.threads, [&](std::size_t i) {
        std::vector<std::string> v;
        const auto &c = corpus[i];
        for (NodeId r : roots_for(c.graph)) {
            const bool grey = c.graph.node_count() <= 8;
            const auto run = run_dldfs(c.graph, r, true, grey);
            const auto where = c.label + " root " + std::to_string(r) + ": ";
            if (!run.trace.summary.halted)
                v.push_back(where + "did not halt");
            if (run.visit_order != oracle_lexdfs(c.graph, r).preorder)
                v.push_back(where + "first-visit order differs from the oracle preorder");
            for (const auto &g : run.violations)
                v.push_back(where + g);
        }
        return v;
    }));
}

void verify_lemma1(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    rep.cases = corpus.size();
    collect(rep, run_cases(corpus.size(), o.threads, [&](std::size_t i) {
        std::vector<std::string> v;
        const auto &g = corpus[i].graph;
        for (NodeId r = 0; r < g.node_count(); ++r)
            for (const auto &e : check_lemma1(g, r))
                v.push_back(corpus[i].label + " root " + std::to_string(r) + ": " + e);
        return v;
    }));
}

void verify_rpath(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    std::vector<const PortGraph *> pool;
    for (const auto &c : corpus)
        if (c.graph.node_count() >= 3 && c.graph.node_count() <= 24)
            pool.push_back(&c.graph);
    if (pool.empty())
        throw std::invalid_argument("corpus has no graph with 3..24 nodes");
    const std::size_t count = std::min(o.rpath_graphs, pool.size());
    std::vector<const PortGraph *> graphs;
    for (std::size_t i = 0; i < count; ++i)
        graphs.push_back(pool[i * pool.size() / count]);
    const std::size_t per_graph = (o.rpath_sequences + count - 1) / count;

    std::vector<RpathFuzzReport> reports(count);
    const auto per_case = run_cases(count, o.threads, [&](std::size_t i) {
        RpathFuzzConfig cfg;
        cfg.seed = o.seed * 1000 + i;
        cfg.sequences_per_graph = per_graph;
        cfg.inject_fault = o.inject_fault;
        reports[i] = fuzz_rpath(std::span<const PortGraph>(graphs[i], 1), cfg);
        std::vector<std::string> v;
        for (const auto &e : reports[i].violations)
            v.push_back("graph " + std::to_string(i) + " (n=" + std::to_string(graphs[i]->node_count()) + "): " + e);
        return v;
    });
    collect(rep, per_case);
    std::size_t seqs = 0, ops = 0, branching = 0;
    for (const auto &r : reports) {
        seqs += r.sequences;
        ops += r.operations;
        branching += r.branching_checks;
    }
    rep.cases = seqs;
    rep.notes.push_back(std::to_string(count) + " graphs, " + std::to_string(seqs) + " sequences, " +
                        std::to_string(ops) + " operations, " + std::to_string(branching) +
                        " branching-node colorings checked");
    if (!o.inject_fault && (seqs < o.rpath_sequences || branching == 0))
        rep.violations.push_back("fuzz volume below target or no branching node exercised");
}

void verify_successor(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    const auto graphs = up_to(corpus, 16);
    rep.cases = graphs.size();
    const auto setup = rpath_setup(1);
    collect(rep, run_cases(graphs.size(), o.threads, [&](std::size_t i) {
        std::vector<std::string> v;
        const auto &g = graphs[i]->graph;
        const auto pre = oracle_lexdfs(g, 0).preorder;
        // After each successor: check the target, step back and forward again.
        std::vector<ScriptOp> ops{rp_init(0)};
        std::vector<std::pair<std::size_t, NodeId>> expect;
        for (std::size_t k = 1; k < pre.size(); ++k) {
            ops.push_back(rp_modify_successor(0));
            ops.push_back(rp_move_target(0));
            expect.emplace_back(ops.size() - 1, pre[k]);
            ops.push_back(rp_modify_predecessor(0));
            ops.push_back(rp_move_target(0));
            expect.emplace_back(ops.size() - 1, pre[k - 1]);
            ops.push_back(rp_modify_successor(0));
        }
        ops.push_back(rp_modify_successor(0));  // past the last node: no-op
        ops.push_back(rp_move_target(0));
        expect.emplace_back(ops.size() - 1, pre.back());

        ScriptProgram prog("successor-walk", setup.schema, setup.layout, ops, 12);
        Runner r(prog, g, 0);
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
        if (pos.size() != ops.size())
            return std::vector<std::string>{graphs[i]->label + ": operation count mismatch"};
        for (const auto &[at, want] : expect)
            if (pos[at] != want) {
                v.push_back(graphs[i]->label + ": target after op " + std::to_string(at) + " is " +
                            std::to_string(pos[at]) + ", preorder says " + std::to_string(want));
                break;
            }
        if (!check_consistency(r.storage(), setup.layout, 0, g, 0, pre.back()).strong())
            v.push_back(graphs[i]->label + ": final path not strongly consistent");
        return v;
    }));
}

std::vector<PortGraph> sweep_graphs(const std::vector<std::size_t> &ns, std::uint64_t seed)
{
    std::vector<PortGraph> gs;
    for (const auto f : {Family::Path, Family::Cycle, Family::RandomConnected})
        for (auto n : ns)
            if (f != Family::Cycle || n >= 3)
                gs.push_back(generate({f, n, f == Family::RandomConnected ? std::optional<std::size_t>(4) : std::nullopt,
                                       seed + n}));
    return gs;
}

void budget_case(VerifyReport &rep, const std::string &what, const AgentProgram &p, const std::vector<PortGraph> &gs,
                 std::uint64_t limit, std::optional<std::size_t> exact_memory = std::nullopt)
{
    const auto b = audit_budget(p, gs, limit);
    ++rep.cases;
    std::ostringstream note;
    note << what << ": memory " << b.rows.front().memory_bits << " bits, storage " << b.rows.front().storage_bits
         << " bits, " << (b.constant ? "constant" : "NOT constant") << " over " << b.rows.size() << " runs";
    rep.notes.push_back(note.str());
    if (!b.constant)
        rep.violations.push_back(what + ": widths vary with n");
    if (exact_memory)
        for (const auto &r : b.rows)
            if (r.memory_bits != *exact_memory) {
                rep.violations.push_back(what + ": memory width " + std::to_string(r.memory_bits) + " at n=" +
                                         std::to_string(r.n));
                break;
            }
}

void verify_budget(VerifyReport &rep, const VerifyOptions &o)
{
    const auto big = sweep_graphs({8, 16, 32, 64, 128, 256}, o.seed);
    const auto small = sweep_graphs({4, 6, 8, 12, 16}, o.seed);
    budget_case(rep, "dldfs", DldfsProgram(), big, 100'000'000);
    budget_case(rep, "sim_const(rotor-walker)", SimConstProgram(rotor_walker_machine(), 0), small, 200'000);
    budget_case(rep, "sim_const(port-zero-walker)", SimConstProgram(port_zero_walker_machine(), 1), small, 200'000);
    for (unsigned c : {1u, 4u, 8u})
        budget_case(rep, "sim_onebit(mix-walker c=" + std::to_string(c) + ")",
                    OneBitProgram(std::make_shared<const MixWalkerProgram>(c)), small, 1'000'000, 1);
    budget_case(rep, "sim_onebit(sim_const(bouncer))",
                OneBitProgram(std::make_shared<const SimConstProgram>(bouncer_machine(), 0)), small, 200'000, 1);
    // negative control: must be reported as growing
    const auto counting = audit_budget(CountingDfsProgram(), big, 100'000'000);
    rep.notes.push_back(std::string("negative control counting-dfs: ") +
                        (counting.constant ? "constant (unexpected)" : "growing, as expected"));
    if (counting.constant)
        rep.violations.push_back("audit did not flag the growing counter program");
}

void verify_simconst(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    const auto graphs = up_to(corpus, o.sim_const_max_n);
    const auto names = sample_machine_names();
    rep.cases = graphs.size() * names.size();
    std::atomic<std::uint64_t> tm_steps{0}, steps{0};
    collect(rep, run_cases(rep.cases, o.threads, [&](std::size_t i) {
        const auto &c = *graphs[i / names.size()];
        const auto &name = names[i % names.size()];
        SimOptions so;
        so.max_sim_steps = o.sim_const_steps;
        const auto r = sim_const(sample_machine(name), sample_storage_bits(name), c.graph, 0, so);
        tm_steps += r.tm_steps;
        steps += r.simulated_steps;
        std::vector<std::string> v;
        const auto where = name + " on " + c.label + ": ";
        for (const auto &e : r.violations)
            v.push_back(where + e);
        if (r.truncated)
            v.push_back(where + "simulator step limit reached");
        else if (!r.halted && r.simulated_steps < o.sim_const_steps)
            v.push_back(where + "stopped early");
        return v;
    }));
    rep.notes.push_back(std::to_string(graphs.size()) + " graphs x " + std::to_string(names.size()) + " machines, " +
                        std::to_string(steps.load()) + " simulated steps, " + std::to_string(tm_steps.load()) +
                        " TM steps compared");
}

void verify_simonebit(VerifyReport &rep, const std::vector<CorpusGraph> &corpus, const VerifyOptions &o)
{
    const auto graphs = up_to(corpus, o.onebit_max_n);
    struct Prog {
        std::shared_ptr<const AgentProgram> p;
        unsigned c;
    };
    std::vector<Prog> progs;
    for (unsigned c : {1u, 2u, 4u, 8u})
        progs.push_back({std::make_shared<const MixWalkerProgram>(c), c});
    progs.push_back({std::make_shared<const NativeRotorProgram>(4), 4});
    rep.cases = graphs.size() * progs.size();
    std::atomic<std::uint64_t> boundaries{0};
    collect(rep, run_cases(rep.cases, o.threads, [&](std::size_t i) {
        const auto &g = graphs[i / progs.size()];
        const auto &pr = progs[i % progs.size()];
        OneBitOptions so;
        so.max_sim_steps = 10'000;
        if (o.inject_fault)
            so.corrupt_trans_after = 1;
        const auto r = sim_onebit(pr.p, g->graph, 0, so);
        const auto d = run_direct(*pr.p, g->graph, 0, 10'000);
        boundaries += r.simulated_steps;
        std::vector<std::string> v;
        const auto where = pr.p->name() + " c=" + std::to_string(pr.c) + " on " + g->label + ": ";
        for (const auto &e : r.violations)
            v.push_back(where + e);
        if (!r.halted || !d.halted)
            v.push_back(where + "did not halt");
        if (r.locations != d.locations || r.storages != d.storages || r.memory != d.memory)
            v.push_back(where + "final state differs from direct execution");
        if (r.summary.max_memory_bits != 1)
            v.push_back(where + "memory width " + std::to_string(r.summary.max_memory_bits));
        const std::uint64_t want = 2 * std::uint64_t{pr.c} - 1;
        for (auto m : r.step_moves)
            if (m != want) {
                v.push_back(where + std::to_string(m) + " moves in a simulated step, expected " + std::to_string(want));
                break;
            }
        return v;
    }));
    rep.notes.push_back(std::to_string(graphs.size()) + " graphs x " + std::to_string(progs.size()) + " programs, " +
                        std::to_string(boundaries.load()) + " simulated steps; moves per step 2c-1");
}

void verify_chain(VerifyReport &rep, const VerifyOptions &o)
{
    std::vector<PortGraph> graphs;
    for (std::size_t n = 1; n <= o.chain_max_n; ++n)
        for (auto &g : connected_graphs(n, true))
            graphs.push_back(std::move(g));
    const std::vector<std::string> names{"bouncer", "port-zero-walker"};
    rep.cases = graphs.size() * names.size();
    std::atomic<std::uint64_t> max_moves{0};
    collect(rep, run_cases(rep.cases, o.threads, [&](std::size_t i) {
        const auto &g = graphs[i / names.size()];
        const auto &name = names[i % names.size()];
        SimOptions so;
        so.max_sim_steps = name == "bouncer" ? o.chain_bouncer_steps : 1000;
        so.step_limit = o.chain_step_limit;
        const auto r = sim_chain(sample_machine(name), sample_storage_bits(name), g, 0, so);
        for (auto m = max_moves.load(); r.summary.moves > m && !max_moves.compare_exchange_weak(m, r.summary.moves);) {
        }
        std::vector<std::string> v;
        const auto where = name + " on graph " + std::to_string(i / names.size()) + " (n=" +
                           std::to_string(g.node_count()) + "): ";
        for (const auto &e : r.violations)
            v.push_back(where + e);
        if (r.truncated)
            v.push_back(where + "hit the simulator step limit");
        if (name == "port-zero-walker" && !r.halted)
            v.push_back(where + "did not halt");
        if (r.summary.max_memory_bits != 1)
            v.push_back(where + "memory width " + std::to_string(r.summary.max_memory_bits));
        return v;
    }));
    rep.notes.push_back(std::to_string(graphs.size()) + " graphs up to isomorphism, n <= " +
                        std::to_string(o.chain_max_n) + "; bouncer for " + std::to_string(o.chain_bouncer_steps) +
                        " steps, port-zero-walker until halt; largest run " + std::to_string(max_moves.load()) +
                        " moves");
}

void verify_parity(VerifyReport &rep, const VerifyOptions &o)
{
    std::mt19937_64 rng(o.seed);
    std::vector<PortGraph> graphs;
    for (std::size_t i = 0; i < o.parity_graphs; ++i) {
        const std::size_t n = 1 + rng() % 100;
        graphs.push_back(generate({Family::RandomConnected, n, std::nullopt, rng()}));
    }
    const auto task = parity_task();
    rep.cases = graphs.size();
    collect(rep, run_cases(graphs.size(), o.threads, [&](std::size_t i) {
        const auto &g = graphs[i];
        const auto r = parity_agent(g, static_cast<NodeId>(i % g.node_count()));
        std::vector<std::string> v;
        if (r.output != task.member(g) || r.output != (g.node_count() % 2 == 1))
            v.push_back("n=" + std::to_string(g.node_count()) + ": output " + std::to_string(r.output));
        return v;
    }));
}

void verify_slope(VerifyReport &rep, const VerifyOptions &o)
{
    BenchOptions bo;
    bo.seed = o.seed;
    const auto rows = bench(BenchTarget::Dldfs, bo);
    rep.cases = rows.size();
    for (const auto &f : bo.families) {
        std::vector<BenchRow> fam;
        for (const auto &r : rows)
            if (r.family == f)
                fam.push_back(r);
        const double s = loglog_slope(fam);
        rep.notes.push_back(f + ": slope " + fmt(s) + " (moves " + std::to_string(fam.front().moves) + " at n=" +
                            std::to_string(fam.front().n) + ", " + std::to_string(fam.back().moves) + " at n=" +
                            std::to_string(fam.back().n) + ")");
        if (s > o.slope_limit)
            rep.violations.push_back(f + ": slope " + fmt(s) + " above " + fmt(o.slope_limit));
        for (const auto &r : fam)
            if (r.truncated)
                rep.violations.push_back(f + " n=" + std::to_string(r.n) + ": hit the step limit");
    }
}

const std::map<std::string, VerifyTarget> &target_map()
{
    static const std::map<std::string, VerifyTarget> m{
        {"dldfs", VerifyTarget::Dldfs},        {"lemma1", VerifyTarget::Lemma1},
        {"rpath", VerifyTarget::Rpath},        {"successor", VerifyTarget::Successor},
        {"budget", VerifyTarget::Budget},      {"simconst", VerifyTarget::SimConst},
        {"simonebit", VerifyTarget::SimOneBit}, {"chain", VerifyTarget::Chain},
        {"parity", VerifyTarget::Parity},      {"slope", VerifyTarget::Slope}};
    return m;
}

} // namespace

DecisionTask parity_task()
{
    return {"parity", [](const PortGraph &g) { return g.node_count() % 2 == 1; },
            [] { return std::unique_ptr<AgentProgram>(new ParityProgram()); }};
}

ParityResult parity_agent(const PortGraph &graph, NodeId start, std::uint64_t step_limit)
{
    const ParityProgram p;
    Runner r(p, graph, start);
    while (!r.halted()) {
        if (r.activations() >= step_limit)
            throw std::runtime_error("parity agent hit the step limit");
        r.step();
    }
    return {r.storage().get(r.node(), p.layout().out, 1) != 0, r.node(), r.summary()};
}

CorpusSpec parse_corpus_spec(const std::string &text)
{
    CorpusSpec s;
    if (text.empty() || text == "default")
        return s;
    if (text == "small") {
        s.exhaustive_max_n = 4;
        s.permutation_ns = {6};
        s.permutations = 5;
        s.random_count = 20;
        s.random_max_n = 16;
        return s;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("corpus item '" + item + "' is not key=value");
        const auto key = item.substr(0, eq), val = item.substr(eq + 1);
        auto num = [&] { return static_cast<std::size_t>(std::stoull(val)); };
        if (key == "exhaustive")
            s.exhaustive_max_n = num();
        else if (key == "perm")
            s.permutations = num();
        else if (key == "perm_ns") {
            s.permutation_ns.clear();
            std::istringstream ns(val);
            std::string x;
            while (std::getline(ns, x, ':'))
                s.permutation_ns.push_back(std::stoull(x));
        } else if (key == "random")
            s.random_count = num();
        else if (key == "max_n")
            s.random_max_n = num();
        else if (key == "max_degree")
            s.random_max_degree = num();
        else if (key == "seed")
            s.seed = num();
        else
            throw std::invalid_argument("unknown corpus key '" + key + "'");
    }
    if (s.random_max_n < 2)
        throw std::invalid_argument("corpus max_n must be at least 2");
    return s;
}

std::vector<CorpusGraph> build_corpus(const CorpusSpec &spec)
{
    std::vector<CorpusGraph> out;
    for (std::size_t n = 1; n <= spec.exhaustive_max_n; ++n) {
        auto gs = connected_graphs(n, false);
        for (std::size_t i = 0; i < gs.size(); ++i)
            out.push_back({std::move(gs[i]), "exhaustive n=" + std::to_string(n) + " #" + std::to_string(i)});
    }
    for (auto n : spec.permutation_ns) {
        const auto base = generate({Family::RandomConnected, n, std::nullopt, spec.seed * 7919 + n});
        for (std::size_t i = 0; i < spec.permutations; ++i)
            out.push_back({shuffle_ports(base, spec.seed * 104729 + n * 1000 + i),
                           "shuffled n=" + std::to_string(n) + " #" + std::to_string(i)});
    }
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = 0; i < spec.random_count; ++i) {
        const std::size_t n = 2 + rng() % (spec.random_max_n - 1);
        const std::uint64_t seed = rng();
        out.push_back({generate({Family::RandomConnected, n, std::min(spec.random_max_degree, n - 1), seed}),
                       "random n=" + std::to_string(n) + " seed " + std::to_string(seed)});
    }
    return out;
}

VerifyTarget parse_verify_target(const std::string &name)
{
    const auto it = target_map().find(name);
    if (it == target_map().end())
        throw std::invalid_argument("unknown verify target '" + name + "'");
    return it->second;
}

std::string target_name(VerifyTarget t)
{
    for (const auto &[k, v] : target_map())
        if (v == t)
            return k;
    return "?";
}

std::vector<std::string> verify_target_names()
{
    std::vector<std::string> out;
    for (const auto &[k, v] : target_map())
        out.push_back(k);
    return out;
}

VerifyReport verify(VerifyTarget target, const std::vector<CorpusGraph> &corpus, const VerifyOptions &options)
{
    VerifyReport rep;
    rep.target = target_name(target);
    const auto t0 = Clock::now();
    switch (target) {
    case VerifyTarget::Dldfs: verify_dldfs(rep, corpus, options); break;
    case VerifyTarget::Lemma1: verify_lemma1(rep, corpus, options); break;
    case VerifyTarget::Rpath: verify_rpath(rep, corpus, options); break;
    case VerifyTarget::Successor: verify_successor(rep, corpus, options); break;
    case VerifyTarget::Budget: verify_budget(rep, options); break;
    case VerifyTarget::SimConst: verify_simconst(rep, corpus, options); break;
    case VerifyTarget::SimOneBit: verify_simonebit(rep, corpus, options); break;
    case VerifyTarget::Chain: verify_chain(rep, options); break;
    case VerifyTarget::Parity: verify_parity(rep, options); break;
    case VerifyTarget::Slope: verify_slope(rep, options); break;
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

void print_report(std::ostream &out, const VerifyReport &report, std::size_t max_violations)
{
    out << report.target << ": " << (report.ok() ? "PASS" : "FAIL") << " (" << report.cases << " cases, "
        << fmt(report.seconds, 1) << " s";
    if (!report.ok())
        out << ", " << report.violations.size() << " violations";
    out << ")\n";
    for (const auto &n : report.notes)
        out << "  " << n << "\n";
    for (std::size_t i = 0; i < report.violations.size() && i < max_violations; ++i)
        out << "  ! " << report.violations[i] << "\n";
}

BenchTarget parse_bench_target(const std::string &name)
{
    if (name == "dldfs")
        return BenchTarget::Dldfs;
    if (name == "parity")
        return BenchTarget::Parity;
    if (name == "simconst")
        return BenchTarget::SimConst;
    if (name == "simonebit")
        return BenchTarget::SimOneBit;
    if (name == "chain")
        return BenchTarget::Chain;
    throw std::invalid_argument("unknown bench target '" + name + "'");
}

std::vector<BenchRow> bench(BenchTarget target, const BenchOptions &options)
{
    std::vector<BenchRow> rows;
    for (const auto &fname : options.families) {
        const Family f = parse_family(fname);
        for (auto n : options.ns) {
            if (f == Family::Cycle && n < 3)
                continue;
            const auto g = generate({f, n, f == Family::RandomConnected ? std::optional<std::size_t>(4) : std::nullopt,
                                     options.seed});
            BenchRow row;
            row.family = fname;
            row.n = n;
            row.seed = options.seed;
            const auto t0 = Clock::now();
            auto take_sim = [&](const SimRun &r) {
                row.moves = r.summary.moves;
                row.mem_bits = r.summary.max_memory_bits;
                row.storage_bits = r.summary.storage_bits;
                row.truncated = r.truncated;
                row.steps = r.simulated_steps;
                if (!r.step_moves.empty()) {
                    row.per_step_min = *std::min_element(r.step_moves.begin(), r.step_moves.end());
                    row.per_step_max = *std::max_element(r.step_moves.begin(), r.step_moves.end());
                }
            };
            switch (target) {
            case BenchTarget::Dldfs:
            case BenchTarget::Parity: {
                RunOptions ro;
                ro.step_limit = options.step_limit;
                const auto t = target == BenchTarget::Dldfs ? run(DldfsProgram(), g, 0, ro) : run(ParityProgram(), g, 0, ro);
                row.moves = t.summary.moves;
                row.mem_bits = t.summary.max_memory_bits;
                row.storage_bits = t.summary.storage_bits;
                row.truncated = t.summary.truncated;
                break;
            }
            case BenchTarget::SimConst:
            case BenchTarget::Chain: {
                SimOptions so;
                so.max_sim_steps = options.sim_steps;
                so.step_limit = options.step_limit;
                so.check = false;
                const auto tm = sample_machine(options.machine);
                const auto bits = sample_storage_bits(options.machine);
                take_sim(target == BenchTarget::SimConst ? sim_const(tm, bits, g, 0, so) : sim_chain(tm, bits, g, 0, so));
                break;
            }
            case BenchTarget::SimOneBit: {
                OneBitOptions so;
                so.max_sim_steps = options.sim_steps;
                so.step_limit = options.step_limit;
                so.check = false;
                take_sim(sim_onebit(std::make_shared<const NativeRotorProgram>(options.c), g, 0, so));
                break;
            }
            }
            row.ms = seconds_since(t0) * 1000.0;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows)
{
    out << "family,n,seed,moves,mem_bits,storage_bits,ms\n";
    for (const auto &r : rows)
        out << r.family << ',' << r.n << ',' << r.seed << ',' << r.moves << ',' << r.mem_bits << ',' << r.storage_bits
            << ',' << fmt(r.ms, 3) << '\n';
}

double loglog_slope(const std::vector<BenchRow> &rows)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = 0;
    for (const auto &r : rows) {
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(static_cast<double>(std::max<std::uint64_t>(r.moves, 1)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    const double den = k * sxx - sx * sx;
    if (k < 2 || den <= 0)
        throw std::invalid_argument("slope needs at least two distinct n");
    return (k * sxy - sx * sy) / den;
}

} // namespace agentsim
