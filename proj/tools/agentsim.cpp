// agentsim: graph generation, agent runs, verification suites, benchmarks
// and the simulation layers.

#include "agentsim/graph.hpp"
#include "agentsim/lexdfs.hpp"
#include "agentsim/rpath.hpp"
#include "agentsim/simulation.hpp"
#include "agentsim/tasks.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

using namespace agentsim;

namespace {

struct GenArgs {
    std::string family = "random-connected";
    std::size_t n = 8;
    std::optional<std::size_t> max_degree;
    std::uint64_t seed = 1;
    std::string out;
};

struct RunArgs {
    std::string alg;
    std::string graph;
    NodeId start = 0;
    std::string trace;
    std::uint64_t step_limit = 100'000'000;
};

struct VerifyArgs {
    std::string target;
    std::uint64_t seed = 1;
    std::string corpus = "default";
    bool inject_fault = false;
    unsigned threads = 0;
};

struct BenchArgs {
    std::string target;
    std::vector<std::size_t> ns{8, 16, 32, 64, 128, 256};
    std::vector<std::string> families{"path", "cycle", "random-connected"};
    std::uint64_t seed = 1;
    std::string out;
    std::string machine = "rotor-walker";
    unsigned c = 4;
    std::uint64_t steps = 5;
};

struct SimArgs {
    std::string mode;
    std::string machine;
    std::optional<unsigned> storage_bits;
    std::string graph;
    NodeId start = 0;
    std::uint64_t steps = 20;
    unsigned k = 1;
    bool no_check = false;
    std::uint64_t step_limit = 100'000'000;
};

struct FuzzArgs {
    std::uint64_t seed = 1;
    std::size_t sequences = 25;
    std::size_t max_ops = 8;
    std::string corpus = "small";
    bool inject_fault = false;
};

int cmd_gen(const GenArgs &a)
{
    const auto g = generate({parse_family(a.family), a.n, a.max_degree, a.seed});
    save_graph(a.out, g);
    std::cout << "wrote " << a.out << ": n=" << g.node_count() << " m=" << g.edge_count() << "\n";
    return 0;
}

int cmd_run(const RunArgs &a)
{
    const auto g = load_graph(a.graph);
    std::unique_ptr<AgentProgram> prog;
    if (a.alg == "dldfs")
        prog = std::make_unique<DldfsProgram>();
    else if (a.alg == "dldfs-noreset")
        prog = std::make_unique<DldfsProgram>(false);
    else if (a.alg == "parity")
        prog = std::make_unique<ParityProgram>();
    else
        throw std::invalid_argument("unknown algorithm '" + a.alg + "' (dldfs, dldfs-noreset, parity)");

    RunOptions opt;
    opt.step_limit = a.step_limit;
    opt.record_steps = !a.trace.empty();
    const auto t = run(*prog, g, a.start, opt);
    const auto &s = t.summary;
    std::cout << "algorithm " << prog->name() << "\nactivations " << s.activations << "\nmoves " << s.moves
              << "\nmemory_bits " << s.max_memory_bits << "\nstorage_bits " << s.storage_bits << "\nhalted "
              << (s.halted ? "yes" : "no") << "\nfinal_node " << s.final_node << "\n";
    if (a.alg != "parity") {
        std::cout << "first_visits";
        for (auto v : run_dldfs(g, a.start, a.alg == "dldfs", false, a.step_limit).visit_order)
            std::cout << ' ' << v;
        std::cout << "\n";
    } else {
        const auto &L = static_cast<const ParityProgram &>(*prog).layout();
        std::cout << "output " << t.storage.get(s.final_node, L.out, 1) << "\n";
    }
    if (!a.trace.empty()) {
        std::ofstream f(a.trace);
        if (!f)
            throw std::runtime_error("cannot write " + a.trace);
        write_trace(f, t, prog->schema());
    }
    return s.halted ? 0 : 1;
}

int cmd_verify(const VerifyArgs &a)
{
    const auto target = parse_verify_target(a.target);
    auto spec = parse_corpus_spec(a.corpus);
    VerifyOptions o;
    o.seed = a.seed;
    o.threads = a.threads;
    o.inject_fault = a.inject_fault;
    const auto corpus = build_corpus(spec);
    const auto rep = verify(target, corpus, o);
    print_report(std::cout, rep);
    return rep.ok() ? 0 : 1;
}

int cmd_bench(const BenchArgs &a)
{
    BenchOptions o;
    o.ns = a.ns;
    o.families = a.families;
    o.seed = a.seed;
    o.machine = a.machine;
    o.c = a.c;
    o.sim_steps = a.steps;
    const auto rows = bench(parse_bench_target(a.target), o);
    if (a.out.empty() || a.out == "-") {
        write_bench_csv(std::cout, rows);
    } else {
        std::ofstream f(a.out);
        if (!f)
            throw std::runtime_error("cannot write " + a.out);
        write_bench_csv(f, rows);
    }
    bool truncated = false;
    for (const auto &fam : o.families) {
        std::vector<BenchRow> sub;
        for (const auto &r : rows)
            if (r.family == fam) {
                sub.push_back(r);
                truncated |= r.truncated;
            }
        std::set<std::size_t> ns;
        for (const auto &r : sub)
            ns.insert(r.n);
        std::cerr << fam;
        if (ns.size() >= 2)
            std::cerr << ": log-log slope " << loglog_slope(sub);
        if (!sub.empty() && sub.front().steps) {
            std::uint64_t lo = ~std::uint64_t{0}, hi = 0;
            for (const auto &r : sub)
                if (r.per_step_max) {
                    lo = std::min(lo, r.per_step_min);
                    hi = std::max(hi, r.per_step_max);
                }
            if (hi)
                std::cerr << ", moves per simulated step " << lo << (lo == hi ? "" : ".." + std::to_string(hi));
        }
        std::cerr << "\n";
    }
    return truncated ? 1 : 0;
}

TuringMachine machine_from(const std::string &arg, std::optional<unsigned> &bits)
{
    if (std::filesystem::exists(arg)) {
        if (!bits)
            bits = 0;
        return load_machine(arg);
    }
    const auto names = sample_machine_names();
    if (std::find(names.begin(), names.end(), arg) == names.end())
        throw std::invalid_argument("no machine file or sample machine named '" + arg + "'");
    if (!bits)
        bits = sample_storage_bits(arg);
    return sample_machine(arg);
}

int cmd_sim(const SimArgs &a)
{
    auto bits = a.storage_bits;
    const auto tm = machine_from(a.machine, bits);
    const auto g = load_graph(a.graph);
    if (a.start >= g.node_count())
        throw std::invalid_argument("start node out of range");
    SimRun r;
    if (a.mode == "const") {
        SimOptions o{a.steps, a.step_limit, !a.no_check};
        r = sim_const(tm, *bits, g, a.start, o, a.k);
    } else if (a.mode == "onebit") {
        OneBitOptions o;
        o.max_sim_steps = a.steps;
        o.step_limit = a.step_limit;
        o.check = !a.no_check;
        r = sim_onebit(std::make_shared<const TmAgentProgram>(tm, *bits, g.node_count() * a.k), g, a.start, o);
    } else if (a.mode == "chain") {
        SimOptions o{a.steps, a.step_limit, !a.no_check};
        r = sim_chain(tm, *bits, g, a.start, o);
    } else {
        throw std::invalid_argument("unknown simulator '" + a.mode + "' (const, onebit, chain)");
    }
    std::cout << "simulated_steps " << r.simulated_steps << "\nhalted " << (r.halted ? "yes" : "no")
              << "\nsimulator_moves " << r.summary.moves << "\nsimulator_memory_bits " << r.summary.max_memory_bits
              << "\nsimulator_storage_bits " << r.summary.storage_bits << "\n";
    if (r.tm_steps)
        std::cout << "tm_steps " << r.tm_steps << "\n";
    std::cout << "locations";
    for (auto v : r.locations)
        std::cout << ' ' << v;
    std::cout << "\nstorages";
    for (auto s : r.storages)
        std::cout << ' ' << s;
    std::cout << "\n";
    if (r.truncated)
        std::cout << "truncated at the simulator step limit\n";
    for (const auto &v : r.violations)
        std::cout << "violation: " << v << "\n";
    return r.ok() && !r.truncated ? 0 : 1;
}

int cmd_fuzz(const FuzzArgs &a)
{
    std::vector<PortGraph> graphs;
    for (auto &c : build_corpus(parse_corpus_spec(a.corpus)))
        if (c.graph.node_count() >= 3 && c.graph.node_count() <= 24)
            graphs.push_back(std::move(c.graph));
    RpathFuzzConfig cfg;
    cfg.seed = a.seed;
    cfg.sequences_per_graph = a.sequences;
    cfg.max_ops = a.max_ops;
    cfg.inject_fault = a.inject_fault;
    const auto r = fuzz_rpath(graphs, cfg);
    std::cout << "graphs " << r.graphs << "\nsequences " << r.sequences << "\noperations " << r.operations
              << "\nbranching_checks " << r.branching_checks << "\nmoves " << r.moves << "\n";
    for (std::size_t i = 0; i < r.violations.size() && i < 10; ++i)
        std::cout << "violation: " << r.violations[i] << "\n";
    return r.ok() ? 0 : 1;
}

int cmd_machine(const std::string &name, const std::string &out)
{
    save_machine(out, sample_machine(name));
    std::cout << "wrote " << out << " (storage bits " << sample_storage_bits(name) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Single-agent computation on anonymous port-numbered graphs"};
    app.require_subcommand(1);

    GenArgs gen;
    auto *g = app.add_subcommand("gen", "Generate a graph file");
    g->add_option("--family", gen.family, "path, cycle, star, complete, random-tree, random-connected");
    g->add_option("--n", gen.n, "Node count")->required();
    g->add_option("--max-degree", gen.max_degree, "Degree cap for random families");
    g->add_option("--seed", gen.seed);
    g->add_option("-o,--out", gen.out)->required();

    RunArgs run_a;
    auto *r = app.add_subcommand("run", "Run an agent program on a graph");
    r->add_option("alg", run_a.alg, "dldfs, dldfs-noreset, parity")->required();
    r->add_option("--graph", run_a.graph)->required();
    r->add_option("--start", run_a.start);
    r->add_option("--trace", run_a.trace, "Write a per-activation trace");
    r->add_option("--step-limit", run_a.step_limit);

    VerifyArgs ver;
    auto *v = app.add_subcommand("verify", "Run a verification suite");
    v->add_option("target", ver.target)->required()->check(CLI::IsMember(verify_target_names()));
    v->add_option("--seed", ver.seed);
    v->add_option("--corpus", ver.corpus, "default, small, or key=value list");
    v->add_flag("--inject-fault", ver.inject_fault, "Negative control for rpath and simonebit");
    v->add_option("--threads", ver.threads);

    BenchArgs ben;
    auto *b = app.add_subcommand("bench", "Move counts across n, as CSV");
    b->add_option("target", ben.target, "dldfs, parity, simconst, simonebit, chain")->required();
    b->add_option("--ns", ben.ns)->delimiter(',');
    b->add_option("--families", ben.families)->delimiter(',');
    b->add_option("--seed", ben.seed);
    b->add_option("-o,--out", ben.out, "CSV file (default stdout)");
    b->add_option("--machine", ben.machine, "Sample machine for simconst and chain");
    b->add_option("--c", ben.c, "Memory bits of the program under simonebit");
    b->add_option("--steps", ben.steps, "Simulated steps per run");

    SimArgs sim;
    auto *s = app.add_subcommand("sim", "Run a simulator in lock step with direct execution");
    s->add_option("mode", sim.mode, "const, onebit, chain")->required();
    s->add_option("--machine", sim.machine, "Machine file or sample name")->required();
    s->add_option("--storage-bits", sim.storage_bits, "Storage bits of the simulated agent");
    s->add_option("--graph", sim.graph)->required();
    s->add_option("--start", sim.start);
    s->add_option("--steps", sim.steps);
    s->add_option("--cells-per-node", sim.k);
    s->add_flag("--no-check", sim.no_check);
    s->add_option("--step-limit", sim.step_limit);

    FuzzArgs fz;
    auto *f = app.add_subcommand("fuzz", "Random R-path operation sequences");
    f->add_option("--seed", fz.seed);
    f->add_option("--sequences", fz.sequences, "Sequences per graph");
    f->add_option("--max-ops", fz.max_ops, "Operations per sequence");
    f->add_option("--corpus", fz.corpus);
    f->add_flag("--inject-fault", fz.inject_fault);

    std::string mname, mout;
    auto *m = app.add_subcommand("machine", "Write a sample machine file");
    m->add_option("name", mname)->required()->check(CLI::IsMember(sample_machine_names()));
    m->add_option("-o,--out", mout)->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*g)
            return cmd_gen(gen);
        if (*r)
            return cmd_run(run_a);
        if (*v)
            return cmd_verify(ver);
        if (*b)
            return cmd_bench(ben);
        if (*s)
            return cmd_sim(sim);
        if (*f)
            return cmd_fuzz(fz);
        if (*m)
            return cmd_machine(mname, mout);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
