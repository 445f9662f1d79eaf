#include "agentsim/runtime.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace agentsim {

Runner::Runner(const AgentProgram &program, const PortGraph &graph, NodeId start)
    : program_(&program), graph_(&graph), storage_(graph.node_count(), program.schema().total_bits()),
      memory_(program.memory_width()), node_(start)
{
    if (start >= graph.node_count())
        throw RunError(RunError::Kind::BadStart, "start node " + std::to_string(start) + " out of range");
}

bool Runner::step(EventSink *events, StepRecord *record)
{
    if (halted_)
        return false;
    const NodeId here = node_;
    const Port degree = graph_->degree(here);
    StorageView view = storage_.at(here);

    if (record) {
        const auto rec = storage_.record(here);
        before_.assign(rec.begin(), rec.end());
    }

    Action act;
    try {
        act = program_->activate(memory_, view, degree, pin_, events);
    } catch (const AgentFault &e) {
        throw RunError(RunError::Kind::ProgramFault, program_->name() + ": " + e.what());
    }
    ++activations_;
    if (memory_.size() > program_->memory_width())
        throw RunError(RunError::Kind::MemoryBudget,
                       "memory snapshot of " + std::to_string(memory_.size()) + " bits exceeds declared " +
                           std::to_string(program_->memory_width()));
    max_memory_ = std::max(max_memory_, memory_.size());

    if (record) {
        record->step = activations_ - 1;
        record->node = here;
        record->pin = pin_;
        record->halted = act.halt;
        record->pout = act.halt ? 0 : act.port;
        record->memory = memory_;
        record->writes.clear();
        const auto &schema = program_->schema();
        const auto after = storage_.record(here);
        for (std::size_t f = 0; f < schema.field_count(); ++f) {
            const auto &fd = schema.field(f);
            const auto old_v = read_bits(before_, fd.offset, fd.width);
            const auto new_v = read_bits(after, fd.offset, fd.width);
            if (old_v != new_v)
                record->writes.push_back({f, new_v});
        }
    }

    if (act.halt) {
        halted_ = true;
        return false;
    }
    if (act.port < 0 || act.port >= degree)
        throw RunError(RunError::Kind::PortOutOfRange,
                       "port " + std::to_string(act.port) + " out of range at degree " + std::to_string(degree));
    const auto &e = graph_->at(here, act.port);
    node_ = e.neighbor;
    pin_ = e.reverse;
    ++moves_;
    return true;
}

TraceSummary Runner::summary() const
{
    TraceSummary s;
    s.activations = activations_;
    s.moves = moves_;
    s.max_memory_bits = max_memory_;
    s.storage_bits = program_->schema().total_bits();
    s.halted = halted_;
    s.final_node = node_;
    s.final_pin = pin_;
    return s;
}

ExecutionTrace run(const AgentProgram &program, const PortGraph &graph, NodeId start, const RunOptions &options)
{
    Runner runner(program, graph, start);
    ExecutionTrace trace;
    StepRecord rec;
    EventSink events;
    const bool want_events = options.keep_events || options.record_steps;
    while (!runner.halted() && runner.activations() < options.step_limit) {
        events.clear();
        runner.step(want_events ? &events : nullptr, options.record_steps ? &rec : nullptr);
        if (want_events)
            rec.events = events;
        if (options.observer)
            options.observer(runner, rec);
        if (options.record_steps)
            trace.steps.push_back(rec);
    }
    trace.summary = runner.summary();
    trace.summary.truncated = !runner.halted();
    trace.storage = runner.storage();
    trace.memory = runner.memory();
    return trace;
}

namespace {

void write_port(std::ostream &out, Port p)
{
    if (p == kInitialPort)
        out << "INITIAL";
    else
        out << p;
}

} // namespace

void write_trace(std::ostream &out, const ExecutionTrace &trace, const StorageSchema &schema)
{
    for (const auto &r : trace.steps) {
        out << "step=" << r.step << " node=" << r.node << " pin=";
        write_port(out, r.pin);
        out << " pout=";
        if (r.halted)
            out << "HALT";
        else
            out << r.pout;
        out << " mem_hex=" << (r.memory.empty() ? "-" : r.memory.to_hex()) << " writes=";
        if (r.writes.empty())
            out << '-';
        for (std::size_t i = 0; i < r.writes.size(); ++i)
            out << (i ? "," : "") << schema.field(r.writes[i].field).name << ':' << r.writes[i].value;
        out << '\n';
    }
    const auto &s = trace.summary;
    out << "summary moves=" << s.moves << " activations=" << s.activations << " max_mem_bits=" << s.max_memory_bits
        << " storage_bits=" << s.storage_bits << " halted=" << s.halted << " truncated=" << s.truncated
        << " final_node=" << s.final_node << '\n';
}

BudgetReport audit_budget(const AgentProgram &program, std::span<const PortGraph> graphs, std::uint64_t step_limit)
{
    BudgetReport rep;
    std::set<std::size_t> ns;
    for (const auto &g : graphs) {
        RunOptions opt;
        opt.step_limit = step_limit;
        const auto t = run(program, g, 0, opt);
        rep.rows.push_back({g.node_count(), t.summary.max_memory_bits, t.summary.storage_bits, t.summary.moves,
                            t.summary.halted});
        ns.insert(g.node_count());
    }
    if (ns.size() < 2)
        throw std::invalid_argument("audit_budget needs graphs with at least two distinct node counts");
    rep.constant = std::all_of(rep.rows.begin(), rep.rows.end(), [&](const BudgetRow &r) {
        return r.memory_bits == rep.rows.front().memory_bits && r.storage_bits == rep.rows.front().storage_bits;
    });
    return rep;
}

} // namespace agentsim
