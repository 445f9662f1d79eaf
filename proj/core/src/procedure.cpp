#include "agentsim/procedure.hpp"

namespace agentsim {

ProcedureProgram::ProcedureProgram(std::string name, StorageSchema schema, Layout layout, ProcTable table, Frame root,
                                   EngineConfig config)
    : name_(std::move(name)), schema_(std::move(schema)), layout_(layout), table_(table), root_(root), config_(config)
{
    if (config_.reg_bits > 32 || config_.max_depth == 0)
        throw std::invalid_argument("bad engine configuration");
    depth_bits_ = bits_for(config_.max_depth + 1);
    frame_bits_ = kProcBits + kPcBits + config_.reg_bits;
    frames_offset_ = depth_bits_ + 1 + config_.global_bits;
    width_ = frames_offset_ + config_.max_depth * frame_bits_;
}

std::vector<Frame> ProcedureProgram::frames(const BitString &memory) const
{
    std::vector<Frame> out;
    const auto depth = static_cast<unsigned>(memory.read(0, depth_bits_));
    for (unsigned i = 0; i < depth && i < config_.max_depth; ++i) {
        const std::size_t at = frames_offset_ + i * frame_bits_;
        Frame f;
        f.proc = static_cast<std::uint8_t>(memory.read(at, kProcBits));
        f.pc = static_cast<std::uint8_t>(memory.read(at + kProcBits, kPcBits));
        f.regs = static_cast<std::uint32_t>(memory.read(at + kProcBits + kPcBits, config_.reg_bits));
        out.push_back(f);
    }
    return out;
}

Action ProcedureProgram::activate(BitString &memory, StorageView storage, Port degree, Port pin,
                                  EventSink *events) const
{
    if (memory.size() != width_)
        memory.resize(width_);

    constexpr unsigned kMaxFrames = 32;
    std::array<Frame, kMaxFrames> stack;
    if (config_.max_depth > kMaxFrames)
        throw AgentFault("call stack too deep for the engine");

    unsigned depth = static_cast<unsigned>(memory.read(0, depth_bits_));
    for (unsigned i = 0; i < depth; ++i) {
        const std::size_t at = frames_offset_ + i * frame_bits_;
        stack[i].proc = static_cast<std::uint8_t>(memory.read(at, kProcBits));
        stack[i].pc = static_cast<std::uint8_t>(memory.read(at + kProcBits, kPcBits));
        stack[i].regs = static_cast<std::uint32_t>(memory.read(at + kProcBits + kPcBits, config_.reg_bits));
    }
    if (depth == 0)
        stack[depth++] = root_;

    Ctx ctx{storage, degree, pin, memory.get(depth_bits_), layout_, *this, memory, depth_bits_ + 1u, events};

    auto save = [&] {
        memory.write(0, depth_bits_, depth);
        memory.set(depth_bits_, ctx.ret);
        for (unsigned i = 0; i < depth; ++i) {
            const std::size_t at = frames_offset_ + i * frame_bits_;
            memory.write(at, kProcBits, stack[i].proc);
            memory.write(at + kProcBits, kPcBits, stack[i].pc);
            memory.write(at + kProcBits + kPcBits, config_.reg_bits, stack[i].regs);
        }
        // Unused frame slots are kept zero so snapshots are canonical.
        const std::size_t used = frames_offset_ + depth * frame_bits_;
        for (std::size_t b = used; b < width_; b += 64)
            memory.write(b, static_cast<unsigned>(std::min<std::size_t>(64, width_ - b)), 0);
    };

    for (std::uint64_t local = 0; local < config_.local_step_cap; ++local) {
        Frame &f = stack[depth - 1];
        const StepFn fn = table_.fns[f.proc];
        if (!fn)
            throw AgentFault("procedure " + std::to_string(f.proc) + " not available in " + name_);
        const Effect e = fn(ctx, f);
        switch (e.kind) {
        case Effect::Kind::Continue:
            break;
        case Effect::Kind::Call:
            if (depth == config_.max_depth)
                throw AgentFault("call stack overflow in " + name_);
            stack[depth++] = e.callee;
            break;
        case Effect::Kind::Return:
            if (depth == 1)
                throw AgentFault("root procedure returned in " + name_);
            --depth;
            ctx.ret = e.flag;
            break;
        case Effect::Kind::Move:
            save();
            return Action::move(e.port);
        case Effect::Kind::Halt:
            save();
            return Action::stop();
        case Effect::Kind::Fault:
            throw AgentFault(e.message ? e.message : "fault");
        }
    }
    throw AgentFault("local computation did not finish in " + name_);
}

std::uint16_t add_rpath_fields(StorageSchema &schema, const std::string &prefix)
{
    const auto base = static_cast<std::uint16_t>(schema.total_bits());
    schema.add(prefix + ".target", 1);
    schema.add(prefix + ".inPath", 1);
    schema.add(prefix + ".direction", 1);
    schema.add(prefix + ".color", 2);
    return base;
}

std::uint16_t add_dfs_fields(StorageSchema &schema, const std::string &prefix)
{
    const auto base = static_cast<std::uint16_t>(schema.total_bits());
    schema.add(prefix + ".color", 2);
    schema.add(prefix + ".traversal", 1);
    return base;
}

} // namespace agentsim

namespace agentsim {

namespace {

// Globals: [index][last result]
Effect script_root(Ctx &c, Frame &f)
{
    const auto &prog = static_cast<const ScriptProgram &>(c.prog);
    const unsigned ib = prog.index_bits();
    const auto idx = static_cast<std::size_t>(c.g(0, ib));
    switch (f.pc) {
    case 0: {
        if (idx >= prog.ops().size())
            return Effect::halt();
        const auto &op = prog.ops()[idx];
        switch (op.kind) {
        case ScriptOp::Kind::Call:
            f.pc = 1;
            return Effect::call(static_cast<Proc>(op.frame.proc), op.frame.regs);
        case ScriptOp::Kind::CallUnlessTarget:
            if (c.rp_target(op.ns)) {
                c.ret = false;
                f.pc = 1;
                return Effect::next();
            }
            f.pc = 1;
            return Effect::call(static_cast<Proc>(op.frame.proc), op.frame.regs);
        case ScriptOp::Kind::Bounce:
            if (c.degree == 0) {
                c.ret = false;
                f.pc = 1;
                return Effect::next();
            }
            f.pc = 2;
            return Effect::move(static_cast<Port>(op.port % static_cast<std::uint32_t>(c.degree)));
        }
        return Effect::fault("bad script op");
    }
    case 2:
        f.pc = 3;
        return Effect::move(c.pin);
    case 3:
        c.ret = true;
        [[fallthrough]];
    default:
        c.set_gbit(ib, c.ret);
        c.emit(events::kRpathOp, idx);
        c.set_g(0, ib, idx + 1);
        f.pc = 0;
        return Effect::next();
    }
}

} // namespace

ScriptProgram::ScriptProgram(std::string name, StorageSchema schema, Layout layout, std::vector<ScriptOp> ops,
                             unsigned max_depth)
    : ProcedureProgram(std::move(name), std::move(schema), layout,
                       [] {
                           auto t = standard_procs();
                           t.set(Proc::ScriptRoot, &script_root);
                           return t;
                       }(),
                       Frame{static_cast<std::uint8_t>(Proc::ScriptRoot), 0, 0},
                       EngineConfig{16, max_depth, bits_for(ops.size() + 1) + 1, 1u << 22}),
      ops_(std::move(ops)), index_bits_(bits_for(ops_.size() + 1))
{
}

ProcTable standard_procs()
{
    ProcTable t;
    add_primitive_procs(t);
    add_rpath_procs(t);
    add_dfs_procs(t);
    return t;
}

} // namespace agentsim
