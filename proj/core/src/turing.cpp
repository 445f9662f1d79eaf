#include "agentsim/turing.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace agentsim {

void TuringMachine::validate() const
{
    if (states < 2 || q0 >= states || q1 >= states || q0 == q1)
        throw std::invalid_argument("machine: bad state ids");
    if (qinit && (*qinit >= states || *qinit == q1))
        throw std::invalid_argument("machine: bad initial state");
    if (table.size() != static_cast<std::size_t>(states) * 32)
        throw std::invalid_argument("machine: table size does not match the state count");
    for (std::uint32_t s = 0; s < states; ++s)
        for (unsigned r = 0; r < 32; ++r) {
            const auto &t = at(s, r);
            if (!t)
                continue;
            if (s == q1)
                throw std::invalid_argument("machine: q1 has an outgoing transition");
            if (t->next >= states || t->write > 31 || t->move > 31)
                throw std::invalid_argument("machine: transition out of range");
        }
}

unsigned Tapes::reads() const
{
    unsigned r = 0;
    for (unsigned i = 0; i + 1 < kTapes; ++i)
        if (cells[i][head[i]] == One)
            r |= 1u << i;
    return r;
}

void tm_step(const TuringMachine &tm, Tapes &tapes, std::uint32_t &state)
{
    if (state == tm.q1)
        throw TmError(TmError::Kind::Halted, "machine already in q1");
    const unsigned reads = tapes.reads();
    const auto &t = tm.at(state, reads);
    if (!t)
        throw TmError(TmError::Kind::MissingTransition,
                      "no transition for state " + std::to_string(state) + " reading " + std::to_string(reads));
    for (unsigned i = 0; i < kTapes; ++i) {
        std::uint8_t &cell = tapes.cells[i][tapes.head[i]];
        const bool w = (t->write >> i) & 1u;
        if (w == (cell == One))
            continue;
        if (i == 2 || i == 3)
            throw TmError(TmError::Kind::ReadOnly, "write to read-only tape " + std::to_string(i + 1));
        cell = w ? One : Zero;
    }
    if (t->next == tm.q1) {
        state = tm.q1;
        return;
    }
    for (unsigned i = 0; i < kTapes; ++i) {
        auto &h = tapes.head[i];
        if ((t->move >> i) & 1u) {
            if (h + 1 >= tapes.cells[i].size())
                throw TmError(TmError::Kind::Overflow, "head of tape " + std::to_string(i + 1) + " ran off the end");
            ++h;
        } else if (h > 0) {
            --h;
        }
    }
    state = t->next;
}

std::vector<std::uint8_t> encode_unary(std::size_t k) { return std::vector<std::uint8_t>(k, One); }

std::size_t decode_unary(const std::vector<std::uint8_t> &cells)
{
    std::size_t k = 0;
    while (k < cells.size() && cells[k] == One)
        ++k;
    return k;
}

namespace {

void put_unary(std::vector<std::uint8_t> &tape, std::size_t k, const char *what)
{
    if (k > tape.size())
        throw std::invalid_argument(std::string("tape too short for the ") + what);
    const auto code = encode_unary(k);
    std::copy(code.begin(), code.end(), tape.begin());
}

} // namespace

Tapes initial_tapes(const std::vector<std::uint8_t> &tape1, std::uint64_t storage, unsigned storage_bits,
                    Port degree, Port pin, std::size_t cells)
{
    if (cells == 0 || tape1.size() != cells)
        throw std::invalid_argument("tape 1 length must equal the tape bound");
    if (storage_bits > cells || storage_bits > 64)
        throw std::invalid_argument("storage image does not fit tape 2");
    Tapes t;
    t.cells[0] = tape1;
    for (unsigned i = 1; i < kTapes; ++i)
        t.cells[i].assign(cells, Blank);
    for (unsigned b = 0; b < storage_bits; ++b)
        t.cells[1][b] = ((storage >> b) & 1u) ? One : Zero;
    put_unary(t.cells[2], static_cast<std::size_t>(degree), "degree");
    if (pin >= 0)
        put_unary(t.cells[3], static_cast<std::size_t>(pin) + 1, "incoming port");
    return t;
}

std::uint32_t start_state(const TuringMachine &tm, Port pin)
{
    return pin < 0 && tm.qinit ? *tm.qinit : tm.q0;
}

std::optional<Port> decode_output(const std::vector<std::uint8_t> &tape5, Port degree)
{
    const std::size_t k = decode_unary(tape5);
    if (k == 0)
        return std::nullopt;
    if (k > static_cast<std::size_t>(degree))
        throw TmError(TmError::Kind::BadOutput,
                      "output port " + std::to_string(k - 1) + " not below degree " + std::to_string(degree));
    return static_cast<Port>(k - 1);
}

std::uint64_t storage_from_tape(const std::vector<std::uint8_t> &tape2, unsigned storage_bits)
{
    std::uint64_t s = 0;
    for (unsigned b = 0; b < storage_bits; ++b)
        if (tape2[b] == One)
            s |= std::uint64_t{1} << b;
    return s;
}

ActivationResult run_activation(const TuringMachine &tm, const std::vector<std::uint8_t> &tape1,
                                std::uint64_t storage, unsigned storage_bits, Port degree, Port pin,
                                std::size_t cells, std::uint64_t step_limit)
{
    Tapes tapes = initial_tapes(tape1, storage, storage_bits, degree, pin, cells);
    std::uint32_t state = start_state(tm, pin);
    ActivationResult r;
    while (state != tm.q1) {
        if (r.tm_steps == step_limit)
            throw TmError(TmError::Kind::StepLimit, "TM step limit exceeded");
        tm_step(tm, tapes, state);
        ++r.tm_steps;
    }
    r.out = decode_output(tapes.cells[4], degree);
    r.storage = storage_from_tape(tapes.cells[1], storage_bits);
    r.tape1 = std::move(tapes.cells[0]);
    return r;
}

// ---- machine files ----

namespace {

std::string mask_string(unsigned m, char zero, char one)
{
    std::string s(kTapes, zero);
    for (unsigned i = 0; i < kTapes; ++i)
        if ((m >> i) & 1u)
            s[i] = one;
    return s;
}

unsigned parse_mask(const std::string &s, char zero, char one, std::size_t line)
{
    if (s.size() != kTapes)
        throw GraphParseError(line, "expected " + std::to_string(kTapes) + " symbols, got '" + s + "'");
    unsigned m = 0;
    for (unsigned i = 0; i < kTapes; ++i) {
        if (s[i] == one)
            m |= 1u << i;
        else if (s[i] != zero)
            throw GraphParseError(line, "bad symbol '" + std::string(1, s[i]) + "'");
    }
    return m;
}

std::uint32_t parse_state(const std::string &s, std::size_t line)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoul(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return static_cast<std::uint32_t>(v);
    } catch (const std::logic_error &) {
        throw GraphParseError(line, "bad state id '" + s + "'");
    }
}

} // namespace

TuringMachine read_machine(std::istream &in)
{
    TuringMachine tm;
    bool have_header = false, have_states = false, have_q0 = false, have_q1 = false;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.resize(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        if (!have_header) {
            if (tok.size() != 2 || tok[0] != "tm" || tok[1] != "1")
                throw GraphParseError(line, "expected header 'tm 1'");
            have_header = true;
            continue;
        }
        if (tok.size() == 2 && tok[0] == "states") {
            tm.states = parse_state(tok[1], line);
            if (tm.states < 2 || tm.states > (1u << 16))
                throw GraphParseError(line, "state count out of range");
            tm.table.assign(static_cast<std::size_t>(tm.states) * 32, std::nullopt);
            have_states = true;
        } else if (tok.size() == 2 && (tok[0] == "q0" || tok[0] == "q1" || tok[0] == "qinit")) {
            const auto s = parse_state(tok[1], line);
            if (tok[0] == "q0")
                tm.q0 = s, have_q0 = true;
            else if (tok[0] == "q1")
                tm.q1 = s, have_q1 = true;
            else
                tm.qinit = s;
        } else if (tok.size() == 6 && tok[2] == "->") {
            if (!have_states)
                throw GraphParseError(line, "transition before 'states'");
            const auto from = parse_state(tok[0], line);
            const auto reads = parse_mask(tok[1], '0', '1', line);
            Transition t;
            t.next = parse_state(tok[3], line);
            t.write = static_cast<std::uint8_t>(parse_mask(tok[4], '0', '1', line));
            t.move = static_cast<std::uint8_t>(parse_mask(tok[5], 'L', 'R', line));
            if (from >= tm.states || t.next >= tm.states)
                throw GraphParseError(line, "state id out of range");
            auto &slot = tm.at(from, reads);
            if (slot)
                throw GraphParseError(line, "duplicate transition");
            slot = t;
        } else {
            throw GraphParseError(line, "unrecognised line");
        }
    }
    if (!have_header || !have_states || !have_q0 || !have_q1)
        throw GraphParseError(line, "missing header, states, q0 or q1");
    try {
        tm.validate();
    } catch (const std::invalid_argument &e) {
        throw GraphParseError(line, e.what());
    }
    return tm;
}

void write_machine(std::ostream &out, const TuringMachine &tm)
{
    out << "tm 1\nstates " << tm.states << "\nq0 " << tm.q0 << "\nq1 " << tm.q1 << '\n';
    if (tm.qinit)
        out << "qinit " << *tm.qinit << '\n';
    for (std::uint32_t s = 0; s < tm.states; ++s)
        for (unsigned r = 0; r < 32; ++r)
            if (const auto &t = tm.at(s, r))
                out << s << ' ' << mask_string(r, '0', '1') << " -> " << t->next << ' '
                    << mask_string(t->write, '0', '1') << ' ' << mask_string(t->move, 'L', 'R') << '\n';
}

TuringMachine load_machine(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return read_machine(in);
}

void save_machine(const std::string &path, const TuringMachine &tm)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    write_machine(out, tm);
}

// ---- builder ----

MachineBuilder::MachineBuilder(std::uint32_t state_budget) : budget_(state_budget), rules_(2)
{
    if (state_budget < 2)
        throw MachineBuildError("state budget below two");
}

std::uint32_t MachineBuilder::state()
{
    if (rules_.size() >= budget_)
        throw MachineBuildError("state budget of " + std::to_string(budget_) + " exceeded");
    rules_.emplace_back();
    return static_cast<std::uint32_t>(rules_.size() - 1);
}

std::uint32_t MachineBuilder::initial_state()
{
    if (!qinit_)
        qinit_ = state();
    return *qinit_;
}

MachineBuilder &MachineBuilder::on(std::uint32_t from, Cond cond, std::uint32_t to, Writes writes, Moves moves)
{
    if (from >= rules_.size() || to >= rules_.size())
        throw MachineBuildError("rule refers to an unknown state");
    if (from == halt_state())
        throw MachineBuildError("rules may not leave q1");
    rules_[from].push_back({cond, to, writes, moves});
    return *this;
}

void MachineBuilder::move_until_blank(std::uint32_t from, unsigned tape, std::uint32_t to)
{
    on(from, Cond{}.is(tape, true), from, {}, Moves{}.r(tape));
    on(from, Cond{}.is(tape, false), to);
}

void MachineBuilder::copy_tape(std::uint32_t from, unsigned src, unsigned dst, std::uint32_t to)
{
    on(from, Cond{}.is(src, true), from, Writes{}.put(dst, true), Moves{}.r(src).r(dst));
    on(from, Cond{}.is(src, false), to);
}

void MachineBuilder::increment_unary(std::uint32_t from, unsigned tape, std::uint32_t to)
{
    on(from, Cond{}.is(tape, true), from, {}, Moves{}.r(tape));
    on(from, Cond{}.is(tape, false), to, Writes{}.put(tape, true));
}

void MachineBuilder::compare_unary(std::uint32_t from, unsigned a, unsigned b, std::uint32_t lt, std::uint32_t eq,
                                   std::uint32_t gt)
{
    on(from, Cond{}.is(a, true).is(b, true), from, {}, Moves{}.r(a).r(b));
    on(from, Cond{}.is(a, false).is(b, true), lt);
    on(from, Cond{}.is(a, false).is(b, false), eq);
    on(from, Cond{}.is(a, true).is(b, false), gt);
}

void MachineBuilder::branch_on_symbol(std::uint32_t from, unsigned tape, std::uint32_t if0, std::uint32_t if1)
{
    on(from, Cond{}.is(tape, false), if0);
    on(from, Cond{}.is(tape, true), if1);
}

void MachineBuilder::emit_unary(std::uint32_t from, unsigned tape, std::size_t k, std::uint32_t to)
{
    if (k == 0) {
        on(from, Cond{}, to);
        return;
    }
    std::uint32_t cur = from;
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint32_t next = i + 1 == k ? to : state();
        on(cur, Cond{}, next, Writes{}.put(tape, true), Moves{}.r(tape));
        cur = next;
    }
}

TuringMachine MachineBuilder::build() const
{
    TuringMachine tm;
    tm.states = static_cast<std::uint32_t>(rules_.size());
    tm.q0 = start();
    tm.q1 = halt_state();
    tm.qinit = qinit_;
    tm.table.assign(static_cast<std::size_t>(tm.states) * 32, std::nullopt);
    for (std::uint32_t s = 0; s < tm.states; ++s)
        for (unsigned r = 0; r < 32; ++r) {
            if (r & 16u)
                continue;  // tape 5 always reads 0
            for (const Rule &rule : rules_[s]) {
                if ((r & rule.cond.mask) != rule.cond.value)
                    continue;
                Transition t;
                t.next = rule.to;
                t.write = static_cast<std::uint8_t>((rule.writes.value & rule.writes.mask) |
                                                    (r & ~rule.writes.mask & 31u));
                t.move = rule.moves.right;
                tm.at(s, r) = t;
                break;
            }
        }
    tm.validate();
    return tm;
}

} // namespace agentsim
