#pragma once

#include "agentsim/graph.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace agentsim {

// Tape symbols. The machine reads blank as 0.
enum Sym : std::uint8_t { Blank = 0, Zero = 1, One = 2 };

inline constexpr unsigned kTapes = 5;
inline constexpr std::uint32_t kTmStepLimit = 1'000'000;

// Written symbols and head moves, one bit per tape (bit j-1 for tape j).
// A move bit of 1 means R.
struct Transition {
    std::uint32_t next = 0;
    std::uint8_t write = 0;
    std::uint8_t move = 0;

    friend bool operator==(const Transition &, const Transition &) = default;
};

// Five-tape machine over {0,1,blank}. `qinit`, when present, replaces q0 on
// the agent's first activation.
struct TuringMachine {
    std::uint32_t states = 2;
    std::uint32_t q0 = 0;
    std::uint32_t q1 = 1;
    std::optional<std::uint32_t> qinit;
    std::vector<std::optional<Transition>> table;  // states x 32, keyed by the read mask

    const std::optional<Transition> &at(std::uint32_t state, unsigned reads) const
    {
        return table[static_cast<std::size_t>(state) * 32 + reads];
    }
    std::optional<Transition> &at(std::uint32_t state, unsigned reads)
    {
        return table[static_cast<std::size_t>(state) * 32 + reads];
    }
    // Throws std::invalid_argument on out-of-range ids or rules leaving q1.
    void validate() const;

    friend bool operator==(const TuringMachine &, const TuringMachine &) = default;
};

TuringMachine read_machine(std::istream &in);
void write_machine(std::ostream &out, const TuringMachine &tm);
TuringMachine load_machine(const std::string &path);
void save_machine(const std::string &path, const TuringMachine &tm);

class TmError : public std::runtime_error {
public:
    enum class Kind { MissingTransition, ReadOnly, Overflow, StepLimit, BadOutput, Halted };
    TmError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct Tapes {
    std::array<std::vector<std::uint8_t>, kTapes> cells;  // fixed lengths: the tape bounds
    std::array<std::size_t, kTapes> head{};

    // Read mask as seen by the machine; tape 5 is write-only and reads as 0.
    unsigned reads() const;
    friend bool operator==(const Tapes &, const Tapes &) = default;
};

// Applies one transition. Writes equal to the read value leave the cell as
// it is; tapes 3 and 4 reject any other write. A transition into q1 ends the
// activation, so its head moves are not carried out.
void tm_step(const TuringMachine &tm, Tapes &tapes, std::uint32_t &state);

// Unary codes: k ones. Ports on tapes 4 and 5 are stored as port + 1 ones.
std::vector<std::uint8_t> encode_unary(std::size_t k);
std::size_t decode_unary(const std::vector<std::uint8_t> &cells);

// Tapes at the start of an activation: tape 1 as given, tape 2 from the
// storage bits, tape 3 = degree, tape 4 = pin (empty when initial), tape 5
// blank. Every tape has `cells` cells.
Tapes initial_tapes(const std::vector<std::uint8_t> &tape1, std::uint64_t storage, unsigned storage_bits,
                    Port degree, Port pin, std::size_t cells);
std::uint32_t start_state(const TuringMachine &tm, Port pin);
// Out port from tape 5, or nullopt for halt. Throws BadOutput when >= degree.
std::optional<Port> decode_output(const std::vector<std::uint8_t> &tape5, Port degree);
std::uint64_t storage_from_tape(const std::vector<std::uint8_t> &tape2, unsigned storage_bits);

struct ActivationResult {
    std::vector<std::uint8_t> tape1;
    std::uint64_t storage = 0;
    std::optional<Port> out;  // nullopt: halt
    std::uint64_t tm_steps = 0;
};

ActivationResult run_activation(const TuringMachine &tm, const std::vector<std::uint8_t> &tape1,
                                std::uint64_t storage, unsigned storage_bits, Port degree, Port pin,
                                std::size_t cells, std::uint64_t step_limit = kTmStepLimit);

class MachineBuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Read condition: required value per constrained tape.
struct Cond {
    std::uint8_t mask = 0;
    std::uint8_t value = 0;
    Cond &is(unsigned tape, bool v)
    {
        mask |= std::uint8_t(1u << (tape - 1));
        value = v ? std::uint8_t(value | (1u << (tape - 1))) : std::uint8_t(value & ~(1u << (tape - 1)));
        return *this;
    }
};
// Writes: tapes not listed rewrite what they read.
struct Writes {
    std::uint8_t mask = 0;
    std::uint8_t value = 0;
    Writes &put(unsigned tape, bool v)
    {
        mask |= std::uint8_t(1u << (tape - 1));
        value = v ? std::uint8_t(value | (1u << (tape - 1))) : std::uint8_t(value & ~(1u << (tape - 1)));
        return *this;
    }
};
// Moves: tapes not listed move left.
struct Moves {
    std::uint8_t right = 0;
    Moves &r(unsigned tape)
    {
        right |= std::uint8_t(1u << (tape - 1));
        return *this;
    }
};

// Rule-based authoring. Rules of a state are tried in insertion order and
// the first one matching a read mask fills that table entry.
class MachineBuilder {
public:
    explicit MachineBuilder(std::uint32_t state_budget = 64);

    std::uint32_t state();
    std::uint32_t halt_state() const noexcept { return 1; }
    std::uint32_t start() const noexcept { return 0; }
    // Declares a separate start state for the first activation.
    std::uint32_t initial_state();

    MachineBuilder &on(std::uint32_t from, Cond cond, std::uint32_t to, Writes writes = {}, Moves moves = {});

    // Macros. Each adds rules to `from` (and to fresh states it allocates).
    // Moves `tape` right while it reads 1; at the first 0 goes to `to`.
    void move_until_blank(std::uint32_t from, unsigned tape, std::uint32_t to);
    // Writes a 1 on `dst` for every 1 on `src`, both heads moving right.
    void copy_tape(std::uint32_t from, unsigned src, unsigned dst, std::uint32_t to);
    // Skips the ones on `tape` and writes one more.
    void increment_unary(std::uint32_t from, unsigned tape, std::uint32_t to);
    // Scans `a` and `b` together from their current cells.
    void compare_unary(std::uint32_t from, unsigned a, unsigned b, std::uint32_t lt, std::uint32_t eq,
                       std::uint32_t gt);
    void branch_on_symbol(std::uint32_t from, unsigned tape, std::uint32_t if0, std::uint32_t if1);
    // Writes k ones on `tape` moving right.
    void emit_unary(std::uint32_t from, unsigned tape, std::size_t k, std::uint32_t to);

    TuringMachine build() const;

private:
    struct Rule {
        Cond cond;
        std::uint32_t to;
        Writes writes;
        Moves moves;
    };
    std::uint32_t budget_;
    std::optional<std::uint32_t> qinit_;
    std::vector<std::vector<Rule>> rules_;
};

// Sample machines and the rules they implement.
TuringMachine bouncer_machine();          // out = pin; first activation: port 0
TuringMachine port_zero_walker_machine(); // storage flag set: halt; else set it, out = 0
TuringMachine rotor_walker_machine();     // out = (pin + 1) mod degree; first activation: port 0

unsigned sample_storage_bits(const std::string &name);
TuringMachine sample_machine(const std::string &name);
std::vector<std::string> sample_machine_names();

// Direct rule of a sample machine: out port (nullopt: halt) and new storage.
struct ReferenceStep {
    std::optional<Port> out;
    std::uint64_t storage = 0;
};
ReferenceStep sample_reference(const std::string &name, std::uint64_t storage, Port degree, Port pin);

} // namespace agentsim
