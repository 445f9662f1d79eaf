#include "agentsim/turing.hpp"

namespace agentsim {

// On the first activation tape 4 is empty; qinit emits port 0 if there is one.
TuringMachine bouncer_machine()
{
    MachineBuilder b;
    const auto q1 = b.halt_state();
    const auto qi = b.initial_state();
    b.on(qi, Cond{}.is(3, true), q1, Writes{}.put(5, true));
    b.on(qi, Cond{}, q1);
    b.copy_tape(b.start(), 4, 5, q1);
    return b.build();
}

TuringMachine port_zero_walker_machine()
{
    MachineBuilder b;
    const auto q0 = b.start(), q1 = b.halt_state();
    b.on(q0, Cond{}.is(2, true), q1);
    b.on(q0, Cond{}.is(3, true), q1, Writes{}.put(2, true).put(5, true));
    b.on(q0, Cond{}, q1, Writes{}.put(2, true));
    return b.build();
}

// Scans tapes 3 and 4 together, copying the pin's ones to tape 5. One more 1
// gives pin + 1; when the degree runs out at the same cell the ones are wiped
// back to the first, found through a marker in tape 2's cell 0.
TuringMachine rotor_walker_machine()
{
    MachineBuilder b;
    const auto q0 = b.start(), q1 = b.halt_state();
    const auto scan = b.state(), wipe = b.state();
    const Moves all = Moves{}.r(2).r(3).r(4).r(5);

    b.on(q0, Cond{}.is(4, false).is(3, true), q1, Writes{}.put(5, true));
    b.on(q0, Cond{}.is(4, false), q1);
    b.on(q0, Cond{}, scan, Writes{}.put(2, true).put(5, true), all);

    b.on(scan, Cond{}.is(4, true), scan, Writes{}.put(5, true), all);
    b.on(scan, Cond{}.is(3, true), q1, Writes{}.put(5, true));
    b.on(scan, Cond{}, wipe);

    b.on(wipe, Cond{}.is(2, false), wipe, Writes{}.put(5, false));
    b.on(wipe, Cond{}, q1, Writes{}.put(2, false).put(5, true));
    return b.build();
}

std::vector<std::string> sample_machine_names() { return {"bouncer", "port-zero-walker", "rotor-walker"}; }

unsigned sample_storage_bits(const std::string &name)
{
    if (name == "port-zero-walker")
        return 1;
    if (name == "bouncer" || name == "rotor-walker")
        return 0;
    throw std::invalid_argument("unknown sample machine '" + name + "'");
}

TuringMachine sample_machine(const std::string &name)
{
    if (name == "bouncer")
        return bouncer_machine();
    if (name == "port-zero-walker")
        return port_zero_walker_machine();
    if (name == "rotor-walker")
        return rotor_walker_machine();
    throw std::invalid_argument("unknown sample machine '" + name + "'");
}

ReferenceStep sample_reference(const std::string &name, std::uint64_t storage, Port degree, Port pin)
{
    ReferenceStep r;
    r.storage = storage;
    if (name == "port-zero-walker") {
        if (storage & 1u)
            return r;
        r.storage |= 1u;
        if (degree > 0)
            r.out = 0;
        return r;
    }
    if (name != "bouncer" && name != "rotor-walker")
        throw std::invalid_argument("unknown sample machine '" + name + "'");
    if (pin < 0) {
        if (degree > 0)
            r.out = 0;
        return r;
    }
    r.out = name == "bouncer" ? pin : (pin + 1) % degree;
    return r;
}

} // namespace agentsim
