// Acceptance gate: one line per criterion, exit status 1 if any fails.

#include "agentsim/simulation.hpp"
#include "agentsim/tasks.hpp"

#include <iostream>
#include <sstream>

using namespace agentsim;

namespace {

int failures = 0;

void line(int id, bool pass, const std::string &what, const std::string &detail)
{
    if (!pass)
        ++failures;
    std::cout << "criterion " << id << " [" << (pass ? "PASS" : "FAIL") << "] " << what << ": " << detail << std::endl;
}

std::string summary(const VerifyReport &r)
{
    std::ostringstream s;
    s << r.cases << " cases, " << static_cast<int>(r.seconds + 0.5) << " s";
    for (const auto &n : r.notes)
        s << "; " << n;
    if (!r.ok())
        s << "; first violation: " << r.violations.front() << " (" << r.violations.size() << " total)";
    return s.str();
}

bool has(const VerifyReport &r, const std::string &needle)
{
    for (const auto &v : r.violations)
        if (v.find(needle) != std::string::npos)
            return true;
    return false;
}

} // namespace

int main()
{
    const auto corpus = build_corpus(CorpusSpec{});
    VerifyOptions o;
    std::cout << "corpus: " << corpus.size() << " graphs" << std::endl;

    const auto dfs = verify(VerifyTarget::Dldfs, corpus, o);
    line(1, dfs.ok(), "dldfs first-visit order equals the oracle preorder", summary(dfs));

    const auto lemma = verify(VerifyTarget::Lemma1, corpus, o);
    line(2, lemma.ok(), "check_lemma1 reports no violations on the corpus", summary(lemma));

    const auto rp = verify(VerifyTarget::Rpath, corpus, o);
    line(3, rp.ok() && rp.cases >= 10'000, "R-path strong consistency and shadow model under fuzzing", summary(rp));

    {
        std::size_t checks = 0;
        for (const auto &n : rp.notes) {
            const auto at = n.find(" operations, ");
            if (at != std::string::npos)
                checks = std::stoull(n.substr(at + 13));
        }
        const bool pass = checks > 0 && !has(rp, "branching");
        line(4, pass, "branching node red iff the yellow port precedes the back port",
             std::to_string(checks) + " branching configurations checked within criterion 3's runs");
    }

    const auto succ = verify(VerifyTarget::Successor, corpus, o);
    line(5, succ.ok(), "successor walk is the preorder, successor then predecessor is identity (n <= 16)",
         summary(succ));

    const auto budget = verify(VerifyTarget::Budget, corpus, o);
    line(6, budget.ok(), "memory and storage widths constant in n, one-bit memory exactly 1", summary(budget));

    const auto sc = verify(VerifyTarget::SimConst, corpus, o);
    line(7, sc.ok() && sc.seconds < 600, "Sim_const lock step with the direct TM agent (n <= 12)", summary(sc));

    {
        const auto ob = verify(VerifyTarget::SimOneBit, corpus, o);
        // Stated closed form for the moves of one simulated step.
        std::ostringstream d;
        bool counts = true;
        const auto g = generate({Family::RandomConnected, 20, 4, 5});
        for (unsigned c : {2u, 4u, 8u}) {
            OneBitOptions so;
            so.max_sim_steps = 50;
            const auto r = sim_onebit(std::make_shared<const NativeRotorProgram>(c), g, 0, so);
            const std::uint64_t stated = 2 * (c - 1) + 2;
            bool all = !r.step_moves.empty();
            for (auto m : r.step_moves)
                all &= m == stated;
            counts &= all;
            d << "c=" << c << ": measured " << (r.step_moves.empty() ? 0 : r.step_moves.front()) << " moves/step, stated "
              << stated << "; ";
        }
        const bool pass = ob.ok() && counts;
        line(8, pass, "Sim_1 invariants, final states and moves per step = 2(c-1)+2",
             "invariants and final states " + std::string(ob.ok() ? "hold" : "FAIL") + " (" + summary(ob) + "); " +
                 d.str() + (counts ? "" : "measured count is 2c-1 (see decisions ledger)"));
    }

    const auto ch = verify(VerifyTarget::Chain, corpus, o);
    line(9, ch.ok() && ch.seconds < 1800, "Sim_1 over Sim_const matches direct execution (n <= 6)", summary(ch));

    const auto par = verify(VerifyTarget::Parity, corpus, o);
    line(10, par.ok(), "parity output equals n mod 2 on 100 random graphs", summary(par));

    const auto sl = verify(VerifyTarget::Slope, corpus, o);
    line(11, sl.ok(), "dldfs log-log move slope <= 5 with no truncated run", summary(sl));

    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
