#pragma once

#include <cstddef>
#include <functional>

#include "rotconv/diagnostics/ledger.hpp"
#include "rotconv/diagnostics/row.hpp"
#include "rotconv/model/stepper.hpp"

namespace rotconv {

/// Optional observers of a run. Rows reach `on_row` as soon as they are
/// sampled, so a sink has the partial series if the run aborts.
struct SimulationSinks {
    std::function<void(const DiagnosticsRow&)> on_row;
    /// Called every `snapshot_every` steps (and at the final step) when nonzero.
    std::function<void(const ModelState&, std::size_t step)> on_snapshot;
    std::size_t snapshot_every = 0;
    /// Called after every step, including step 0 with the initial state.
    std::function<void(const ModelState&, std::size_t step)> on_step;
};

struct SimulationResult {
    ModelState final_state;
    DiagnosticsSeries rows;
};

/// Advances `init` to T, sampling diagnostics at step 0 and every
/// `sample_every` steps. BlowUp propagates after the partial rows are delivered.
inline SimulationResult simulate(const ModelState& init, const Params& p, const SimulationSinks& sinks = {}) {
    check_state(init);
    ImexStepper stepper(init.grid(), p);
    LedgerAccumulator ledger(p);
    SimulationResult out;
    const std::size_t nsteps = p.steps();
    const std::size_t every = static_cast<std::size_t>(p.sample_every);

    auto sample = [&](const ModelState& s) {
        DiagnosticsRow r = measure(s, p);
        ledger.add(r);
        out.rows.push_back(r);
        if (sinks.on_row) sinks.on_row(r);
    };

    ModelState s = init;
    sample(s);
    if (sinks.on_step) sinks.on_step(s, 0);
    for (std::size_t n = 1; n <= nsteps; ++n) {
        ModelState next = stepper.step(s);
        // exact multiple of dt keeps sample times on a uniform lattice
        next.t = init.t + static_cast<double>(n) * p.dt;
        s = std::move(next);
        if (sinks.on_step) sinks.on_step(s, n);
        if (n % every == 0) sample(s);
        if (sinks.on_snapshot && sinks.snapshot_every > 0 && (n % sinks.snapshot_every == 0 || n == nsteps))
            sinks.on_snapshot(s, n);
    }
    out.final_state = std::move(s);
    return out;
}

} // namespace rotconv
