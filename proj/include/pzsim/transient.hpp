#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "pzsim/harvester.hpp"
#include "pzsim/parallel.hpp"
#include "pzsim/power_stage.hpp"

namespace pzsim {

// Fixed-step co-simulation of harvester + electrical chain. Per step:
//   1. UVLO mode and rectifier conduction are evaluated once, at the step
//      boundary, from the state at the start of the step.
//   2. The mechanical pair (x, x') advances with classical RK4, the piezo
//      voltage held frozen across the step.
//   3. Capacitor states advance semi-implicitly with exact charge/energy
//      bookkeeping (diode switching inside a step resolves at the boundary).
// The scheme is deterministic: identical inputs give bit-identical traces.

struct SimConfig {
    double dt_s = 0.0;
    double duration_s = 0.0;
    int record_stride = 1; // store every Nth step

    void validate() const;
};

struct ResistiveChain {
    LoadSpec load;
};

struct PowerStageChain {
    PowerStageSpecs specs;
    double load_resistance_ohm = 0.0;
};

using Chain = std::variant<ResistiveChain, PowerStageChain>;

// Sampled time series. mode[i] is the controller mode in effect over
// [t[i], t[i+1]). p_diode / p_converter are average powers over the window
// ending at t[i]; the other power channels are instantaneous. e_stored is
// the total stored energy (mechanical + capacitive) at t[i].
struct Trace {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> xdot;
    std::vector<double> v_piezo;
    std::vector<double> v_input_cap;
    std::vector<double> v_output;
    std::vector<std::uint8_t> mode;
    std::vector<double> p_input;
    std::vector<double> p_mech;
    std::vector<double> p_diode;
    std::vector<double> p_converter;
    std::vector<double> p_delivered;
    std::vector<double> e_stored;

    std::size_t size() const { return t.size(); }
};

struct EnergyLedger {
    double input_work_j = 0.0;
    double mech_dissipated_j = 0.0;
    double diode_loss_j = 0.0;
    double converter_loss_j = 0.0;
    double delivered_j = 0.0;
    double stored_final_j = 0.0;
    double residual_j = 0.0; // input - (sinks + delta stored)
};

struct SteadyStateMetrics {
    double v_rms = 0.0;
    double p_avg_w = 0.0;
};

// Throws ConfigError when dt exceeds 1/(200 f), naming the limit.
Trace run_transient(const LumpedParams& params, const Chain& chain,
                    const DriveSpec& drive, const SimConfig& cfg);

// One run per drive point; points are independent, so the batch runs as an
// OpenMP kernel (or serially for the reference path). Output order matches
// the input order regardless of scheduling.
std::vector<Trace> run_transient_batch(const LumpedParams& params, const Chain& chain,
                                       std::span<const DriveSpec> drives,
                                       const SimConfig& cfg,
                                       Exec exec = Exec::parallel);

// Trapezoidal integration of the recorded power channels.
EnergyLedger energy_audit(const Trace& trace);

// RMS of v_output and mean delivered power over exactly the last n_cycles
// whole drive periods. Throws ArgumentError if the trace is shorter than
// 2 * n_cycles periods.
SteadyStateMetrics steady_state_metrics(const Trace& trace, int n_cycles,
                                        double drive_freq_hz);

} // namespace pzsim
