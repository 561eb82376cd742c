#pragma once

#include <cstdint>

#include "pzsim/errors.hpp"

namespace pzsim {

// Behavioral model of the conditioning chain: full-wave bridge rectifier
// into an input capacitor, undervoltage-lockout hysteresis, and an averaged
// (non-switching) buck stage clamped at its output setpoint, feeding an
// output capacitor (optionally paralleled by a supercapacitor) and a
// resistive load.

struct RectifierSpec {
    double diode_drop_v = 0.4; // per conducting diode; two conduct per half-cycle

    void validate() const;
};

struct UvloSpec {
    double rising_v = 4.04;
    double falling_v = 3.67;

    void validate() const; // rising > falling > 0
};

struct BuckSpec {
    double output_setpoint_v = 3.6; // one of 1.8, 2.5, 3.3, 3.6
    double max_output_current_a = 0.1;
    double input_min_v = 2.7;
    double input_max_v = 20.0;
    double efficiency = 0.85;

    void validate() const;
};

struct StorageSpec {
    double input_cap_f = 0.0;
    double output_cap_f = 0.0;
    double supercap_f = 0.0; // 0 disables

    double output_bus_f() const { return output_cap_f + supercap_f; }
    void validate() const;
};

struct PowerStageSpecs {
    RectifierSpec rectifier;
    UvloSpec uvlo;
    BuckSpec buck;
    StorageSpec storage;

    void validate() const;
};

enum class StageMode : std::uint8_t {
    uvlo_sleep = 0,
    transfer = 1,
    regulated_idle = 2,
};

// Cumulative energy bookkeeping plus the current stored energy of the two
// capacitor banks. Per step and over a whole run,
//   harvested_in = diode_loss + converter_loss + delivered + delta(stored).
struct EnergyBreakdown {
    double harvested_in_j = 0.0;  // at the bridge input terminals
    double diode_loss_j = 0.0;
    double converter_loss_j = 0.0;
    double delivered_j = 0.0;     // dissipated in the output load
    double stored_j = 0.0;        // 1/2 C_in v_in^2 + 1/2 C_bus v_out^2
};

struct PowerStageState {
    StageMode mode = StageMode::uvlo_sleep;
    double v_input_cap = 0.0;
    double v_output = 0.0;
    EnergyBreakdown ledger;
};

enum class RectifierConduction {
    blocked,
    positive,
    negative,
};

// Conducting iff |v_piezo| > v_input_cap + 2 * diode_drop.
RectifierConduction rectifier_step(double v_piezo, double v_input_cap,
                                   const RectifierSpec& spec);

// Hysteresis: sleep -> transfer at v >= rising; any awake mode -> sleep at
// v <= falling; otherwise unchanged.
StageMode uvlo_step(StageMode mode, double v_input_cap, const UvloSpec& spec);

// One averaged converter step: when awake, moves charge from the input cap
// toward the output bus to hold v_output at the setpoint (never above it),
// applying the efficiency to the transferred energy and capping the output
// current; the load then discharges the bus. Toggles transfer /
// regulated_idle as regulation demands. Sleep mode only discharges the bus.
PowerStageState buck_step(const PowerStageState& state, const PowerStageSpecs& specs,
                          double load_resistance_ohm, double dt_s);

// Accumulates rectified current on the input capacitor. The bridge cannot
// pull charge back, so negative current is ignored; the voltage never drops
// below zero. harvested_in grows by the trapezoidal v*i*dt (cap-side; the
// caller accounts diode drops separately).
PowerStageState charge_input_cap(double i_rect_a, const PowerStageState& state,
                                 const StorageSpec& storage, double dt_s);

} // namespace pzsim
