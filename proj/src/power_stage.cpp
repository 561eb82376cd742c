#include "pzsim/power_stage.hpp"

#include <algorithm>
#include <cmath>

namespace pzsim {

namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw ArgumentError(what);
}

// Output regulation hysteresis: the converter re-engages once the bus has
// sagged by this fraction of the setpoint, mirroring the on/off regulation
// of the real chip without modeling switching cycles.
constexpr double kRegulationBand = 0.002;

double cap_energy(double c_f, double v)
{
    return 0.5 * c_f * v * v;
}

} // namespace

void RectifierSpec::validate() const
{
    require(diode_drop_v >= 0, "diode drop must be >= 0");
}

void UvloSpec::validate() const
{
    require(falling_v > 0, "UVLO falling threshold must be > 0");
    require(rising_v > falling_v, "UVLO hysteresis window must be strictly positive");
}

void BuckSpec::validate() const
{
    const double setpoints[] = {1.8, 2.5, 3.3, 3.6};
    bool ok = false;
    for (double s : setpoints)
        ok = ok || std::abs(output_setpoint_v - s) < 1e-9;
    require(ok, "output setpoint must be one of 1.8, 2.5, 3.3, 3.6 V");
    require(max_output_current_a > 0, "max output current must be > 0");
    require(efficiency > 0 && efficiency <= 1, "efficiency must lie in (0, 1]");
    require(input_min_v < input_max_v, "input_min must be below input_max");
}

void StorageSpec::validate() const
{
    require(input_cap_f > 0, "input capacitance must be > 0");
    require(output_cap_f > 0, "output capacitance must be > 0");
    require(supercap_f >= 0, "supercap capacitance must be >= 0");
}

void PowerStageSpecs::validate() const
{
    rectifier.validate();
    uvlo.validate();
    buck.validate();
    storage.validate();
}

RectifierConduction rectifier_step(double v_piezo, double v_input_cap,
                                   const RectifierSpec& spec)
{
    spec.validate();
    require(v_input_cap >= 0, "input cap voltage must be >= 0");
    if (std::abs(v_piezo) > v_input_cap + 2.0 * spec.diode_drop_v)
        return v_piezo > 0 ? RectifierConduction::positive : RectifierConduction::negative;
    return RectifierConduction::blocked;
}

StageMode uvlo_step(StageMode mode, double v_input_cap, const UvloSpec& spec)
{
    spec.validate();
    if (mode == StageMode::uvlo_sleep)
        return v_input_cap >= spec.rising_v ? StageMode::transfer : StageMode::uvlo_sleep;
    return v_input_cap <= spec.falling_v ? StageMode::uvlo_sleep : mode;
}

PowerStageState buck_step(const PowerStageState& state, const PowerStageSpecs& specs,
                          double load_resistance_ohm, double dt_s)
{
    specs.validate();
    if (!(dt_s > 0))
        throw ArgumentError("buck step requires dt > 0");
    require(load_resistance_ohm > 0, "load resistance must be > 0");

    const BuckSpec& buck = specs.buck;
    const double c_in = specs.storage.input_cap_f;
    const double c_bus = specs.storage.output_bus_f();
    const double v_set = buck.output_setpoint_v;

    PowerStageState s = state;

    if (s.mode != StageMode::uvlo_sleep) {
        if (s.mode == StageMode::regulated_idle &&
            s.v_output <= v_set * (1.0 - kRegulationBand))
            s.mode = StageMode::transfer;

        if (s.mode == StageMode::transfer) {
            if (s.v_output >= v_set) {
                s.mode = StageMode::regulated_idle;
            } else if (s.v_input_cap >= buck.input_min_v &&
                       s.v_input_cap <= buck.input_max_v) {
                // Charge needed to reach the setpoint, capped by the output
                // current limit and by the energy left on the input cap.
                double dq = std::min(c_bus * (v_set - s.v_output),
                                     buck.max_output_current_a * dt_s);
                double v_out_new = s.v_output + dq / c_bus;
                double e_out = cap_energy(c_bus, v_out_new) - cap_energy(c_bus, s.v_output);
                double e_in = e_out / buck.efficiency;
                const double e_avail = cap_energy(c_in, s.v_input_cap);
                if (e_in > e_avail) {
                    e_in = e_avail;
                    e_out = e_in * buck.efficiency;
                    v_out_new = std::sqrt(s.v_output * s.v_output + 2.0 * e_out / c_bus);
                }
                const double v_in_sq = s.v_input_cap * s.v_input_cap - 2.0 * e_in / c_in;
                s.v_input_cap = std::sqrt(std::max(0.0, v_in_sq));
                s.v_output = std::min(v_out_new, v_set);
                s.ledger.converter_loss_j += e_in - e_out;
                if (s.v_output >= v_set)
                    s.mode = StageMode::regulated_idle;
            }
        }
    }

    // Load discharge of the output bus, integrated exactly over the step.
    const double v_before = s.v_output;
    const double v_after = v_before * std::exp(-dt_s / (load_resistance_ohm * c_bus));
    s.v_output = v_after;
    s.ledger.delivered_j += cap_energy(c_bus, v_before) - cap_energy(c_bus, v_after);

    s.ledger.stored_j = cap_energy(c_in, s.v_input_cap) + cap_energy(c_bus, s.v_output);
    return s;
}

PowerStageState charge_input_cap(double i_rect_a, const PowerStageState& state,
                                 const StorageSpec& storage, double dt_s)
{
    storage.validate();
    if (!(dt_s > 0))
        throw ArgumentError("charge step requires dt > 0");

    PowerStageState s = state;
    // The bridge cannot pull charge back out of the cap.
    if (i_rect_a <= 0)
        return s;

    const double v_old = s.v_input_cap;
    const double v_new = v_old + i_rect_a * dt_s / storage.input_cap_f;
    s.v_input_cap = v_new;
    s.ledger.harvested_in_j += 0.5 * (v_old + v_new) * i_rect_a * dt_s;
    s.ledger.stored_j = cap_energy(storage.input_cap_f, v_new) +
                        cap_energy(storage.output_bus_f(), s.v_output);
    return s;
}

} // namespace pzsim
