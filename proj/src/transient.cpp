#include "pzsim/transient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pzsim/units.hpp"

namespace pzsim {

namespace {

struct MechState {
    double x = 0.0;
    double xd = 0.0;
};

// RK4 on (x, x') with the piezo voltage frozen across the step.
MechState rk4_step(const MechState& s, double t, double dt, double mass, double damping,
                   double stiffness, double theta, double v_piezo, double accel_amp,
                   double omega)
{
    const auto rhs = [&](double tt, double x, double xd) {
        const double force = -mass * accel_amp * std::sin(omega * tt);
        return (force - damping * xd - stiffness * x - theta * v_piezo) / mass;
    };

    const double k1x = s.xd;
    const double k1v = rhs(t, s.x, s.xd);
    const double k2x = s.xd + 0.5 * dt * k1v;
    const double k2v = rhs(t + 0.5 * dt, s.x + 0.5 * dt * k1x, s.xd + 0.5 * dt * k1v);
    const double k3x = s.xd + 0.5 * dt * k2v;
    const double k3v = rhs(t + 0.5 * dt, s.x + 0.5 * dt * k2x, s.xd + 0.5 * dt * k2v);
    const double k4x = s.xd + dt * k3v;
    const double k4v = rhs(t + dt, s.x + dt * k3x, s.xd + dt * k3v);

    MechState out;
    out.x = s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    out.xd = s.xd + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    return out;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y,
                 std::size_t first = 0)
{
    double sum = 0.0;
    for (std::size_t i = first + 1; i < t.size(); ++i)
        sum += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return sum;
}

} // namespace

void SimConfig::validate() const
{
    if (!(dt_s > 0))
        throw ArgumentError("sim dt must be > 0");
    if (!(duration_s >= dt_s))
        throw ArgumentError("sim duration must be at least one step");
    if (record_stride < 1)
        throw ArgumentError("record stride must be >= 1");
}

Trace run_transient(const LumpedParams& params, const Chain& chain,
                    const DriveSpec& drive, const SimConfig& cfg)
{
    params.validate();
    drive.validate();
    cfg.validate();

    const double dt_limit = 1.0 / (200.0 * drive.frequency_hz);
    if (cfg.dt_s > dt_limit) {
        std::ostringstream msg;
        msg << "sim dt = " << cfg.dt_s << " s exceeds the limit 1/(200*f) = " << dt_limit
            << " s for drive frequency " << drive.frequency_hz << " Hz";
        throw ConfigError(msg.str());
    }

    const bool resistive = std::holds_alternative<ResistiveChain>(chain);
    LoadSpec piezo_load = LoadSpec::open_circuit();
    PowerStageSpecs stage_specs;
    double stage_load_ohm = 0.0;
    if (resistive) {
        piezo_load = std::get<ResistiveChain>(chain).load;
        piezo_load.validate();
    } else {
        const auto& pc = std::get<PowerStageChain>(chain);
        stage_specs = pc.specs;
        stage_specs.validate();
        stage_load_ohm = pc.load_resistance_ohm;
        if (!(stage_load_ohm > 0))
            throw ArgumentError("power stage load resistance must be > 0");
    }

    const double mass = params.total_mass_kg();
    const double damping = params.damping_n_s_m();
    const double stiffness = params.k_eff_n_m;
    const double theta = params.theta_n_v;
    const double cp = params.c_p_f;
    const double omega = hz_to_rad_s(drive.frequency_hz);
    const double accel = drive.accel_amplitude_m_s2;
    const double dt = cfg.dt_s;
    const double load_g = (resistive && !piezo_load.open) ? 1.0 / piezo_load.resistance_ohm : 0.0;

    const long n_steps = std::max<long>(1, std::lround(cfg.duration_s / dt));
    const long stride = cfg.record_stride;

    Trace trace;
    const std::size_t n_samples = static_cast<std::size_t>(n_steps / stride) + 1;
    for (auto* ch : {&trace.t, &trace.x, &trace.xdot, &trace.v_piezo, &trace.v_input_cap,
                     &trace.v_output, &trace.p_input, &trace.p_mech, &trace.p_diode,
                     &trace.p_converter, &trace.p_delivered, &trace.e_stored})
        ch->reserve(n_samples);
    trace.mode.reserve(n_samples);

    MechState mech;
    double v_p = 0.0;
    PowerStageState stage;
    const double c_in = stage_specs.storage.input_cap_f;
    const double two_vd = 2.0 * stage_specs.rectifier.diode_drop_v;

    // loss energy accumulated since the last recorded sample
    double win_diode = 0.0;
    double win_conv = 0.0;
    double last_sample_t = 0.0;

    const auto record = [&](long step) {
        const double t = step * dt;
        const double window = t - last_sample_t;
        trace.t.push_back(t);
        trace.x.push_back(mech.x);
        trace.xdot.push_back(mech.xd);
        trace.v_piezo.push_back(v_p);
        trace.v_input_cap.push_back(resistive ? 0.0 : stage.v_input_cap);
        trace.v_output.push_back(resistive ? v_p : stage.v_output);
        trace.mode.push_back(static_cast<std::uint8_t>(stage.mode));
        trace.p_input.push_back(-mass * accel * std::sin(omega * t) * mech.xd);
        trace.p_mech.push_back(damping * mech.xd * mech.xd);
        trace.p_diode.push_back(window > 0 ? win_diode / window : 0.0);
        trace.p_converter.push_back(window > 0 ? win_conv / window : 0.0);
        trace.p_delivered.push_back(resistive ? v_p * v_p * load_g
                                              : stage.v_output * stage.v_output / stage_load_ohm);
        const double mech_energy =
            0.5 * mass * mech.xd * mech.xd + 0.5 * stiffness * mech.x * mech.x;
        const double piezo_energy = 0.5 * cp * v_p * v_p;
        const double cap_energy =
            resistive ? 0.0
                      : 0.5 * c_in * stage.v_input_cap * stage.v_input_cap +
                            0.5 * stage_specs.storage.output_bus_f() * stage.v_output *
                                stage.v_output;
        trace.e_stored.push_back(mech_energy + piezo_energy + cap_energy);
        win_diode = 0.0;
        win_conv = 0.0;
        last_sample_t = t;
    };

    record(0);

    for (long step = 0; step < n_steps; ++step) {
        const double t = step * dt;

        RectifierConduction cond = RectifierConduction::blocked;
        if (!resistive) {
            stage.mode = uvlo_step(stage.mode, stage.v_input_cap, stage_specs.uvlo);
            cond = rectifier_step(v_p, stage.v_input_cap, stage_specs.rectifier);
        }

        const MechState next =
            rk4_step(mech, t, dt, mass, damping, stiffness, theta, v_p, accel, omega);
        const double dx = next.x - mech.x;
        mech = next;

        if (resistive) {
            // Crank-Nicolson on C_p v' + g v = theta x', with the exact
            // charge theta * dx as the source term.
            v_p = (v_p * (cp - 0.5 * dt * load_g) + theta * dx) / (cp + 0.5 * dt * load_g);
        } else {
            bool conducted = false;
            if (cond != RectifierConduction::blocked) {
                const double sign = cond == RectifierConduction::positive ? 1.0 : -1.0;
                // Clamped phase: v_p' = sign * (v_in' + 2 v_d); the charge
                // pushed through the bridge lands on the input cap.
                const double v_in = stage.v_input_cap;
                const double v_in_new = (v_in + (sign * theta * dx - two_vd * cp +
                                                 sign * cp * v_p) / c_in) /
                                        (1.0 + cp / c_in);
                const double dq = c_in * (v_in_new - v_in);
                if (dq > 0) {
                    stage = charge_input_cap(dq / dt, stage, stage_specs.storage, dt);
                    stage.ledger.harvested_in_j += two_vd * dq;
                    stage.ledger.diode_loss_j += two_vd * dq;
                    win_diode += two_vd * dq;
                    v_p = sign * (stage.v_input_cap + two_vd);
                    conducted = true;
                }
            }
            if (!conducted)
                v_p += theta * dx / cp;

            const double conv_before = stage.ledger.converter_loss_j;
            stage = buck_step(stage, stage_specs, stage_load_ohm, dt);
            win_conv += stage.ledger.converter_loss_j - conv_before;
        }

        if ((step + 1) % stride == 0) {
            if (!resistive)
                stage.mode = uvlo_step(stage.mode, stage.v_input_cap, stage_specs.uvlo);
            record(step + 1);
        }
    }

    return trace;
}

std::vector<Trace> run_transient_batch(const LumpedParams& params, const Chain& chain,
                                       std::span<const DriveSpec> drives,
                                       const SimConfig& cfg, Exec exec)
{
    // Validate up front so nothing throws inside the parallel region.
    params.validate();
    cfg.validate();
    for (const auto& d : drives) {
        d.validate();
        if (cfg.dt_s > 1.0 / (200.0 * d.frequency_hz))
            throw ConfigError("sim dt exceeds 1/(200*f) for a batch drive point");
    }

    std::vector<Trace> out(drives.size());
    parallel_for(static_cast<std::ptrdiff_t>(drives.size()), exec, [&](std::ptrdiff_t i) {
        out[static_cast<std::size_t>(i)] =
            run_transient(params, chain, drives[static_cast<std::size_t>(i)], cfg);
    });
    return out;
}

EnergyLedger energy_audit(const Trace& trace)
{
    if (trace.size() == 0)
        throw ArgumentError("energy audit requires a non-empty trace");

    EnergyLedger ledger;
    ledger.stored_final_j = trace.e_stored.back();
    if (trace.size() < 2) {
        ledger.residual_j = -(ledger.stored_final_j - trace.e_stored.front());
        return ledger;
    }

    ledger.input_work_j = trapezoid(trace.t, trace.p_input);
    ledger.mech_dissipated_j = trapezoid(trace.t, trace.p_mech);
    ledger.diode_loss_j = trapezoid(trace.t, trace.p_diode);
    ledger.converter_loss_j = trapezoid(trace.t, trace.p_converter);
    ledger.delivered_j = trapezoid(trace.t, trace.p_delivered);

    const double delta_stored = trace.e_stored.back() - trace.e_stored.front();
    ledger.residual_j = ledger.input_work_j -
                        (ledger.mech_dissipated_j + ledger.diode_loss_j +
                         ledger.converter_loss_j + ledger.delivered_j + delta_stored);
    return ledger;
}

SteadyStateMetrics steady_state_metrics(const Trace& trace, int n_cycles,
                                        double drive_freq_hz)
{
    if (trace.size() < 2)
        throw ArgumentError("steady-state metrics require at least two samples");
    if (n_cycles < 1)
        throw ArgumentError("n_cycles must be >= 1");
    if (!(drive_freq_hz > 0))
        throw ArgumentError("drive frequency must be > 0");

    const double period = 1.0 / drive_freq_hz;
    const double span = trace.t.back() - trace.t.front();
    if (span < 2.0 * n_cycles * period) {
        std::ostringstream msg;
        msg << "trace spans " << span << " s but steady-state metrics over " << n_cycles
            << " cycles need at least " << 2.0 * n_cycles * period << " s";
        throw ArgumentError(msg.str());
    }

    const double window_start = trace.t.back() - n_cycles * period;
    const auto begin =
        std::lower_bound(trace.t.begin(), trace.t.end(), window_start - 1e-12 * span);
    const std::size_t first = static_cast<std::size_t>(begin - trace.t.begin());

    double v_sq = 0.0;
    double p_sum = 0.0;
    for (std::size_t i = first + 1; i < trace.size(); ++i) {
        const double h = trace.t[i] - trace.t[i - 1];
        v_sq += 0.5 *
                (trace.v_output[i] * trace.v_output[i] +
                 trace.v_output[i - 1] * trace.v_output[i - 1]) *
                h;
        p_sum += 0.5 * (trace.p_delivered[i] + trace.p_delivered[i - 1]) * h;
    }
    const double window = trace.t.back() - trace.t[first];

    SteadyStateMetrics out;
    out.v_rms = std::sqrt(v_sq / window);
    out.p_avg_w = p_sum / window;
    return out;
}

} // namespace pzsim
