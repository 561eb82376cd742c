#pragma once

#include "pzsim/errors.hpp"

namespace pzsim {

// Lumped single-mode model of a piezoelectric cantilever under sinusoidal
// base excitation:
//
//   M x'' + c x' + k x + theta v = -M a(t)        M = m_eff + tip_mass
//   C_p v' + v / R = theta x'                     c = 2 zeta sqrt(k M)
//
// x is the relative tip displacement, v the piezo terminal voltage.

enum class BeamKind {
    unimorph,
    bimorph,
};

// Device geometry. Carried as metadata and for the config presets;
// LumpedParams is the authoritative model input.
struct BeamSpec {
    BeamKind kind = BeamKind::unimorph;
    double total_length_mm = 0.0;
    double width_mm = 0.0;
    double thickness_mm = 0.0;
    double piezo_length_mm = 0.0;
    double piezo_width_mm = 0.0;
    double piezo_thickness_mm = 0.0;
    double beam_mass_g = 0.0;

    void validate() const; // throws ArgumentError
};

struct LumpedParams {
    double m_eff_kg = 0.0;   // effective modal mass of the bare beam
    double k_eff_n_m = 0.0;  // effective stiffness
    double zeta = 0.0;       // damping ratio, 0 < zeta < 1
    double theta_n_v = 0.0;  // electromechanical coupling, >= 0
    double c_p_f = 0.0;      // clamped piezo capacitance
    double tip_mass_kg = 0.0;

    double total_mass_kg() const { return m_eff_kg + tip_mass_kg; }
    double damping_n_s_m() const;
    LumpedParams with_tip_mass(double tip_kg) const;

    void validate() const; // throws ArgumentError
};

struct DriveSpec {
    double accel_amplitude_m_s2 = 0.0; // sinusoidal base acceleration amplitude
    double frequency_hz = 0.0;

    void validate() const;
};

struct LoadSpec {
    bool open = true;
    double resistance_ohm = 0.0; // meaningful only when !open

    static LoadSpec open_circuit() { return LoadSpec{}; }
    static LoadSpec resistive(double ohms);

    void validate() const;
};

// Steady-state complex amplitudes at one frequency/load.
struct PhasorResponse {
    double disp_amplitude_m = 0.0;
    double disp_phase_rad = 0.0;
    double volt_amplitude_v = 0.0;
    double volt_phase_rad = 0.0;
    double avg_power_w = 0.0;
};

struct ResonancePoint {
    double tip_mass_kg = 0.0;
    double frequency_hz = 0.0;
};

struct MassStiffness {
    double m_eff_kg = 0.0;
    double k_eff_n_m = 0.0;
};

enum class BimorphWiring {
    series,
    parallel,
};

// Short-circuit mechanical natural frequency, (1/2pi) sqrt(k / (m_eff + tip)).
double natural_frequency(const LumpedParams& params);

// Exact algebraic solve of f_i = (1/2pi) sqrt(k / (m_eff + m_i)) from two
// (tip mass, frequency) observations. Throws DegenerateInputError for equal
// masses, InfeasibleError when the solve yields m_eff <= 0 or k <= 0.
MassStiffness lumped_from_resonance_pair(const ResonancePoint& a, const ResonancePoint& b);

// Steady-state response of the coupled pair above, solved as a 2x2 complex
// linear system at the drive frequency.
PhasorResponse solve_phasor(const LumpedParams& params, const DriveSpec& drive,
                            const LoadSpec& load);

// volt_amplitude^2 / (2 R) for a resistive load, 0 for open circuit.
double average_power(const PhasorResponse& resp, const LoadSpec& load);

// Resistance maximizing avg_power at the given frequency; golden-section
// search over log-resistance seeded at 1/(omega C_p). For theta == 0 the
// power is identically zero and the analytic limit 1/(omega C_p) is
// returned by convention.
double optimal_load(const LumpedParams& params, double frequency_hz);

// Electrical re-wiring of a two-layer beam given the single-layer values.
// series: C_p/2, theta unchanged (open-circuit voltage doubles).
// parallel: 2 C_p, 2 theta (voltage unchanged, current doubles).
LumpedParams bimorph_adjust(const LumpedParams& single_layer, BimorphWiring wiring);

} // namespace pzsim
