#pragma once

#include <span>
#include <vector>

#include "pzsim/harvester.hpp"
#include "pzsim/parallel.hpp"

namespace pzsim {

// Sweep harnesses mirroring the bench protocols: frequency sweeps at fixed
// load, load sweeps at fixed frequency, and tip-mass studies with resonance
// tracking. Grid points are independent phasor solves, so every sweep runs
// as an OpenMP kernel with a serial reference path; results are stored by
// grid index, making both paths bit-identical.

enum class AbscissaKind {
    frequency_hz,
    resistance_ohm,
    tip_mass_kg,
};

enum class ValueKind {
    volt_amplitude,
    avg_power,
    resonant_freq,
};

struct CurvePoint {
    double abscissa = 0.0;
    double value = 0.0;
};

struct SweepCurve {
    AbscissaKind abscissa_kind = AbscissaKind::frequency_hz;
    ValueKind value_kind = ValueKind::volt_amplitude;
    std::vector<CurvePoint> points;

    void validate() const; // strictly increasing abscissa, >=1 point, finite values
};

struct FrequencyGrid {
    double f_min_hz = 16.0;
    double f_max_hz = 500.0;
    double step_hz = 2.0;

    void validate() const;
    long count() const; // inclusive of both endpoints
};

struct ResonanceEstimate {
    double frequency_hz = 0.0;
    bool on_boundary = false;
};

struct MassStudyRow {
    double tip_mass_kg = 0.0;
    double resonant_freq_hz = 0.0;
    double peak_voltage_v = 0.0; // open-circuit amplitude at resonance
};

// One solve_phasor per grid frequency. Open-circuit loads sweep the voltage
// amplitude, resistive loads the average power.
SweepCurve frequency_sweep(const LumpedParams& params, double accel_amplitude_m_s2,
                           const FrequencyGrid& grid, const LoadSpec& load,
                           Exec exec = Exec::parallel);

// Abscissa of the curve maximum, refined by parabolic interpolation through
// the peak and its two neighbours. Ties break toward the lower abscissa; a
// peak on either end returns that end with on_boundary set.
ResonanceEstimate find_resonance(const SweepCurve& curve);

// Average power per resistance at the fixed drive frequency.
SweepCurve load_sweep(const LumpedParams& params, const DriveSpec& drive,
                      std::span<const double> resistances_ohm,
                      Exec exec = Exec::parallel);

// Per tip mass: natural frequency and open-circuit voltage at that frequency.
std::vector<MassStudyRow> tip_mass_study(const LumpedParams& params,
                                         std::span<const double> tip_masses_kg,
                                         double accel_amplitude_m_s2,
                                         Exec exec = Exec::parallel);

} // namespace pzsim
