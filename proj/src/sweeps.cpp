#include "pzsim/sweeps.hpp"

#include <algorithm>
#include <cmath>

namespace pzsim {

void SweepCurve::validate() const
{
    if (points.empty())
        throw ArgumentError("sweep curve needs at least one point");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].abscissa) || !std::isfinite(points[i].value))
            throw ArgumentError("sweep curve values must be finite");
        if (i > 0 && points[i].abscissa <= points[i - 1].abscissa)
            throw ArgumentError("sweep curve abscissa must be strictly increasing");
    }
}

void FrequencyGrid::validate() const
{
    if (!(f_min_hz > 0) || !(f_max_hz > f_min_hz))
        throw ArgumentError("frequency grid requires 0 < f_min < f_max");
    if (!(step_hz > 0))
        throw ArgumentError("frequency grid step must be > 0");
}

long FrequencyGrid::count() const
{
    validate();
    // inclusive endpoints; tolerate rounding at the upper edge
    return static_cast<long>(std::floor((f_max_hz - f_min_hz) / step_hz + 1e-9)) + 1;
}

SweepCurve frequency_sweep(const LumpedParams& params, double accel_amplitude_m_s2,
                           const FrequencyGrid& grid, const LoadSpec& load, Exec exec)
{
    params.validate();
    grid.validate();
    load.validate();
    if (!(accel_amplitude_m_s2 >= 0))
        throw ArgumentError("drive amplitude must be >= 0");

    const long n = grid.count();
    SweepCurve curve;
    curve.abscissa_kind = AbscissaKind::frequency_hz;
    curve.value_kind = load.open ? ValueKind::volt_amplitude : ValueKind::avg_power;
    curve.points.resize(static_cast<std::size_t>(n));

    auto* out = curve.points.data();
    parallel_for(n, exec, [&, out](std::ptrdiff_t i) {
        const double f = grid.f_min_hz + static_cast<double>(i) * grid.step_hz;
        const auto resp = solve_phasor(params, DriveSpec{accel_amplitude_m_s2, f}, load);
        out[i].abscissa = f;
        out[i].value = load.open ? resp.volt_amplitude_v : resp.avg_power_w;
    });
    return curve;
}

ResonanceEstimate find_resonance(const SweepCurve& curve)
{
    curve.validate();
    if (curve.points.size() < 3)
        throw ArgumentError("resonance search needs at least 3 points");
    if (curve.value_kind == ValueKind::resonant_freq)
        throw ArgumentError("resonance search needs a voltage or power curve");

    std::size_t peak = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].value > curve.points[peak].value)
            peak = i; // strict: ties keep the lower abscissa

    if (peak == 0 || peak + 1 == curve.points.size())
        return {curve.points[peak].abscissa, true};

    // Parabola through the peak and its neighbours (general spacing).
    const auto& [xl, yl] = curve.points[peak - 1];
    const auto& [xc, yc] = curve.points[peak];
    const auto& [xr, yr] = curve.points[peak + 1];
    const double dl = xc - xl;
    const double dr = xr - xc;
    const double num = dl * dl * (yc - yr) - dr * dr * (yc - yl);
    const double den = dl * (yc - yr) + dr * (yc - yl);
    double vertex = xc;
    if (den != 0.0)
        vertex = xc + 0.5 * num / den;
    vertex = std::clamp(vertex, xl, xr);
    return {vertex, false};
}

SweepCurve load_sweep(const LumpedParams& params, const DriveSpec& drive,
                      std::span<const double> resistances_ohm, Exec exec)
{
    params.validate();
    drive.validate();
    if (resistances_ohm.empty())
        throw ArgumentError("load sweep needs at least one resistance");
    for (std::size_t i = 0; i < resistances_ohm.size(); ++i) {
        if (!(resistances_ohm[i] > 0))
            throw ArgumentError("load sweep resistances must be > 0");
        if (i > 0 && resistances_ohm[i] <= resistances_ohm[i - 1])
            throw ArgumentError("load sweep resistances must be strictly increasing");
    }

    SweepCurve curve;
    curve.abscissa_kind = AbscissaKind::resistance_ohm;
    curve.value_kind = ValueKind::avg_power;
    curve.points.resize(resistances_ohm.size());

    auto* out = curve.points.data();
    parallel_for(static_cast<std::ptrdiff_t>(resistances_ohm.size()), exec,
                 [&, out](std::ptrdiff_t i) {
                     const double r = resistances_ohm[static_cast<std::size_t>(i)];
                     const auto resp = solve_phasor(params, drive, LoadSpec::resistive(r));
                     out[i].abscissa = r;
                     out[i].value = resp.avg_power_w;
                 });
    return curve;
}

std::vector<MassStudyRow> tip_mass_study(const LumpedParams& params,
                                         std::span<const double> tip_masses_kg,
                                         double accel_amplitude_m_s2, Exec exec)
{
    params.validate();
    if (tip_masses_kg.empty())
        throw ArgumentError("tip mass study needs at least one mass");
    for (std::size_t i = 0; i < tip_masses_kg.size(); ++i) {
        if (!(tip_masses_kg[i] >= 0))
            throw ArgumentError("tip masses must be >= 0");
        for (std::size_t j = i + 1; j < tip_masses_kg.size(); ++j)
            if (tip_masses_kg[i] == tip_masses_kg[j])
                throw ArgumentError("tip masses must be distinct");
    }
    if (!(accel_amplitude_m_s2 >= 0))
        throw ArgumentError("drive amplitude must be >= 0");

    std::vector<MassStudyRow> rows(tip_masses_kg.size());
    auto* out = rows.data();
    parallel_for(static_cast<std::ptrdiff_t>(tip_masses_kg.size()), exec,
                 [&, out](std::ptrdiff_t i) {
                     const LumpedParams p =
                         params.with_tip_mass(tip_masses_kg[static_cast<std::size_t>(i)]);
                     const double f = natural_frequency(p);
                     const auto resp = solve_phasor(p, DriveSpec{accel_amplitude_m_s2, f},
                                                    LoadSpec::open_circuit());
                     out[i] = MassStudyRow{p.tip_mass_kg, f, resp.volt_amplitude_v};
                 });
    return rows;
}

} // namespace pzsim
