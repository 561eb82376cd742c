#include "pzsim/harvester.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "pzsim/units.hpp"

namespace pzsim {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ArgumentError(what);
}

} // namespace

void BeamSpec::validate() const
{
    require(total_length_mm > 0 && width_mm > 0 && thickness_mm > 0,
            "beam dimensions must be strictly positive");
    require(piezo_length_mm > 0 && piezo_width_mm > 0 && piezo_thickness_mm > 0,
            "piezo dimensions must be strictly positive");
    require(beam_mass_g > 0, "beam mass must be strictly positive");
    require(piezo_length_mm <= total_length_mm, "piezo length exceeds beam length");
    require(piezo_width_mm <= width_mm, "piezo width exceeds beam width");
    require(piezo_thickness_mm <= thickness_mm, "piezo thickness exceeds beam thickness");
}

double LumpedParams::damping_n_s_m() const
{
    return 2.0 * zeta * std::sqrt(k_eff_n_m * total_mass_kg());
}

LumpedParams LumpedParams::with_tip_mass(double tip_kg) const
{
    LumpedParams p = *this;
    p.tip_mass_kg = tip_kg;
    return p;
}

void LumpedParams::validate() const
{
    require(m_eff_kg > 0, "m_eff must be > 0");
    require(k_eff_n_m > 0, "k_eff must be > 0");
    require(c_p_f > 0, "c_p must be > 0");
    require(theta_n_v >= 0, "theta must be >= 0");
    require(tip_mass_kg >= 0, "tip_mass must be >= 0");
    require(zeta > 0 && zeta < 1, "zeta must lie in (0, 1)");
}

void DriveSpec::validate() const
{
    require(accel_amplitude_m_s2 >= 0, "drive acceleration must be >= 0");
    require(frequency_hz > 0, "drive frequency must be > 0");
}

LoadSpec LoadSpec::resistive(double ohms)
{
    require(ohms > 0, "load resistance must be > 0");
    LoadSpec l;
    l.open = false;
    l.resistance_ohm = ohms;
    return l;
}

void LoadSpec::validate() const
{
    if (!open)
        require(resistance_ohm > 0, "load resistance must be > 0");
}

double natural_frequency(const LumpedParams& params)
{
    params.validate();
    return rad_s_to_hz(std::sqrt(params.k_eff_n_m / params.total_mass_kg()));
}

MassStiffness lumped_from_resonance_pair(const ResonancePoint& a, const ResonancePoint& b)
{
    require(a.tip_mass_kg >= 0 && b.tip_mass_kg >= 0, "tip masses must be >= 0");
    require(a.frequency_hz > 0 && b.frequency_hz > 0, "frequencies must be > 0");
    if (a.tip_mass_kg == b.tip_mass_kg)
        throw DegenerateInputError("resonance pair needs two distinct tip masses");

    // f_i = (1/2pi) sqrt(k/(m_eff + m_i))  =>  r = (f_a/f_b)^2 = (m_eff+m_b)/(m_eff+m_a)
    const double r = (a.frequency_hz / b.frequency_hz) * (a.frequency_hz / b.frequency_hz);
    if (r == 1.0)
        throw InfeasibleError("equal frequencies at unequal masses imply infinite m_eff");

    const double m_eff = (b.tip_mass_kg - r * a.tip_mass_kg) / (r - 1.0);
    if (!(m_eff > 0))
        throw InfeasibleError("resonance pair yields non-positive m_eff");

    const double w1 = hz_to_rad_s(a.frequency_hz);
    const double k = w1 * w1 * (m_eff + a.tip_mass_kg);
    if (!(k > 0))
        throw InfeasibleError("resonance pair yields non-positive stiffness");

    return MassStiffness{m_eff, k};
}

PhasorResponse solve_phasor(const LumpedParams& params, const DriveSpec& drive,
                            const LoadSpec& load)
{
    params.validate();
    drive.validate();
    load.validate();

    using cplx = std::complex<double>;
    const cplx j(0.0, 1.0);

    const double M = params.total_mass_kg();
    const double k = params.k_eff_n_m;
    const double c = params.damping_n_s_m();
    const double theta = params.theta_n_v;
    const double cp = params.c_p_f;
    const double w = hz_to_rad_s(drive.frequency_hz);
    const double g = load.open ? 0.0 : 1.0 / load.resistance_ohm; // load conductance

    // [ k - w^2 M + j w c     theta          ] [X]   [-M A]
    // [ -j w theta            j w C_p + g    ] [V] = [ 0  ]
    const cplx zm = cplx(k - w * w * M, w * c);
    const cplx ze = cplx(g, w * cp);
    const cplx f = cplx(-M * drive.accel_amplitude_m_s2, 0.0);

    const cplx det = zm * ze + j * w * theta * theta;
    const cplx x = f * ze / det;
    const cplx v = j * w * theta * x / ze; // ze != 0 since w > 0, c_p > 0

    PhasorResponse out;
    out.disp_amplitude_m = std::abs(x);
    out.disp_phase_rad = std::arg(x);
    out.volt_amplitude_v = std::abs(v);
    out.volt_phase_rad = std::arg(v);
    out.avg_power_w = load.open ? 0.0
                                : 0.5 * out.volt_amplitude_v * out.volt_amplitude_v * g;
    return out;
}

double average_power(const PhasorResponse& resp, const LoadSpec& load)
{
    load.validate();
    if (load.open)
        return 0.0;
    return resp.volt_amplitude_v * resp.volt_amplitude_v / (2.0 * load.resistance_ohm);
}

double optimal_load(const LumpedParams& params, double frequency_hz)
{
    params.validate();
    require(frequency_hz > 0, "frequency must be > 0");

    const double w = hz_to_rad_s(frequency_hz);
    const double seed = 1.0 / (w * params.c_p_f);

    // theta == 0: power is identically zero; return the analytic weak-coupling
    // optimum of the voltage-divider power, 1/(w C_p).
    if (params.theta_n_v == 0.0)
        return seed;

    const auto power_at = [&](double log_r) {
        const DriveSpec drive{1.0, frequency_hz};
        return solve_phasor(params, drive, LoadSpec::resistive(std::exp(log_r))).avg_power_w;
    };

    // Golden-section search on log-resistance. The power curve is unimodal
    // in R, so a wide fixed bracket around the seed is sufficient.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(seed) - std::log(1e4);
    double hi = std::log(seed) + std::log(1e4);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = power_at(x1);
    double f2 = power_at(x2);
    // Interval shrinks by 0.618 per iteration; 60 iterations take the
    // bracket of ~18.4 log units below 1e-9 relative.
    for (int i = 0; i < 60; ++i) {
        if (f1 >= f2) { // ties move toward the smaller resistance
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = power_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = power_at(x2);
        }
    }
    return std::exp(0.5 * (lo + hi));
}

LumpedParams bimorph_adjust(const LumpedParams& single_layer, BimorphWiring wiring)
{
    single_layer.validate();
    LumpedParams out = single_layer;
    switch (wiring) {
    case BimorphWiring::series:
        out.c_p_f = single_layer.c_p_f / 2.0;
        break;
    case BimorphWiring::parallel:
        out.c_p_f = single_layer.c_p_f * 2.0;
        out.theta_n_v = single_layer.theta_n_v * 2.0;
        break;
    }
    return out;
}

} // namespace pzsim
