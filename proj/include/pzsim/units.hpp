#pragma once

#include <numbers>

// Internal unit system is SI throughout (kg, m, s, V, F, ohm).
// Config files and CSV columns use mm / g / uF where noted; conversion
// happens at the parse boundary, never inside the math core.

namespace pzsim {

inline constexpr const char* kVersionString = "pzsim 0.1.0";

inline constexpr double kPi = std::numbers::pi;

constexpr double mm_to_m(double mm) { return mm * 1e-3; }
constexpr double m_to_mm(double m) { return m * 1e3; }
constexpr double g_to_kg(double g) { return g * 1e-3; }
constexpr double kg_to_g(double kg) { return kg * 1e3; }
constexpr double uf_to_f(double uf) { return uf * 1e-6; }
constexpr double nf_to_f(double nf) { return nf * 1e-9; }

constexpr double hz_to_rad_s(double hz) { return 2.0 * kPi * hz; }
constexpr double rad_s_to_hz(double w) { return w / (2.0 * kPi); }

} // namespace pzsim
