#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "pzsim/sweeps.hpp"

namespace pzsim {

// Measured-sweep CSV schemas, one per sweep kind:
//
//   frequency_hz,voltage_v      open-circuit frequency sweep
//   frequency_hz,power_w        loaded frequency sweep
//   resistance_ohm,power_w      load sweep at fixed frequency
//   tip_mass_g,frequency_hz     tip-mass study (grams in the file, kg inside)
//
// Leading '# key = value' comments carry provenance (device, tip_mass_g);
// other comments are ignored. Rows out of order are sorted with a warning
// flag; duplicate abscissae and non-numeric cells are format errors.
//
// emit_curve writes 9 significant digits, so parse(emit(curve)) recovers
// the curve to the full stored precision and a second emit is byte-stable.

struct SweepProvenance {
    std::string device;
    std::optional<double> tip_mass_g;
};

struct MeasuredSweep {
    SweepCurve curve;
    SweepProvenance provenance;
    bool sorted_on_parse = false;
};

enum class CurveFormat {
    csv,
    svg,
};

MeasuredSweep parse_sweep_csv(std::istream& in);
MeasuredSweep parse_sweep_csv_file(const std::string& path);

std::string emit_curve(const SweepCurve& curve, CurveFormat format);

} // namespace pzsim
