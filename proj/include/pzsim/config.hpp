#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pzsim/harvester.hpp"
#include "pzsim/power_stage.hpp"
#include "pzsim/sweeps.hpp"
#include "pzsim/transient.hpp"

namespace pzsim {

// Flat key-value configuration with dotted section prefixes and '#'
// comments, e.g.
//
//   beam.preset = S128-H5FR-1107YB
//   params.tip_mass_g = 1.0
//   drive.accel_m_s2 = 9.81
//
// Lengths are in mm, masses in grams, capacitances in uF/nF as the key
// names say; everything is converted to SI while parsing. Parsing is
// total: the result is either a fully validated SystemConfig or a
// ConfigError carrying the offending line.

inline constexpr const char* kPresetS128 = "S128-H5FR-1107YB";
inline constexpr const char* kPresetS233 = "S233-H5FR-1107XB";

enum class ChainKind {
    resistive,
    power_stage,
};

struct FitSettings {
    int max_evaluations = 2000;
    double bounds_factor = 10.0; // default box: init/factor .. init*factor
};

struct SystemConfig {
    std::string preset;            // empty when no preset was named
    std::optional<BeamSpec> beam;  // metadata; absent for params-only configs
    LumpedParams params;
    DriveSpec drive;
    LoadSpec load;
    ChainKind chain_kind = ChainKind::resistive;
    PowerStageSpecs power_stage;   // meaningful when chain_kind == power_stage
    SimConfig sim;
    FrequencyGrid sweep_grid;
    std::vector<double> sweep_resistances_ohm;
    std::vector<double> study_masses_kg;
    FitSettings fit;

    Chain chain() const;
};

SystemConfig load_config(std::string_view text);
SystemConfig load_config_file(const std::string& path);

// Geometry for the two bench devices. Throws ArgumentError for an unknown
// preset name.
BeamSpec beam_preset(const std::string& name);

// Effective modal mass of the bare beam as a fraction of its total mass,
// anchored so a 2 g beam matches the measured resonance pair.
double effective_mass_fraction();

} // namespace pzsim
