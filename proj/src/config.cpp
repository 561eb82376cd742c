#include "pzsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pzsim/units.hpp"

namespace pzsim {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using EntryMap = std::map<std::string, Entry>;

std::string trim(std::string_view s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    if (begin == std::string_view::npos)
        return {};
    return std::string(s.substr(begin, end - begin + 1));
}

EntryMap tokenize(std::string_view text)
{
    EntryMap entries;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        ++line_no;
        pos = eol + 1;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;

        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key", line_no);
        if (entries.count(key))
            throw ConfigError("duplicate key '" + key + "'", line_no);
        entries[key] = Entry{value, line_no, false};
        if (pos > text.size())
            break;
    }
    return entries;
}

class Reader {
public:
    explicit Reader(EntryMap entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key)
    {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return false;
        it->second.used = true;
        return true;
    }

    std::string text(const std::string& key)
    {
        auto& e = entries_.at(key);
        e.used = true;
        return e.value;
    }

    int line(const std::string& key) const
    {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    double number(const std::string& key)
    {
        auto& e = entries_.at(key);
        e.used = true;
        return parse_number(e.value, key, e.line);
    }

    double number_or(const std::string& key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    long integer(const std::string& key)
    {
        const double v = number(key);
        if (v != std::floor(v))
            throw ConfigError("value for " + key + " must be an integer",
                              entries_.at(key).line);
        return static_cast<long>(v);
    }

    std::vector<double> number_list(const std::string& key)
    {
        auto& e = entries_.at(key);
        e.used = true;
        std::vector<double> out;
        std::string_view rest = e.value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string item = trim(rest.substr(0, comma));
            if (item.empty())
                throw ConfigError("empty element in list for " + key, e.line);
            out.push_back(parse_number(item, key, e.line));
            rest = comma == std::string_view::npos ? std::string_view{}
                                                   : rest.substr(comma + 1);
        }
        if (out.empty())
            throw ConfigError("empty list for " + key, e.line);
        return out;
    }

    // one choice out of a fixed set, with the legal values in the diagnostic
    template <typename T>
    T choice(const std::string& key, std::initializer_list<std::pair<const char*, T>> options)
    {
        auto& e = entries_.at(key);
        e.used = true;
        for (const auto& [name, value] : options)
            if (e.value == name)
                return value;
        std::string legal;
        for (const auto& [name, value] : options) {
            if (!legal.empty())
                legal += ", ";
            legal += name;
        }
        throw ConfigError("'" + e.value + "' is not a legal choice for " + key +
                              "; pick one of " + legal,
                          e.line);
    }

    void reject_unknown(const std::vector<std::string>& known) const
    {
        for (const auto& [key, entry] : entries_) {
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw ConfigError("unknown key '" + key + "'", entry.line);
        }
    }

    int first_line_with_prefix(const std::string& prefix) const
    {
        int best = 0;
        for (const auto& [key, entry] : entries_)
            if (key.rfind(prefix, 0) == 0 && (best == 0 || entry.line < best))
                best = entry.line;
        return best;
    }

private:
    static double parse_number(const std::string& s, const std::string& key, int line)
    {
        const char* begin = s.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0' || !std::isfinite(v))
            throw ConfigError("value for " + key + " is not numeric: '" + s + "'", line);
        return v;
    }

    EntryMap entries_;
};

const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = {
        "beam.preset", "beam.kind", "beam.total_length_mm", "beam.width_mm",
        "beam.thickness_mm", "beam.piezo_length_mm", "beam.piezo_width_mm",
        "beam.piezo_thickness_mm", "beam.mass_g", "bimorph.wiring",
        "params.m_eff_g", "params.k_eff_n_per_m", "params.zeta", "params.theta_n_per_v",
        "params.c_p_nf", "params.tip_mass_g",
        "drive.accel_m_s2", "drive.frequency_hz",
        "load.kind", "load.resistance_ohm",
        "chain.kind",
        "rectifier.diode_drop_v",
        "uvlo.rising_v", "uvlo.falling_v",
        "buck.output_setpoint_v", "buck.max_output_current_a", "buck.input_min_v",
        "buck.input_max_v", "buck.efficiency",
        "storage.input_cap_uf", "storage.output_cap_uf", "storage.supercap_f",
        "sim.dt_s", "sim.duration_s", "sim.record_stride",
        "sweep.f_min_hz", "sweep.f_max_hz", "sweep.f_step_hz", "sweep.resistances_ohm",
        "study.masses_g",
        "fit.max_evaluations", "fit.bounds_factor",
    };
    return keys;
}

// Lumped anchor values derived from the measured resonance pair.
MassStiffness s128_anchor()
{
    return lumped_from_resonance_pair({1.0e-3, 100.0}, {1.5e-3, 90.0});
}

template <typename Fn>
void validate_section(Fn&& fn, const Reader& reader, const std::string& prefix)
{
    try {
        fn();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what(), reader.first_line_with_prefix(prefix));
    }
}

} // namespace

double effective_mass_fraction()
{
    return s128_anchor().m_eff_kg / 2.0e-3;
}

BeamSpec beam_preset(const std::string& name)
{
    // Geometry of the two tested devices; the double-layer sample shares the
    // published form factor.
    BeamSpec beam;
    beam.total_length_mm = 53.0;
    beam.width_mm = 20.8;
    beam.thickness_mm = 0.71;
    beam.piezo_length_mm = 27.8;
    beam.piezo_width_mm = 18.0;
    beam.piezo_thickness_mm = 0.19;
    beam.beam_mass_g = 2.0;
    if (name == kPresetS128) {
        beam.kind = BeamKind::unimorph;
        return beam;
    }
    if (name == kPresetS233) {
        beam.kind = BeamKind::bimorph;
        return beam;
    }
    throw ArgumentError("unknown beam preset '" + name + "'");
}

Chain SystemConfig::chain() const
{
    if (chain_kind == ChainKind::power_stage)
        return PowerStageChain{power_stage, load.resistance_ohm};
    return ResistiveChain{load};
}

SystemConfig load_config(std::string_view text)
{
    Reader reader(tokenize(text));
    reader.reject_unknown(known_keys());

    SystemConfig cfg;

    // --- beam ---------------------------------------------------------
    if (reader.has("beam.preset")) {
        cfg.preset = reader.text("beam.preset");
        try {
            cfg.beam = beam_preset(cfg.preset);
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what(), reader.line("beam.preset"));
        }
    }
    const bool explicit_beam =
        reader.has("beam.total_length_mm") || reader.has("beam.width_mm") ||
        reader.has("beam.thickness_mm") || reader.has("beam.mass_g") ||
        reader.has("beam.kind");
    if (explicit_beam && !cfg.beam)
        cfg.beam = BeamSpec{};
    if (cfg.beam) {
        BeamSpec& b = *cfg.beam;
        if (reader.has("beam.kind"))
            b.kind = reader.choice<BeamKind>("beam.kind", {{"unimorph", BeamKind::unimorph},
                                                           {"bimorph", BeamKind::bimorph}});
        b.total_length_mm = reader.number_or("beam.total_length_mm", b.total_length_mm);
        b.width_mm = reader.number_or("beam.width_mm", b.width_mm);
        b.thickness_mm = reader.number_or("beam.thickness_mm", b.thickness_mm);
        b.piezo_length_mm = reader.number_or("beam.piezo_length_mm", b.piezo_length_mm);
        b.piezo_width_mm = reader.number_or("beam.piezo_width_mm", b.piezo_width_mm);
        b.piezo_thickness_mm = reader.number_or("beam.piezo_thickness_mm", b.piezo_thickness_mm);
        b.beam_mass_g = reader.number_or("beam.mass_g", b.beam_mass_g);
        validate_section([&] { b.validate(); }, reader, "beam.");
    }

    // --- lumped parameters ---------------------------------------------
    LumpedParams& p = cfg.params;
    p.zeta = 0.02;
    p.theta_n_v = 1e-4;
    p.c_p_f = 100e-9;
    if (cfg.preset == kPresetS128) {
        const auto anchor = s128_anchor();
        p.m_eff_kg = anchor.m_eff_kg;
        p.k_eff_n_m = anchor.k_eff_n_m;
    } else if (cfg.preset == kPresetS233) {
        // final-assembly operating point: resonance near 176 Hz at zero tip mass
        p.m_eff_kg = effective_mass_fraction() * g_to_kg(cfg.beam->beam_mass_g);
        p.k_eff_n_m = p.m_eff_kg * std::pow(hz_to_rad_s(176.0), 2);
    } else if (cfg.beam) {
        p.m_eff_kg = effective_mass_fraction() * g_to_kg(cfg.beam->beam_mass_g);
    }

    // two-layer wiring adjusts the single-layer electrical defaults (same
    // rule as bimorph_adjust); explicit params.* keys below still win
    if (cfg.beam && cfg.beam->kind == BeamKind::bimorph) {
        const auto wiring = reader.has("bimorph.wiring")
                                ? reader.choice<BimorphWiring>(
                                      "bimorph.wiring", {{"series", BimorphWiring::series},
                                                         {"parallel", BimorphWiring::parallel}})
                                : BimorphWiring::series;
        if (wiring == BimorphWiring::series) {
            p.c_p_f /= 2.0;
        } else {
            p.c_p_f *= 2.0;
            p.theta_n_v *= 2.0;
        }
    } else if (reader.has("bimorph.wiring")) {
        throw ConfigError("bimorph.wiring requires a bimorph beam",
                          reader.line("bimorph.wiring"));
    }

    if (reader.has("params.m_eff_g"))
        p.m_eff_kg = g_to_kg(reader.number("params.m_eff_g"));
    if (reader.has("params.k_eff_n_per_m"))
        p.k_eff_n_m = reader.number("params.k_eff_n_per_m");
    p.zeta = reader.number_or("params.zeta", p.zeta);
    if (reader.has("params.theta_n_per_v"))
        p.theta_n_v = reader.number("params.theta_n_per_v");
    if (reader.has("params.c_p_nf"))
        p.c_p_f = nf_to_f(reader.number("params.c_p_nf"));
    if (reader.has("params.tip_mass_g"))
        p.tip_mass_kg = g_to_kg(reader.number("params.tip_mass_g"));

    if (!(p.m_eff_kg > 0))
        throw ConfigError("params.m_eff_g is required without a beam or preset");
    if (!(p.k_eff_n_m > 0))
        throw ConfigError("params.k_eff_n_per_m is required without a preset");
    validate_section([&] { p.validate(); }, reader, "params.");

    // --- drive ----------------------------------------------------------
    cfg.drive.accel_amplitude_m_s2 = reader.number_or("drive.accel_m_s2", 9.81);
    cfg.drive.frequency_hz =
        reader.number_or("drive.frequency_hz", natural_frequency(p));
    validate_section([&] { cfg.drive.validate(); }, reader, "drive.");

    // --- load and chain --------------------------------------------------
    const bool load_is_open =
        reader.has("load.kind")
            ? reader.choice<bool>("load.kind", {{"open_circuit", true}, {"resistive", false}})
            : !reader.has("load.resistance_ohm");
    if (load_is_open) {
        cfg.load = LoadSpec::open_circuit();
        if (reader.has("load.resistance_ohm"))
            throw ConfigError("load.resistance_ohm conflicts with an open-circuit load",
                              reader.line("load.resistance_ohm"));
    } else {
        if (!reader.has("load.resistance_ohm"))
            throw ConfigError("a resistive load needs load.resistance_ohm");
        validate_section(
            [&] { cfg.load = LoadSpec::resistive(reader.number("load.resistance_ohm")); },
            reader, "load.");
    }

    cfg.chain_kind = reader.has("chain.kind")
                         ? reader.choice<ChainKind>("chain.kind",
                                                    {{"resistive", ChainKind::resistive},
                                                     {"power_stage", ChainKind::power_stage}})
                         : ChainKind::resistive;

    // --- power stage ------------------------------------------------------
    PowerStageSpecs& ps = cfg.power_stage;
    ps.rectifier.diode_drop_v = reader.number_or("rectifier.diode_drop_v", 0.4);
    ps.uvlo.rising_v = reader.number_or("uvlo.rising_v", 4.04);
    ps.uvlo.falling_v = reader.number_or("uvlo.falling_v", 3.67);
    if (reader.has("buck.output_setpoint_v")) {
        const double v = reader.number("buck.output_setpoint_v");
        BuckSpec probe;
        probe.output_setpoint_v = v;
        try {
            probe.validate();
        } catch (const ArgumentError&) {
            std::ostringstream msg;
            msg << "buck.output_setpoint_v = " << v
                << " is not a legal choice; pick one of 1.8, 2.5, 3.3, 3.6";
            throw ConfigError(msg.str(), reader.line("buck.output_setpoint_v"));
        }
        ps.buck.output_setpoint_v = v;
    }
    ps.buck.max_output_current_a = reader.number_or("buck.max_output_current_a", 0.1);
    ps.buck.input_min_v = reader.number_or("buck.input_min_v", 2.7);
    ps.buck.input_max_v = reader.number_or("buck.input_max_v", 20.0);
    ps.buck.efficiency = reader.number_or("buck.efficiency", 0.85);

    if (cfg.chain_kind == ChainKind::power_stage) {
        if (!reader.has("storage.input_cap_uf") || !reader.has("storage.output_cap_uf"))
            throw ConfigError(
                "power-stage runs need storage.input_cap_uf and storage.output_cap_uf");
        ps.storage.input_cap_f = uf_to_f(reader.number("storage.input_cap_uf"));
        ps.storage.output_cap_f = uf_to_f(reader.number("storage.output_cap_uf"));
        ps.storage.supercap_f = reader.number_or("storage.supercap_f", 0.0);
        validate_section([&] { ps.validate(); }, reader, "storage.");
        if (cfg.load.open)
            throw ConfigError("a power-stage chain needs a resistive output load");
    } else {
        // UVLO/buck/rectifier numbers are still validated so a later switch
        // to chain.kind = power_stage cannot dodge them.
        ps.storage.input_cap_f = uf_to_f(reader.number_or("storage.input_cap_uf", 10.0));
        ps.storage.output_cap_f = uf_to_f(reader.number_or("storage.output_cap_uf", 47.0));
        ps.storage.supercap_f = reader.number_or("storage.supercap_f", 0.0);
        validate_section([&] { ps.validate(); }, reader, "uvlo.");
    }

    // --- sim --------------------------------------------------------------
    cfg.sim.dt_s = reader.number_or("sim.dt_s", 1.0 / (1000.0 * cfg.drive.frequency_hz));
    cfg.sim.duration_s =
        reader.number_or("sim.duration_s", 300.0 / cfg.drive.frequency_hz);
    cfg.sim.record_stride =
        static_cast<int>(reader.has("sim.record_stride") ? reader.integer("sim.record_stride") : 1);
    validate_section([&] { cfg.sim.validate(); }, reader, "sim.");

    // --- sweep grids --------------------------------------------------------
    cfg.sweep_grid.f_min_hz = reader.number_or("sweep.f_min_hz", 16.0);
    cfg.sweep_grid.f_max_hz = reader.number_or("sweep.f_max_hz", 500.0);
    cfg.sweep_grid.step_hz = reader.number_or("sweep.f_step_hz", 2.0);
    validate_section([&] { cfg.sweep_grid.validate(); }, reader, "sweep.");

    if (reader.has("sweep.resistances_ohm"))
        cfg.sweep_resistances_ohm = reader.number_list("sweep.resistances_ohm");
    else
        cfg.sweep_resistances_ohm = {4.7e3, 10e3, 22e3};

    if (reader.has("study.masses_g")) {
        for (double g : reader.number_list("study.masses_g"))
            cfg.study_masses_kg.push_back(g_to_kg(g));
    } else {
        cfg.study_masses_kg = {0.0, 0.6e-3, 1.0e-3, 1.5e-3};
    }

    // --- fit ---------------------------------------------------------------
    cfg.fit.max_evaluations =
        static_cast<int>(reader.has("fit.max_evaluations") ? reader.integer("fit.max_evaluations")
                                                           : 2000);
    cfg.fit.bounds_factor = reader.number_or("fit.bounds_factor", 10.0);
    if (cfg.fit.max_evaluations < 1)
        throw ConfigError("fit.max_evaluations must be >= 1",
                          reader.line("fit.max_evaluations"));
    if (!(cfg.fit.bounds_factor > 1.0))
        throw ConfigError("fit.bounds_factor must be > 1", reader.line("fit.bounds_factor"));

    return cfg;
}

SystemConfig load_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_config(buffer.str());
}

} // namespace pzsim
