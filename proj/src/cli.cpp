#include "pzsim/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pzsim/config.hpp"
#include "pzsim/csv.hpp"
#include "pzsim/fit.hpp"
#include "pzsim/units.hpp"

namespace pzsim {

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path; // empty: stdout
    std::string format = "csv";
    bool serial = false;

    Exec exec() const { return serial ? Exec::serial : Exec::parallel; }
    CurveFormat curve_format() const
    {
        return format == "svg" ? CurveFormat::svg : CurveFormat::csv;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_format = true)
{
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_path, "output path (default: stdout)");
    if (with_format)
        cmd->add_option("--format", args.format, "output format")
            ->check(CLI::IsMember({"csv", "svg"}));
    cmd->add_flag("--serial", args.serial, "run sweep kernels on the serial path");
}

void write_output(const std::string& path, const std::string& content)
{
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot open output file '" + path + "'");
    out << content;
    if (!out)
        throw FormatError("failed writing output file '" + path + "'");
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string provenance_comment(const SystemConfig& cfg)
{
    std::string out = "# generated_by = ";
    out += kVersionString;
    out += '\n';
    if (!cfg.preset.empty()) {
        out += "# device = " + cfg.preset + '\n';
        out += "# tip_mass_g = " + fmt(kg_to_g(cfg.params.tip_mass_kg)) + '\n';
    }
    return out;
}

int run_sweep_freq(const CommonArgs& args)
{
    const SystemConfig cfg = load_config_file(args.config_path);
    const SweepCurve curve = frequency_sweep(cfg.params, cfg.drive.accel_amplitude_m_s2,
                                             cfg.sweep_grid, cfg.load, args.exec());
    std::string out = emit_curve(curve, args.curve_format());
    if (args.curve_format() == CurveFormat::csv)
        out = provenance_comment(cfg) + out;
    write_output(args.out_path, out);
    return 0;
}

int run_sweep_load(const CommonArgs& args)
{
    const SystemConfig cfg = load_config_file(args.config_path);
    const SweepCurve curve =
        load_sweep(cfg.params, cfg.drive, cfg.sweep_resistances_ohm, args.exec());
    std::string out = emit_curve(curve, args.curve_format());
    if (args.curve_format() == CurveFormat::csv)
        out = provenance_comment(cfg) + out;
    write_output(args.out_path, out);
    return 0;
}

int run_mass_study(const CommonArgs& args)
{
    const SystemConfig cfg = load_config_file(args.config_path);
    const auto rows = tip_mass_study(cfg.params.with_tip_mass(0.0), cfg.study_masses_kg,
                                     cfg.drive.accel_amplitude_m_s2, args.exec());

    if (args.curve_format() == CurveFormat::svg) {
        SweepCurve curve;
        curve.abscissa_kind = AbscissaKind::tip_mass_kg;
        curve.value_kind = ValueKind::resonant_freq;
        for (const auto& r : rows)
            curve.points.push_back({r.tip_mass_kg, r.resonant_freq_hz});
        write_output(args.out_path, emit_curve(curve, CurveFormat::svg));
        return 0;
    }

    std::string out = provenance_comment(cfg);
    out += "tip_mass_g,frequency_hz,voltage_v\n";
    for (const auto& r : rows) {
        out += fmt(kg_to_g(r.tip_mass_kg));
        out += ',';
        out += fmt(r.resonant_freq_hz);
        out += ',';
        out += fmt(r.peak_voltage_v);
        out += '\n';
    }
    write_output(args.out_path, out);
    return 0;
}

int run_transient_cmd(const CommonArgs& args)
{
    const SystemConfig cfg = load_config_file(args.config_path);
    const Trace trace = run_transient(cfg.params, cfg.chain(), cfg.drive, cfg.sim);

    if (args.curve_format() == CurveFormat::svg) {
        SweepCurve curve; // output voltage vs time, reusing the plot machinery
        curve.abscissa_kind = AbscissaKind::frequency_hz;
        curve.value_kind = ValueKind::volt_amplitude;
        std::string svg;
        {
            // time axis in seconds; relabel by simple substitution
            for (std::size_t i = 0; i < trace.size(); ++i)
                curve.points.push_back({trace.t[i], trace.v_output[i]});
            svg = emit_curve(curve, CurveFormat::svg);
            const std::string from = "frequency [Hz]";
            const std::string to = "time [s]";
            if (const auto pos = svg.find(from); pos != std::string::npos)
                svg.replace(pos, from.size(), to);
        }
        write_output(args.out_path, svg);
        return 0;
    }

    std::string out = provenance_comment(cfg);
    out += "t_s,x_m,xdot_m_s,v_piezo_v,v_input_cap_v,v_output_v,mode,"
           "p_input_w,p_mech_w,p_diode_w,p_converter_w,p_delivered_w,e_stored_j\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += fmt(trace.t[i]);
        for (const double v : {trace.x[i], trace.xdot[i], trace.v_piezo[i],
                               trace.v_input_cap[i], trace.v_output[i]}) {
            out += ',';
            out += fmt(v);
        }
        out += ',';
        out += std::to_string(static_cast<int>(trace.mode[i]));
        for (const double v : {trace.p_input[i], trace.p_mech[i], trace.p_diode[i],
                               trace.p_converter[i], trace.p_delivered[i],
                               trace.e_stored[i]}) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    write_output(args.out_path, out);

    const auto ledger = energy_audit(trace);
    std::ostringstream summary;
    summary << "input_work_j = " << fmt(ledger.input_work_j)
            << "\ndelivered_j = " << fmt(ledger.delivered_j)
            << "\nresidual_j = " << fmt(ledger.residual_j) << '\n';
    std::cerr << summary.str();
    return 0;
}

FitParamId parse_param_name(const std::string& name)
{
    for (FitParamId id : {FitParamId::m_eff, FitParamId::k_eff, FitParamId::zeta,
                          FitParamId::theta, FitParamId::c_p, FitParamId::accel_amplitude})
        if (name == to_string(id))
            return id;
    throw CLI::ValidationError("--free", "unknown parameter '" + name +
                                             "'; legal names: m_eff, k_eff, zeta, theta, "
                                             "c_p, accel_amplitude");
}

std::vector<FitTarget> targets_from_file(const std::string& path)
{
    const MeasuredSweep sweep = parse_sweep_csv_file(path);
    if (sweep.sorted_on_parse)
        std::cerr << "warning: rows in '" << path << "' were out of order; sorted\n";

    std::vector<FitTarget> targets;
    switch (sweep.curve.abscissa_kind) {
    case AbscissaKind::tip_mass_kg:
        for (const auto& pt : sweep.curve.points)
            targets.push_back({FitTargetKind::resonant_freq_at_mass, pt.abscissa,
                               pt.value, 1.0});
        break;
    case AbscissaKind::resistance_ohm:
        for (const auto& pt : sweep.curve.points)
            targets.push_back({FitTargetKind::power_at_load, pt.abscissa, pt.value, 1.0});
        break;
    case AbscissaKind::frequency_hz: {
        if (!sweep.provenance.tip_mass_g.has_value())
            throw FormatError("voltage sweep '" + path +
                              "' needs '# tip_mass_g = <g>' metadata for fitting");
        const double mass_kg = g_to_kg(*sweep.provenance.tip_mass_g);
        double peak_value = sweep.curve.points.front().value;
        for (const auto& pt : sweep.curve.points)
            peak_value = std::max(peak_value, pt.value);
        targets.push_back({FitTargetKind::peak_voltage_at_mass, mass_kg, peak_value, 1.0});
        if (sweep.curve.points.size() >= 3) {
            const auto peak = find_resonance(sweep.curve);
            if (!peak.on_boundary)
                targets.push_back({FitTargetKind::resonant_freq_at_mass, mass_kg,
                                   peak.frequency_hz, 1.0});
        }
        break;
    }
    }
    return targets;
}

int run_fit(const CommonArgs& args, const std::vector<std::string>& data_paths,
            const std::string& free_list)
{
    const SystemConfig cfg = load_config_file(args.config_path);

    FitProblem problem;
    for (const auto& path : data_paths) {
        const auto targets = targets_from_file(path);
        problem.targets.insert(problem.targets.end(), targets.begin(), targets.end());
    }

    std::string_view rest = free_list;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string name{rest.substr(0, comma)};
        problem.free_params.push_back(parse_param_name(name));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }

    FitInit init;
    init.params = cfg.params;
    init.accel_amplitude_m_s2 = cfg.drive.accel_amplitude_m_s2;
    const double factor = cfg.fit.bounds_factor;
    for (FitParamId id : problem.free_params) {
        double v = 0.0;
        switch (id) {
        case FitParamId::m_eff: v = init.params.m_eff_kg; break;
        case FitParamId::k_eff: v = init.params.k_eff_n_m; break;
        case FitParamId::zeta: v = init.params.zeta; break;
        case FitParamId::theta: v = init.params.theta_n_v; break;
        case FitParamId::c_p: v = init.params.c_p_f; break;
        case FitParamId::accel_amplitude: v = init.accel_amplitude_m_s2; break;
        }
        problem.bounds[id] = FitBounds{v / factor, v * factor};
    }

    FitOptions options;
    options.max_evaluations = cfg.fit.max_evaluations;
    const FitResult result = fit_params(problem, init, options);

    std::ostringstream report;
    report << "# generated_by = " << kVersionString << '\n';
    report << "converged = " << (result.converged ? "true" : "false") << '\n';
    report << "iterations = " << result.iterations << '\n';
    report << "residual = " << fmt(result.residual) << '\n';
    report << "m_eff_g = " << fmt(kg_to_g(result.params.m_eff_kg)) << '\n';
    report << "k_eff_n_per_m = " << fmt(result.params.k_eff_n_m) << '\n';
    report << "zeta = " << fmt(result.params.zeta) << '\n';
    report << "theta_n_per_v = " << fmt(result.params.theta_n_v) << '\n';
    report << "c_p_nf = " << fmt(result.params.c_p_f * 1e9) << '\n';
    report << "tip_mass_g = " << fmt(kg_to_g(result.params.tip_mass_kg)) << '\n';
    report << "accel_m_s2 = " << fmt(result.accel_amplitude_m_s2) << '\n';
    write_output(args.out_path, report.str());

    if (!result.converged) {
        std::cerr << "fit did not converge within " << options.max_evaluations
                  << " evaluations\n";
        return 4;
    }
    return 0;
}

int run_report(const CommonArgs& args)
{
    const SystemConfig cfg = load_config_file(args.config_path);
    const double f_n = natural_frequency(cfg.params);
    const auto oc = solve_phasor(cfg.params, DriveSpec{cfg.drive.accel_amplitude_m_s2, f_n},
                                 LoadSpec::open_circuit());
    const double r_opt = optimal_load(cfg.params, f_n);
    const auto matched =
        solve_phasor(cfg.params, DriveSpec{cfg.drive.accel_amplitude_m_s2, f_n},
                     LoadSpec::resistive(r_opt));

    std::ostringstream report;
    report << "# generated_by = " << kVersionString << '\n';
    if (!cfg.preset.empty())
        report << "device = " << cfg.preset << '\n';
    if (cfg.beam) {
        report << "beam_kind = "
               << (cfg.beam->kind == BeamKind::bimorph ? "bimorph" : "unimorph") << '\n';
        report << "beam_mm = " << fmt(cfg.beam->total_length_mm) << " x "
               << fmt(cfg.beam->width_mm) << " x " << fmt(cfg.beam->thickness_mm) << '\n';
        report << "piezo_mm = " << fmt(cfg.beam->piezo_length_mm) << " x "
               << fmt(cfg.beam->piezo_width_mm) << " x " << fmt(cfg.beam->piezo_thickness_mm)
               << '\n';
    }
    report << "m_eff_g = " << fmt(kg_to_g(cfg.params.m_eff_kg)) << '\n';
    report << "k_eff_n_per_m = " << fmt(cfg.params.k_eff_n_m) << '\n';
    report << "zeta = " << fmt(cfg.params.zeta) << '\n';
    report << "theta_n_per_v = " << fmt(cfg.params.theta_n_v) << '\n';
    report << "c_p_nf = " << fmt(cfg.params.c_p_f * 1e9) << '\n';
    report << "tip_mass_g = " << fmt(kg_to_g(cfg.params.tip_mass_kg)) << '\n';
    report << "natural_frequency_hz = " << fmt(f_n) << '\n';
    report << "drive_accel_m_s2 = " << fmt(cfg.drive.accel_amplitude_m_s2) << '\n';
    report << "open_circuit_voltage_v = " << fmt(oc.volt_amplitude_v) << '\n';
    report << "optimal_load_ohm = " << fmt(r_opt) << '\n';
    report << "power_at_optimal_load_w = " << fmt(matched.avg_power_w) << '\n';
    if (cfg.chain_kind == ChainKind::power_stage) {
        report << "uvlo_rising_v = " << fmt(cfg.power_stage.uvlo.rising_v) << '\n';
        report << "uvlo_falling_v = " << fmt(cfg.power_stage.uvlo.falling_v) << '\n';
        report << "buck_setpoint_v = " << fmt(cfg.power_stage.buck.output_setpoint_v) << '\n';
        report << "buck_efficiency = " << fmt(cfg.power_stage.buck.efficiency) << '\n';
        report << "load_power_at_setpoint_w = "
               << fmt(cfg.power_stage.buck.output_setpoint_v *
                      cfg.power_stage.buck.output_setpoint_v / cfg.load.resistance_ohm)
               << '\n';
    }
    write_output(args.out_path, report.str());
    return 0;
}

} // namespace

int cli_dispatch(int argc, const char* const* argv)
{
    CLI::App app{"piezoelectric cantilever micro power supply simulator"};
    app.require_subcommand(1);

    CommonArgs sweep_freq_args;
    auto* sweep_freq = app.add_subcommand(
        "sweep-freq", "frequency sweep of the harvester at the configured load");
    add_common(sweep_freq, sweep_freq_args);

    CommonArgs sweep_load_args;
    auto* sweep_load_cmd =
        app.add_subcommand("sweep-load", "power vs load resistance at the drive frequency");
    add_common(sweep_load_cmd, sweep_load_args);

    CommonArgs mass_args;
    auto* mass_study =
        app.add_subcommand("mass-study", "resonance and peak voltage per tip mass");
    add_common(mass_study, mass_args);

    CommonArgs transient_args;
    auto* transient_cmd =
        app.add_subcommand("transient", "time-domain run of harvester + chain");
    add_common(transient_cmd, transient_args);

    CommonArgs fit_args;
    std::vector<std::string> fit_data;
    std::string fit_free;
    auto* fit_cmd = app.add_subcommand("fit", "least-squares parameter fit to sweep data");
    add_common(fit_cmd, fit_args, /*with_format=*/false);
    fit_cmd->add_option("--data", fit_data, "measured sweep CSV (repeatable)")
        ->required()
        ->take_all();
    fit_cmd->add_option("--free", fit_free, "comma-separated free parameters")->required();

    CommonArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "summary of the configured system");
    add_common(report_cmd, report_args, /*with_format=*/false);

    try {
        app.parse(argc, argv);

        if (sweep_freq->parsed())
            return run_sweep_freq(sweep_freq_args);
        if (sweep_load_cmd->parsed())
            return run_sweep_load(sweep_load_args);
        if (mass_study->parsed())
            return run_mass_study(mass_args);
        if (transient_cmd->parsed())
            return run_transient_cmd(transient_args);
        if (fit_cmd->parsed())
            return run_fit(fit_args, fit_data, fit_free);
        if (report_cmd->parsed())
            return run_report(report_args);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}

} // namespace pzsim
