#include "pzsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "pzsim/units.hpp"

namespace pzsim {

namespace {

struct Schema {
    const char* header;
    AbscissaKind abscissa;
    ValueKind value;
    bool abscissa_in_grams;
};

constexpr Schema kSchemas[] = {
    {"frequency_hz,voltage_v", AbscissaKind::frequency_hz, ValueKind::volt_amplitude, false},
    {"frequency_hz,power_w", AbscissaKind::frequency_hz, ValueKind::avg_power, false},
    {"resistance_ohm,power_w", AbscissaKind::resistance_ohm, ValueKind::avg_power, false},
    {"tip_mass_g,frequency_hz", AbscissaKind::tip_mass_kg, ValueKind::resonant_freq, true},
};

const Schema* find_schema(const std::string& header)
{
    for (const auto& s : kSchemas)
        if (header == s.header)
            return &s;
    return nullptr;
}

const Schema* find_schema(AbscissaKind abscissa, ValueKind value)
{
    for (const auto& s : kSchemas)
        if (s.abscissa == abscissa && s.value == value)
            return &s;
    return nullptr;
}

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& cell, int row)
{
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw FormatError("cell '" + cell + "' is not numeric", row);
    return v;
}

std::string format_value(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// provenance comments look like '# key = value'
void read_metadata(const std::string& comment, SweepProvenance& prov)
{
    const auto eq = comment.find('=');
    if (eq == std::string::npos)
        return;
    const std::string key = trim(comment.substr(0, eq));
    const std::string value = trim(comment.substr(eq + 1));
    if (key == "device") {
        prov.device = value;
    } else if (key == "tip_mass_g") {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end != value.c_str() && *end == '\0')
            prov.tip_mass_g = v;
    }
}

} // namespace

MeasuredSweep parse_sweep_csv(std::istream& in)
{
    MeasuredSweep sweep;
    std::string line;
    const Schema* schema = nullptr;
    int row = 0;

    while (std::getline(in, line)) {
        std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        if (stripped.front() == '#') {
            read_metadata(trim(stripped.substr(1)), sweep.provenance);
            continue;
        }
        if (!schema) {
            schema = find_schema(stripped);
            if (!schema) {
                std::string legal;
                for (const auto& s : kSchemas) {
                    if (!legal.empty())
                        legal += "; ";
                    legal += s.header;
                }
                throw FormatError("unrecognized CSV header '" + stripped +
                                  "'; expected one of: " + legal);
            }
            sweep.curve.abscissa_kind = schema->abscissa;
            sweep.curve.value_kind = schema->value;
            continue;
        }

        ++row;
        const auto comma = stripped.find(',');
        if (comma == std::string::npos || stripped.find(',', comma + 1) != std::string::npos)
            throw FormatError("expected exactly two comma-separated cells", row);
        double abscissa = parse_cell(trim(stripped.substr(0, comma)), row);
        const double value = parse_cell(trim(stripped.substr(comma + 1)), row);
        if (schema->abscissa_in_grams)
            abscissa = g_to_kg(abscissa);
        sweep.curve.points.push_back({abscissa, value});
    }

    if (!schema)
        throw FormatError("missing CSV header row");
    if (sweep.curve.points.empty())
        throw FormatError("no data rows");

    auto& pts = sweep.curve.points;
    if (!std::is_sorted(pts.begin(), pts.end(),
                        [](const CurvePoint& a, const CurvePoint& b) {
                            return a.abscissa < b.abscissa;
                        })) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const CurvePoint& a, const CurvePoint& b) {
                             return a.abscissa < b.abscissa;
                         });
        sweep.sorted_on_parse = true;
    }
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].abscissa == pts[i - 1].abscissa)
            throw FormatError("duplicate abscissa value " + format_value(pts[i].abscissa),
                              static_cast<int>(i + 1));

    sweep.curve.validate();
    return sweep;
}

MeasuredSweep parse_sweep_csv_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open data file '" + path + "'");
    return parse_sweep_csv(in);
}

namespace {

std::string emit_csv(const SweepCurve& curve)
{
    const Schema* schema = find_schema(curve.abscissa_kind, curve.value_kind);
    if (!schema)
        throw ArgumentError("no CSV schema for this curve kind combination");

    std::string out = schema->header;
    out += '\n';
    for (const auto& pt : curve.points) {
        const double abscissa =
            schema->abscissa_in_grams ? kg_to_g(pt.abscissa) : pt.abscissa;
        out += format_value(abscissa);
        out += ',';
        out += format_value(pt.value);
        out += '\n';
    }
    return out;
}

const char* abscissa_label(AbscissaKind kind)
{
    switch (kind) {
    case AbscissaKind::frequency_hz: return "frequency [Hz]";
    case AbscissaKind::resistance_ohm: return "resistance [ohm]";
    case AbscissaKind::tip_mass_kg: return "tip mass [g]";
    }
    return "";
}

const char* value_label(ValueKind kind)
{
    switch (kind) {
    case ValueKind::volt_amplitude: return "voltage [V]";
    case ValueKind::avg_power: return "power [W]";
    case ValueKind::resonant_freq: return "resonant frequency [Hz]";
    }
    return "";
}

std::string format_coord(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string format_tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string emit_svg(const SweepCurve& curve)
{
    constexpr double width = 800.0, height = 600.0;
    constexpr double left = 80.0, right = 770.0, top = 30.0, bottom = 540.0;

    double x_min = curve.points.front().abscissa;
    double x_max = curve.points.back().abscissa;
    double y_min = curve.points.front().value;
    double y_max = y_min;
    for (const auto& pt : curve.points) {
        y_min = std::min(y_min, pt.value);
        y_max = std::max(y_max, pt.value);
    }
    const bool grams = curve.abscissa_kind == AbscissaKind::tip_mass_kg;
    if (grams) {
        x_min = kg_to_g(x_min);
        x_max = kg_to_g(x_max);
    }
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const auto sx = [&](double x) {
        return left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    const auto sy = [&](double y) {
        return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' '
        << height << "\">\n";
    svg << "<desc>" << kVersionString << "</desc>\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";

    // axes
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << left
        << "\" y2=\"" << top << "\" stroke=\"black\"/>\n";

    // ticks and labels
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 4.0;
        const double px = sx(fx);
        svg << "<line x1=\"" << format_coord(px) << "\" y1=\"" << bottom << "\" x2=\""
            << format_coord(px) << "\" y2=\"" << bottom + 6 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << format_coord(px) << "\" y=\"" << bottom + 22
            << "\" font-size=\"13\" text-anchor=\"middle\">" << format_tick(fx)
            << "</text>\n";

        const double fy = y_min + (y_max - y_min) * i / 4.0;
        const double py = sy(fy);
        svg << "<line x1=\"" << left - 6 << "\" y1=\"" << format_coord(py) << "\" x2=\""
            << left << "\" y2=\"" << format_coord(py) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 10 << "\" y=\"" << format_coord(py + 4)
            << "\" font-size=\"13\" text-anchor=\"end\">" << format_tick(fy)
            << "</text>\n";
    }

    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 45
        << "\" font-size=\"15\" text-anchor=\"middle\">"
        << abscissa_label(curve.abscissa_kind) << "</text>\n";
    svg << "<text x=\"20\" y=\"" << (top + bottom) / 2
        << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (top + bottom) / 2 << ")\">" << value_label(curve.value_kind) << "</text>\n";

    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (i)
            svg << ' ';
        const double x = grams ? kg_to_g(curve.points[i].abscissa) : curve.points[i].abscissa;
        svg << format_coord(sx(x)) << ',' << format_coord(sy(curve.points[i].value));
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

} // namespace

std::string emit_curve(const SweepCurve& curve, CurveFormat format)
{
    curve.validate();
    return format == CurveFormat::csv ? emit_csv(curve) : emit_svg(curve);
}

} // namespace pzsim
