#include "pzsim/fit.hpp"

#include <algorithm>
#include <cmath>

namespace pzsim {

namespace {

double get_param(const LumpedParams& p, double accel, FitParamId id)
{
    switch (id) {
    case FitParamId::m_eff: return p.m_eff_kg;
    case FitParamId::k_eff: return p.k_eff_n_m;
    case FitParamId::zeta: return p.zeta;
    case FitParamId::theta: return p.theta_n_v;
    case FitParamId::c_p: return p.c_p_f;
    case FitParamId::accel_amplitude: return accel;
    }
    return 0.0;
}

void set_param(LumpedParams& p, double& accel, FitParamId id, double value)
{
    switch (id) {
    case FitParamId::m_eff: p.m_eff_kg = value; break;
    case FitParamId::k_eff: p.k_eff_n_m = value; break;
    case FitParamId::zeta: p.zeta = value; break;
    case FitParamId::theta: p.theta_n_v = value; break;
    case FitParamId::c_p: p.c_p_f = value; break;
    case FitParamId::accel_amplitude: accel = value; break;
    }
}

} // namespace

const char* to_string(FitParamId id)
{
    switch (id) {
    case FitParamId::m_eff: return "m_eff";
    case FitParamId::k_eff: return "k_eff";
    case FitParamId::zeta: return "zeta";
    case FitParamId::theta: return "theta";
    case FitParamId::c_p: return "c_p";
    case FitParamId::accel_amplitude: return "accel_amplitude";
    }
    return "?";
}

void FitProblem::validate() const
{
    if (targets.empty())
        throw ArgumentError("fit needs at least one target");
    if (free_params.empty())
        throw ArgumentError("fit needs at least one free parameter");
    for (const auto& t : targets) {
        if (!(t.weight > 0))
            throw ArgumentError("fit target weights must be > 0");
        if (!(t.observed != 0) || !std::isfinite(t.observed))
            throw ArgumentError("fit targets must be finite and nonzero (relative errors)");
    }
    for (FitParamId id : free_params) {
        const auto it = bounds.find(id);
        if (it == bounds.end())
            throw ArgumentError(std::string("missing bounds for free parameter ") +
                                to_string(id));
        if (!std::isfinite(it->second.lower) || !std::isfinite(it->second.upper) ||
            !(it->second.lower < it->second.upper))
            throw ArgumentError(std::string("bounds for ") + to_string(id) +
                                " must be finite with lower < upper");
    }

    // Drive amplitude and theta only enter voltage predictions through their
    // product; with voltage-only targets they cannot both be free.
    const bool theta_free =
        std::find(free_params.begin(), free_params.end(), FitParamId::theta) !=
        free_params.end();
    const bool accel_free =
        std::find(free_params.begin(), free_params.end(), FitParamId::accel_amplitude) !=
        free_params.end();
    if (theta_free && accel_free) {
        const bool voltage_only =
            std::all_of(targets.begin(), targets.end(), [](const FitTarget& t) {
                return t.kind == FitTargetKind::peak_voltage_at_mass;
            });
        if (voltage_only)
            throw ArgumentError(
                "theta and accel_amplitude are jointly unidentifiable from "
                "voltage-only targets; fix one of them");
    }
}

double predict_target(const FitTarget& target, const LumpedParams& params,
                      double accel_amplitude_m_s2)
{
    switch (target.kind) {
    case FitTargetKind::resonant_freq_at_mass:
        return natural_frequency(params.with_tip_mass(target.param));
    case FitTargetKind::peak_voltage_at_mass: {
        const LumpedParams p = params.with_tip_mass(target.param);
        const DriveSpec drive{accel_amplitude_m_s2, natural_frequency(p)};
        return solve_phasor(p, drive, LoadSpec::open_circuit()).volt_amplitude_v;
    }
    case FitTargetKind::power_at_load: {
        // measured at the tracked resonance, like the bench protocol
        const DriveSpec drive{accel_amplitude_m_s2, natural_frequency(params)};
        return solve_phasor(params, drive, LoadSpec::resistive(target.param)).avg_power_w;
    }
    }
    return 0.0;
}

double fit_residual(const FitProblem& problem, const LumpedParams& params,
                    double accel_amplitude_m_s2)
{
    double weighted_sq = 0.0;
    double weight_sum = 0.0;
    for (const auto& t : problem.targets) {
        const double pred = predict_target(t, params, accel_amplitude_m_s2);
        const double rel = (pred - t.observed) / t.observed;
        weighted_sq += t.weight * rel * rel;
        weight_sum += t.weight;
    }
    return std::sqrt(weighted_sq / weight_sum);
}

FitResult fit_params(const FitProblem& problem, const FitInit& init,
                     const FitOptions& options)
{
    problem.validate();
    init.params.validate();
    if (!(init.accel_amplitude_m_s2 > 0))
        throw ArgumentError("initial drive amplitude must be > 0");

    const std::size_t n = problem.free_params.size();

    // Work in log-space: every fittable parameter is positive and they span
    // several orders of magnitude. The simplex diameter in log-space is a
    // relative diameter, matching the convergence criterion directly.
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = problem.bounds.at(problem.free_params[i]);
        const double lower = std::max(b.lower, 1e-300);
        lo[i] = std::log(lower);
        hi[i] = std::log(b.upper);
    }

    const auto project = [&](std::vector<double>& u) {
        for (std::size_t i = 0; i < n; ++i)
            u[i] = std::clamp(u[i], lo[i], hi[i]);
    };

    int evaluations = 0;
    const auto objective = [&](const std::vector<double>& u) {
        LumpedParams p = init.params;
        double accel = init.accel_amplitude_m_s2;
        for (std::size_t i = 0; i < n; ++i)
            set_param(p, accel, problem.free_params[i], std::exp(u[i]));
        ++evaluations;
        return fit_residual(problem, p, accel);
    };

    // Initial simplex: the (projected) starting point plus one vertex per
    // free parameter, offset by 5% in log-space.
    std::vector<std::vector<double>> simplex;
    std::vector<double> u0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = get_param(init.params, init.accel_amplitude_m_s2,
                                   problem.free_params[i]);
        if (!(v > 0))
            throw ArgumentError(std::string("initial value for ") +
                                to_string(problem.free_params[i]) + " must be > 0");
        u0[i] = std::log(v);
    }
    project(u0);
    simplex.push_back(u0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> u = u0;
        u[i] += (u[i] + 0.05 <= hi[i]) ? 0.05 : -0.05;
        project(u);
        simplex.push_back(u);
    }

    std::vector<double> value(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i)
        value[i] = objective(simplex[i]);

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    int iterations = 0;
    bool converged = false;

    const auto diameter = [&]() {
        double d = 0.0;
        for (std::size_t a = 0; a < simplex.size(); ++a)
            for (std::size_t b = a + 1; b < simplex.size(); ++b)
                for (std::size_t i = 0; i < n; ++i)
                    d = std::max(d, std::abs(simplex[a][i] - simplex[b][i]));
        return d;
    };

    while (evaluations < options.max_evaluations) {
        // order: value[order[0]] best
        std::vector<std::size_t> order(simplex.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });

        if (diameter() < options.diameter_tol) {
            converged = true;
            break;
        }
        ++iterations;

        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];
        const std::size_t best = order.front();

        std::vector<double> centroid(n, 0.0);
        for (std::size_t s = 0; s < simplex.size(); ++s) {
            if (s == worst)
                continue;
            for (std::size_t i = 0; i < n; ++i)
                centroid[i] += simplex[s][i];
        }
        for (double& c : centroid)
            c /= static_cast<double>(simplex.size() - 1);

        const auto blend = [&](double coeff) {
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i)
                u[i] = centroid[i] + coeff * (centroid[i] - simplex[worst][i]);
            project(u);
            return u;
        };

        const auto reflected = blend(alpha);
        const double f_reflected = objective(reflected);

        if (f_reflected < value[best]) {
            const auto expanded = blend(gamma);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                value[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                value[worst] = f_reflected;
            }
        } else if (f_reflected < value[second_worst]) {
            simplex[worst] = reflected;
            value[worst] = f_reflected;
        } else {
            const auto contracted = blend(-rho);
            const double f_contracted = objective(contracted);
            if (f_contracted < value[worst]) {
                simplex[worst] = contracted;
                value[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                for (std::size_t s = 0; s < simplex.size(); ++s) {
                    if (s == best)
                        continue;
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[s][i] = simplex[best][i] +
                                        sigma * (simplex[s][i] - simplex[best][i]);
                    project(simplex[s]);
                    value[s] = objective(simplex[s]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
        if (value[i] < value[best])
            best = i;

    FitResult result;
    result.params = init.params;
    result.accel_amplitude_m_s2 = init.accel_amplitude_m_s2;
    for (std::size_t i = 0; i < n; ++i) {
        // clamp in linear space: exp(log(b)) can land one ulp outside the box
        const auto& b = problem.bounds.at(problem.free_params[i]);
        set_param(result.params, result.accel_amplitude_m_s2, problem.free_params[i],
                  std::clamp(std::exp(simplex[best][i]), b.lower, b.upper));
    }
    result.residual = value[best];
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

} // namespace pzsim
