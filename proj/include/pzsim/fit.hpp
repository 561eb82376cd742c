#pragma once

#include <map>
#include <vector>

#include "pzsim/harvester.hpp"

namespace pzsim {

// Least-squares fitting of lumped parameters (and optionally the drive
// amplitude) to measured targets. The objective is a weighted sum of
// squared relative errors, minimized by a derivative-free Nelder-Mead
// simplex over log-parameters with box-constraint projection.

enum class FitParamId {
    m_eff,
    k_eff,
    zeta,
    theta,
    c_p,
    accel_amplitude,
};

const char* to_string(FitParamId id);

enum class FitTargetKind {
    resonant_freq_at_mass, // param: tip mass [kg],   observed: frequency [Hz]
    peak_voltage_at_mass,  // param: tip mass [kg],   observed: open-circuit volts
    power_at_load,         // param: resistance [ohm], observed: watts at resonance
};

struct FitTarget {
    FitTargetKind kind = FitTargetKind::resonant_freq_at_mass;
    double param = 0.0;
    double observed = 0.0;
    double weight = 1.0;
};

struct FitBounds {
    double lower = 0.0;
    double upper = 0.0;
};

struct FitProblem {
    std::vector<FitTarget> targets;
    std::vector<FitParamId> free_params;
    std::map<FitParamId, FitBounds> bounds; // per free parameter

    void validate() const;
};

struct FitInit {
    LumpedParams params;
    double accel_amplitude_m_s2 = 9.81;
};

struct FitOptions {
    int max_evaluations = 2000;
    double diameter_tol = 1e-6; // relative simplex diameter
};

struct FitResult {
    LumpedParams params;
    double accel_amplitude_m_s2 = 0.0;
    double residual = 0.0; // weighted RMS of relative errors
    int iterations = 0;
    bool converged = false;
};

// Model prediction for one target given a candidate parameter set.
double predict_target(const FitTarget& target, const LumpedParams& params,
                      double accel_amplitude_m_s2);

// Weighted RMS of relative errors over all targets.
double fit_residual(const FitProblem& problem, const LumpedParams& params,
                    double accel_amplitude_m_s2);

FitResult fit_params(const FitProblem& problem, const FitInit& init,
                     const FitOptions& options = {});

} // namespace pzsim
