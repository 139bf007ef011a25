/**
 * @file back_analysis.hpp
 * @brief Calibration of the healed-law strength and energy against a
 * measured reload force-CMOD curve.
 */
#pragma once

#include "sdaheal/scenario.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sdaheal {

struct MeasuredCurve {
    std::vector<double> cmod_mm;
    std::vector<double> force_n;

    /// Throws unless there are at least 5 samples with strictly increasing CMOD.
    void validate() const;
    double peak() const;
};

/// Two-column CSV (CMOD mm, force N); a non-numeric first line is a header.
MeasuredCurve read_measured(const std::string& path);

struct FitSpec {
    double fh_lower = 0.05; // MPa
    double fh_upper = 3.0;
    double gh_lower = 5.0;  // N/m
    double gh_upper = 200.0;
    bool fit_fh = true;
    bool fit_gh = true;
    double fixed_fh = 0.7; // used when not fitted
    double fixed_gh = 42.0;
    int grid = 8;           // points per free parameter
    int budget = 86;        // simulator runs after the grid
    double tolerance = 1e-4; // simplex size in log space
    int reload_phase = -1;   // -1: last phase

    void validate() const;
};

struct Evaluation {
    int index = 0;
    std::string stage; // grid, simplex, restart
    double fh = 0.0;
    double gh = 0.0;
    double misfit = 0.0;
    bool failed = false;
};

struct FitResult {
    double fh = 0.0;
    double gh = 0.0;
    double misfit = 0.0;
    bool converged = false;
    int evaluations = 0;
    std::vector<Evaluation> log;
};

/// Reload force-CMOD curve (CMOD mm, force N) of a scenario.
struct SimulatedCurve {
    std::vector<double> cmod_mm;
    std::vector<double> force_n;
    bool complete = false;
};

/// Linear interpolation of the simulated curve onto the measured CMOD
/// samples inside the common range; RMS force difference. Throws when the
/// ranges do not overlap.
double rms_misfit(const SimulatedCurve& simulated, const MeasuredCurve& measured);

/// Runs only the reload phase for each candidate. The state before the
/// reload is computed once per scenario and reused while it does not
/// depend on the healed-law parameters.
class ReloadObjective {
public:
    ReloadObjective(std::vector<Scenario> ensemble, MeasuredCurve measured, int reload_phase = -1,
                    RunOptions opts = {});

    /// Mean RMS misfit over the ensemble, or the failure penalty.
    double operator()(double fh_mpa, double gh, bool* failed = nullptr);
    SimulatedCurve simulate(std::size_t member, double fh_mpa, double gh);
    double penalty() const { return 10.0 * measured_.peak(); }
    int runs() const { return runs_; }

private:
    struct Member {
        Scenario scenario;
        std::optional<Model> model;
        std::optional<GlobalState> state;
    };
    void prepare(Member& m);

    std::vector<Member> members_;
    MeasuredCurve measured_;
    int reload_phase_;
    RunOptions opts_;
    int runs_ = 0;
};

using Objective = std::function<double(double fh, double gh, bool* failed)>;

/// Log-spaced grid over the free parameters, then Nelder-Mead in log space
/// from the best grid point with one restart. Deterministic.
FitResult calibrate(const FitSpec& spec, const Objective& objective);

} // namespace sdaheal
