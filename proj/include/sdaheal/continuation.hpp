/**
 * @file continuation.hpp
 * @brief Load programs: force, displacement and CMOD stepping, rest periods
 * and the clock that drives healing maturity.
 */
#pragma once

#include "sdaheal/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sdaheal {

struct Phase {
    std::string name;
    ControlMode mode = ControlMode::force;
    int pattern = -1;             // force, cmod
    int dof = -1;                 // displacement
    double increment = 0.0;       // N for force, m for displacement and cmod
    double step_time = 0.0;       // h per step
    std::optional<double> until_cmod;         // m
    std::optional<double> until_displacement; // m
    std::optional<double> until_load;         // N
    int steps = 0;                // exact count without a target, cap with one
    bool release_at_end = false;  // explicit release of every eligible point
};

struct LoadProgram {
    std::vector<Phase> phases;
};

/// What the reaction column of the history reports.
struct OutputSpec {
    enum class Kind { load, dof } kind = Kind::load;
    int index = 0; // pattern or dof
};

struct HistoryRow {
    int step = 0;
    double time = 0.0;     // h
    double lambda = 0.0;   // N
    double reaction = 0.0; // N
    double cmod = 0.0;     // m
    double control = 0.0;
    int phase = -1;
};

struct ReleaseEvent {
    int segment = -1;
    int step = 0;
    double time = 0.0;
};

struct RunHistory {
    std::vector<HistoryRow> rows;
    bool complete = true;
    std::string failure;
    double max_balance_error = 0.0; // over every committed open point, / f_t
    double max_activation_excess = 0.0; // committed closed virgin points, drive / f_t - 1
    int committed_points = 0;
    int step_cuts = 0;
    std::vector<ReleaseEvent> releases;
    bool agent_loaded = false; // a mechanical step ran with a released agent
    /// Indexed by step number: T_mx of every segment and the time after the step.
    std::vector<std::vector<double>> max_traction_trace;
    std::vector<double> step_times;
};

struct RunOptions {
    NewtonOptions newton;
    int max_cuts = 8;
    int max_resolves = 10;
    int first_phase = 0;
    int last_phase = -1; // inclusive, -1 for all
    bool record_traces = false;
    bool initial_row = true;
    std::function<void(const HistoryRow&)> on_row;
    std::function<void(int phase, const GlobalState&)> on_phase_end;
};

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Embeds the whole prescribed path if the crack mode asks for one.
void prepare_crack(const Model& model, GlobalState& state);

/// Executes the phases in order, committing cohesive histories after every
/// converged step. Partial histories are returned with complete = false.
RunHistory run_program(Model& model, const LoadProgram& program, GlobalState& state,
                       const OutputSpec& output, const RunOptions& opts = {});

/// Release times under the explicit strategy: a segment created at step c
/// releases at the first step i >= c whose recorded T_mx is <= T_0, with
/// t_r = t_i. `traces[i][s]` is T_mx of segment s after step i (absent
/// entries mean the segment did not yet exist).
std::vector<std::optional<double>> assign_release_times(
    const std::vector<int>& created_step, const std::vector<std::vector<double>>& traces,
    const std::vector<double>& step_times, double threshold);

} // namespace sdaheal
