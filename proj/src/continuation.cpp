/** @file continuation.cpp */

#include "sdaheal/continuation.hpp"

#include "sdaheal/crack_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdaheal {

namespace {

constexpr int unbounded_steps = 100000;

class Runner {
public:
    Runner(Model& model, GlobalState& state, const OutputSpec& output, const RunOptions& opts,
           RunHistory& hist)
        : model_(model), state_(state), output_(output), opts_(opts), hist_(hist),
          newton_(model, opts.newton)
    {
    }

    bool run(const LoadProgram& program)
    {
        prepare_crack(model_, state_);
        const int last = opts_.last_phase < 0 ? static_cast<int>(program.phases.size()) - 1
                                              : opts_.last_phase;
        if (opts_.initial_row) {
            if (!refresh_reaction()) return false;
            emit(-1, 0.0);
            if (opts_.record_traces) record_trace();
        }
        for (int p = opts_.first_phase; p <= last; ++p) {
            if (!run_phase(program.phases[p], p)) return false;
            if (opts_.on_phase_end) opts_.on_phase_end(p, state_);
        }
        return true;
    }

private:
    bool refresh_reaction()
    {
        const AssemblyResult& a = newton_.evaluate(state_, state_.time);
        if (!a.ok()) return fail("local solve failed while evaluating the initial state");
        reaction_ = output_reaction(a);
        return true;
    }

    double output_reaction(const AssemblyResult& a) const
    {
        if (output_.kind == OutputSpec::Kind::load)
            return output_.index < static_cast<int>(state_.lambda.size())
                       ? state_.lambda[output_.index]
                       : 0.0;
        return a.internal(output_.index);
    }

    double control_value(const Phase& ph, double rest_elapsed) const
    {
        switch (ph.mode) {
        case ControlMode::force:
            return state_.lambda[ph.pattern];
        case ControlMode::displacement:
            return state_.u(ph.dof) * 1e3;
        case ControlMode::cmod:
            return model_.cmod_value(state_.u) * 1e3;
        case ControlMode::rest:
            return rest_elapsed;
        }
        return 0.0;
    }

    void emit(int phase, double control)
    {
        HistoryRow row;
        row.step = state_.step;
        row.time = state_.time;
        row.phase = phase;
        row.lambda = lambda_column(phase);
        row.reaction = reaction_;
        row.cmod = model_.cmod_value(state_.u);
        row.control = control;
        hist_.rows.push_back(row);
        if (opts_.on_row) opts_.on_row(row);
    }

    double lambda_column(int phase) const
    {
        if (phase >= 0 && current_pattern_ >= 0) return state_.lambda[current_pattern_];
        if (output_.kind == OutputSpec::Kind::load && output_.index < int(state_.lambda.size()))
            return state_.lambda[output_.index];
        return 0.0;
    }

    void record_trace()
    {
        std::vector<double> t;
        t.reserve(state_.cohesive.size());
        for (const auto& c : state_.cohesive) t.push_back(c.max_traction);
        const auto step = static_cast<std::size_t>(state_.step);
        if (hist_.max_traction_trace.size() <= step) {
            hist_.max_traction_trace.resize(step + 1);
            hist_.step_times.resize(step + 1, 0.0);
        }
        hist_.max_traction_trace[step] = std::move(t);
        hist_.step_times[step] = state_.time;
    }

    bool fail(const std::string& message)
    {
        hist_.complete = false;
        hist_.failure = message;
        return false;
    }

    void take_over_reaction(int pattern)
    {
        const int d = model_.patterns[pattern].attached_dof;
        if (d < 0 || !model_.dofs.is_fixed(d)) return;
        const AssemblyResult& a = newton_.evaluate(state_, state_.time);
        const Eigen::VectorXd external = external_force(model_, state_);
        const double unit = model_.patterns[pattern].force(d);
        if (unit != 0.0) state_.lambda[pattern] += (a.internal(d) - external(d)) / unit;
        model_.dofs.release(d);
    }

    void switch_control(const Phase& ph)
    {
        current_pattern_ = ph.pattern;
        if (ph.mode == ControlMode::force || ph.mode == ControlMode::cmod) {
            take_over_reaction(ph.pattern);
        } else if (ph.mode == ControlMode::displacement) {
            if (!model_.dofs.is_fixed(ph.dof)) {
                model_.dofs.fix(ph.dof, state_.u(ph.dof));
                for (std::size_t p = 0; p < model_.patterns.size(); ++p)
                    if (model_.patterns[p].attached_dof == ph.dof) state_.lambda[p] = 0.0;
            }
        }
    }

    double measured(const Phase& ph) const
    {
        if (ph.until_cmod) return model_.cmod_value(state_.u);
        if (ph.until_displacement) return state_.u(ph.dof);
        return state_.lambda[ph.pattern];
    }

    std::optional<double> target(const Phase& ph) const
    {
        if (ph.until_cmod) return ph.until_cmod;
        if (ph.until_displacement) return ph.until_displacement;
        if (ph.until_load) return ph.until_load;
        return std::nullopt;
    }

    // The last step is shortened only when the target is the controlled quantity.
    static bool clipped(const Phase& ph)
    {
        if (ph.until_cmod) return ph.mode == ControlMode::cmod;
        if (ph.until_displacement) return ph.mode == ControlMode::displacement;
        return ph.mode == ControlMode::force;
    }

    bool run_phase(const Phase& ph, int index)
    {
        switch_control(ph);
        if (ph.mode == ControlMode::rest) {
            const int n = std::max(1, ph.steps);
            double elapsed = 0.0;
            for (int k = 0; k < n; ++k) {
                state_.time += ph.step_time;
                elapsed += ph.step_time;
                ++state_.step;
                for (auto& c : state_.cohesive) c.time = state_.time;
                emit(index, elapsed);
                if (opts_.record_traces) record_trace();
            }
        } else {
            const auto goal = target(ph);
            const int cap = goal ? (ph.steps > 0 ? ph.steps : unbounded_steps) : ph.steps;
            const double size = std::abs(ph.increment);
            const double side = goal ? *goal - measured(ph) : 0.0;
            for (int count = 0; count < cap; ++count) {
                double inc = ph.increment;
                if (goal && clipped(ph)) {
                    const double remaining = *goal - measured(ph);
                    if (std::abs(remaining) <= 1e-6 * size) break;
                    inc = std::copysign(std::min(size, std::abs(remaining)), remaining);
                } else if (goal) {
                    const double remaining = *goal - measured(ph);
                    if (remaining == 0.0 || (remaining > 0.0) != (side > 0.0)) break;
                }
                StepControl control{ph.mode, ph.pattern, ph.dof, inc};
                if (!advance(control, ph.step_time, index)) return false;
                emit(index, control_value(ph, 0.0));
                if (opts_.record_traces) record_trace();
            }
        }
        if (ph.release_at_end && model_.healing) {
            for (std::size_t s = 0; s < state_.cohesive.size(); ++s) {
                const bool before = state_.cohesive[s].released;
                state_.cohesive[s] =
                    release_agent(state_.cohesive[s], state_.time, model_.bulk, *model_.healing);
                if (!before && state_.cohesive[s].released)
                    hist_.releases.push_back({static_cast<int>(s), state_.step, state_.time});
            }
        }
        return true;
    }

    bool attempt(GlobalState& trial, StepControl control, double time)
    {
        for (int pass = 0;; ++pass) {
            const NewtonReport rep = newton_.solve(trial, control, time);
            if (!rep.converged) {
                last_error_ = rep.message;
                return false;
            }
            if (model_.crack.mode != CrackMode::tracked || pass >= opts_.max_resolves) break;
            bool added = false;
            try {
                const AssemblyResult& a = newton_.assembly();
                added = propagate(model_, trial, a.local, a.mean_stress);
            } catch (const GeometryError& e) {
                last_error_ = e.what();
                return false;
            }
            if (!added) break;
            control.increment = 0.0;
        }

        const AssemblyResult& a = newton_.assembly();
        hist_.max_balance_error =
            std::max(hist_.max_balance_error, max_balance_error(model_, trial, a));
        hist_.max_activation_excess =
            std::max(hist_.max_activation_excess, activation_excess(model_, trial, a));
        bool agent_live = false;
        for (std::size_t s = 0; s < trial.cohesive.size(); ++s) {
            if (!a.local[s].closed) ++hist_.committed_points;
            agent_live = agent_live || trial.cohesive[s].released;
        }
        if (agent_live && model_.healing) hist_.agent_loaded = true;

        std::vector<bool> before(trial.cohesive.size());
        for (std::size_t s = 0; s < trial.cohesive.size(); ++s)
            before[s] = trial.cohesive[s].released;
        commit_cohesive(model_, trial, a, time);
        for (std::size_t s = 0; s < trial.cohesive.size(); ++s)
            if (!before[s] && trial.cohesive[s].released)
                pending_releases_.push_back({static_cast<int>(s), trial.step, time});
        trial.time = time;

        const Eigen::VectorXd external = external_force(model_, trial);
        trial.peak_reaction =
            std::max({trial.peak_reaction, reaction_norm(model_.dofs, a.internal, external),
                      external.norm()});
        trial.peak_displacement =
            std::max(trial.peak_displacement, to_equations(model_.dofs, trial.u).norm());
        return true;
    }

    bool advance(const StepControl& control, double dt, int phase)
    {
        const double t0 = state_.time;
        ++state_.step;
        double done = 0.0;
        double fraction = 1.0;
        int depth = 0;
        std::vector<ReleaseEvent> step_releases;
        while (done < 1.0) {
            const double f = std::min(fraction, 1.0 - done);
            GlobalState trial = state_;
            StepControl sub = control;
            sub.increment = control.increment * f;
            const double t = done + f >= 1.0 ? t0 + dt : t0 + dt * (done + f);
            pending_releases_.clear();
            if (attempt(trial, sub, t)) {
                state_ = std::move(trial);
                step_releases.insert(step_releases.end(), pending_releases_.begin(),
                                     pending_releases_.end());
                reaction_ = output_reaction(newton_.assembly());
                done += f;
            } else if (depth == opts_.max_cuts) {
                std::ostringstream msg;
                msg << "step " << state_.step << " (phase " << phase << ", t = " << t0
                    << " h) failed after " << depth << " cuts: " << last_error_;
                return fail(msg.str());
            } else {
                fraction *= 0.5;
                ++depth;
                ++hist_.step_cuts;
            }
        }
        // A release inside a cut step is dated at the end of the step.
        for (auto& ev : step_releases) {
            ev.time = state_.time;
            state_.cohesive[ev.segment].release_time = state_.time;
            hist_.releases.push_back(ev);
        }
        return true;
    }

    Model& model_;
    GlobalState& state_;
    const OutputSpec& output_;
    const RunOptions& opts_;
    RunHistory& hist_;
    NewtonSolver newton_;
    double reaction_ = 0.0;
    int current_pattern_ = -1;
    std::string last_error_;
    std::vector<ReleaseEvent> pending_releases_;
};

} // namespace

void prepare_crack(const Model& model, GlobalState& state)
{
    if (model.crack.mode == CrackMode::tracked || !state.path.segments.empty()) return;
    for (const auto& seg : prescribed_path(model.mesh, model.crack)) state.embed(seg, model.bulk);
    state.path.closed = true;
}

RunHistory run_program(Model& model, const LoadProgram& program, GlobalState& state,
                       const OutputSpec& output, const RunOptions& opts)
{
    RunHistory hist;
    Runner runner(model, state, output, opts, hist);
    runner.run(program);
    return hist;
}

std::vector<std::optional<double>> assign_release_times(
    const std::vector<int>& created_step, const std::vector<std::vector<double>>& traces,
    const std::vector<double>& step_times, double threshold)
{
    std::vector<std::optional<double>> out(created_step.size());
    for (std::size_t s = 0; s < created_step.size(); ++s) {
        const auto first = static_cast<std::size_t>(std::max(0, created_step[s]));
        for (std::size_t i = first; i < traces.size() && i < step_times.size(); ++i) {
            if (s < traces[i].size() && traces[i][s] <= threshold) {
                out[s] = step_times[i];
                break;
            }
        }
    }
    return out;
}

} // namespace sdaheal
