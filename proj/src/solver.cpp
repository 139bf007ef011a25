/** @file solver.cpp */

#include "sdaheal/solver.hpp"

#include <cstdio>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sdaheal {

bool LinearSolver::factorize(const SparseMatrix& k, unsigned revision)
{
    if (!analyzed_ || revision != revision_) {
        lu_.analyzePattern(k);
        revision_ = revision;
        analyzed_ = true;
    }
    lu_.factorize(k);
    return lu_.info() == Eigen::Success;
}

Eigen::VectorXd to_equations(const DofSystem& dofs, const Eigen::VectorXd& per_dof)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.equation_count()));
    for (Eigen::Index d = 0; d < per_dof.size(); ++d) {
        const int eq = dofs.equation(static_cast<int>(d));
        if (eq >= 0) out(eq) = per_dof(d);
    }
    return out;
}

double reaction_norm(const DofSystem& dofs, const Eigen::VectorXd& internal,
                     const Eigen::VectorXd& external)
{
    double sum = 0.0;
    for (Eigen::Index d = 0; d < internal.size(); ++d)
        if (dofs.is_fixed(static_cast<int>(d))) {
            const double r = internal(d) - external(d);
            sum += r * r;
        }
    return std::sqrt(sum);
}

const AssemblyResult& NewtonSolver::evaluate(const GlobalState& state, double time)
{
    assembler_.set_secant(false);
    assembler_.set_secant_points({});
    assembler_.set_closed_slack(0.0);
    assembler_.assemble(state, time, assembly_, opts_.parallel);
    return assembly_;
}

NewtonReport NewtonSolver::solve(GlobalState& state, const StepControl& control, double time)
{
    const GlobalState start = state;
    NewtonReport report = iterate(state, control, time, false, 0.0);
    for (double slack = opts_.closed_slack; !report.converged && slack > 0.0;
         slack = slack < opts_.max_closed_slack ? std::min(10.0 * slack, opts_.max_closed_slack)
                                                : 0.0) {
        state = start;
        report = iterate(state, control, time, true, slack);
    }
    return report;
}

NewtonReport NewtonSolver::iterate(GlobalState& state, const StepControl& control, double time,
                                   bool damped, double slack_level)
{
    const Model& model = *model_;
    const DofSystem& dofs = model.dofs;
    NewtonReport report;

    double cmod_target = 0.0;
    Eigen::VectorXd cmod_eq;
    switch (control.mode) {
    case ControlMode::force:
        state.lambda[control.pattern] += control.increment;
        break;
    case ControlMode::displacement:
        state.u(control.dof) += control.increment;
        break;
    case ControlMode::cmod:
        cmod_target = model.cmod_value(state.u) + control.increment;
        cmod_eq = to_equations(dofs, model.cmod_coefficients());
        break;
    case ControlMode::rest:
        break;
    }
    const Eigen::VectorXd cmod_full =
        control.mode == ControlMode::cmod ? model.cmod_coefficients() : Eigen::VectorXd();
    const Eigen::VectorXd pattern_eq = control.mode == ControlMode::cmod
                                           ? to_equations(dofs, model.patterns[control.pattern].force)
                                           : Eigen::VectorXd();

    // Secant predictor when a force step reduces the load magnitude.
    const bool unloading = control.mode == ControlMode::force &&
                           std::abs(state.lambda[control.pattern]) <
                               std::abs(state.lambda[control.pattern] - control.increment);
    bool assembled = false;
    bool assembled_secant = false;
    assembler_.set_closed_slack(slack_level);
    assembler_.set_secant_points({});
    std::vector<int> status_flips;
    std::vector<int> branch_flips;
    std::vector<char> last;
    std::vector<char> secant_points;
    bool slack_on = slack_level > 0.0;
    for (int it = 0; it <= opts_.max_iterations; ++it) {
        const bool secant = (unloading && it == 0) || (damped && it >= opts_.secant_after);
        if (!assembled || assembled_secant != secant) {
            assembler_.set_secant(secant);
            assembler_.assemble(state, time, assembly_, opts_.parallel);
        }
        assembled = false;
        // Points cycling across a kink of the law: activation slack, or a secant tangent.
        if (assembly_.ok()) {
            const std::size_t n = assembly_.local.size();
            status_flips.resize(n, 0);
            branch_flips.resize(n, 0);
            secant_points.resize(n, 0);
            last.resize(n, 0);
            bool changed = false;
            for (std::size_t p = 0; p < n; ++p) {
                const LocalSolution& l = assembly_.local[p];
                const char code = l.closed ? 0 : (l.branch.original_loading ? 1 : 2);
                if (it > 0 && (code == 0) != (last[p] == 0)) ++status_flips[p];
                if (it > 1 && code != 0 && last[p] != 0 && code != last[p]) ++branch_flips[p];
                last[p] = code;
                if (!slack_on && status_flips[p] >= opts_.flip_limit) {
                    slack_on = true;
                    changed = true;
                    assembler_.set_closed_slack(opts_.closed_slack);
                }
                if (!secant_points[p] && branch_flips[p] >= opts_.flip_limit) {
                    secant_points[p] = 1;
                    changed = true;
                    assembler_.set_secant_points(secant_points);
                }
            }
            if (changed) assembler_.assemble(state, time, assembly_, opts_.parallel);
        }
        if (!assembly_.ok()) {
            report.failed_element = assembly_.failed_element;
            report.message = "local solve failed in element " +
                             std::to_string(assembly_.failed_element);
            return report;
        }
        const Eigen::VectorXd external = external_force(model, state);
        const Eigen::VectorXd r = to_equations(dofs, assembly_.internal - external);
        const double reference =
            std::max({external.norm(), reaction_norm(dofs, assembly_.internal, external),
                      state.peak_reaction});
        report.residual = r.norm();
        report.reference = reference;
        if (opts_.verbose) {
            std::string pattern;
            for (const auto& l : assembly_.local) {
                const char open = l.branch.original_loading ? (l.branch.agent_loading ? 'o' : 'h')
                                                            : (l.branch.agent_loading ? 'a' : 'u');
                pattern += l.closed ? '.' : open;
            }
            std::fprintf(stderr, "  it %2d  |r| %.3e  ref %.3e  points %s\n", it,
                         report.residual, reference, pattern.c_str());
        }
        if (!std::isfinite(report.residual)) {
            report.message = "residual is not finite";
            return report;
        }
        if (!linear_.factorize(assembly_.stiffness, dofs.revision())) {
            report.message = "singular tangent";
            return report;
        }
        Eigen::VectorXd du = linear_.solve(-r);
        double dlambda = 0.0;
        if (control.mode == ControlMode::cmod) {
            const Eigen::VectorXd du2 = linear_.solve(pattern_eq);
            const double denom = cmod_eq.dot(du2);
            if (!(std::abs(denom) > 0.0)) {
                report.message = "CMOD constraint is insensitive to the load pattern";
                return report;
            }
            dlambda = (cmod_target - cmod_full.dot(state.u) - cmod_eq.dot(du)) / denom;
            du += dlambda * du2;
        }
        if (!du.allFinite()) {
            report.message = "correction is not finite";
            return report;
        }
        const double u_norm = std::max(to_equations(dofs, state.u).norm(), state.peak_displacement);
        // round-off residual: accepted whatever the correction
        if (report.residual <= opts_.residual_tolerance * reference &&
            (du.norm() <= opts_.correction_tolerance * u_norm ||
             (it > 0 && report.residual <= opts_.residual_floor * reference))) {
            report.converged = true;
            report.iterations = it;
            return report;
        }
        if (it == opts_.max_iterations) break;

        // Backtracking on the residual norm.
        const int halvings = damped ? opts_.max_line_search : 0;
        const Eigen::VectorXd u0 = state.u;
        const double lambda0 = control.mode == ControlMode::cmod ? state.lambda[control.pattern] : 0.0;
        const double floor = opts_.residual_tolerance * reference;
        const bool next_secant = damped && it + 1 >= opts_.secant_after;
        double step = 1.0;
        for (int ls = 0;; ++ls) {
            state.u = u0;
            for (Eigen::Index d = 0; d < state.u.size(); ++d) {
                const int eq = dofs.equation(static_cast<int>(d));
                if (eq >= 0) state.u(d) += step * du(eq);
            }
            if (control.mode == ControlMode::cmod)
                state.lambda[control.pattern] = lambda0 + step * dlambda;
            if (ls == halvings) break;
            assembler_.set_secant(next_secant);
            assembler_.assemble(state, time, assembly_, opts_.parallel);
            assembled = true;
            assembled_secant = next_secant;
            if (assembly_.ok()) {
                const double trial =
                    to_equations(dofs, assembly_.internal - external_force(model, state)).norm();
                if (trial <= std::max(report.residual, floor)) break;
            }
            step *= 0.5;
            assembled = false;
        }
    }
    report.iterations = opts_.max_iterations;
    report.message = "no convergence within " + std::to_string(opts_.max_iterations) +
                     " iterations";
    return report;
}

void commit_cohesive(const Model& model, GlobalState& state, const AssemblyResult& converged,
                     double time)
{
    for (std::size_t s = 0; s < state.cohesive.size(); ++s)
        state.cohesive[s] = commit_state(converged.local[s].opening, state.cohesive[s], time,
                                         model.bulk, model.agent(), model.release_mode);
}

double activation_excess(const Model& model, const GlobalState& state,
                         const AssemblyResult& converged)
{
    double worst = 0.0;
    const double ft = model.bulk.tensile_strength;
    for (std::size_t s = 0; s < state.cohesive.size(); ++s) {
        const LocalSolution& sol = converged.local[s];
        if (!sol.closed || state.cohesive[s].max_opening > 0.0 || state.cohesive[s].released)
            continue;
        const double drive = std::hypot(std::max(sol.traction(0), 0.0), sol.traction(1));
        worst = std::max(worst, drive / ft - 1.0);
    }
    return worst;
}

double max_balance_error(const Model& model, const GlobalState& state,
                         const AssemblyResult& converged)
{
    double worst = 0.0;
    for (std::size_t s = 0; s < state.path.segments.size(); ++s) {
        const LocalSolution& sol = converged.local[s];
        if (sol.closed) continue;
        const CrackSegment& seg = state.path.segments[s];
        const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
        const Eigen::Vector2d projected = proj.matrix().transpose() * sol.stress;
        worst = std::max(worst, (projected - sol.traction).norm());
    }
    return worst / model.bulk.tensile_strength;
}

} // namespace sdaheal
