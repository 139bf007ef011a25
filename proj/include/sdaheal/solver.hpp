/**
 * @file solver.hpp
 * @brief Global Newton iteration under force, displacement or CMOD control.
 *
 * Prescribed dofs take their values from the state vector u; the DofSystem
 * only says which dofs are prescribed. CMOD control borders the tangent with
 * the linear gauge constraint and solves for the load factor of one pattern.
 */
#pragma once

#include "sdaheal/assembly.hpp"

#include <Eigen/SparseLU>

#include <string>

namespace sdaheal {

enum class ControlMode { force, displacement, cmod, rest };

struct StepControl {
    ControlMode mode = ControlMode::force;
    int pattern = -1;       // force and cmod: pattern whose factor moves
    int dof = -1;           // displacement: prescribed dof that moves
    double increment = 0.0; // N, m or m of CMOD
};

struct NewtonOptions {
    double residual_tolerance = 1e-6;
    double correction_tolerance = 1e-8;
    double residual_floor = 1e-12; // accepted whatever the correction
    int max_iterations = 30;
    int max_line_search = 6; // damped pass: step halvings on a growing residual
    int secant_after = 8;    // damped pass: iterations before secant tangents
    int flip_limit = 3;   // open/closed flips of one point before activation slack is used
    double closed_slack = 1e-3;     // first damped pass; grows tenfold per pass
    double max_closed_slack = 0.05;
    bool parallel = true;
    bool verbose = false; // one line per iteration on stderr
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double reference = 0.0;
    int failed_element = -1;
    std::string message;
};

/// Direct sparse LU on the free equations with the symbolic analysis cached
/// for as long as the free set does not change.
class LinearSolver {
public:
    bool factorize(const SparseMatrix& k, unsigned revision);
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

private:
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    unsigned revision_ = ~0u;
    bool analyzed_ = false;
};

/// Restriction of a per-dof vector to the free equations.
Eigen::VectorXd to_equations(const DofSystem& dofs, const Eigen::VectorXd& per_dof);

/// Norm of the internal force on prescribed dofs, the reaction norm.
double reaction_norm(const DofSystem& dofs, const Eigen::VectorXd& internal,
                     const Eigen::VectorXd& external);

class NewtonSolver {
public:
    NewtonSolver(const Model& model, NewtonOptions opts = {})
        : model_(&model), assembler_(model), opts_(opts)
    {
    }

    /// Advances `state` (u and load factors) by one increment at time
    /// `time`. On success `assembly()` holds the converged local solutions;
    /// cohesive histories are not touched. A plain Newton pass is tried
    /// first, then a damped pass with line search and secant tangents.
    NewtonReport solve(GlobalState& state, const StepControl& control, double time);

    /// Assembles at the given state without iterating.
    const AssemblyResult& evaluate(const GlobalState& state, double time);

    const AssemblyResult& assembly() const { return assembly_; }
    Assembler& assembler() { return assembler_; }
    NewtonOptions& options() { return opts_; }

private:
    NewtonReport iterate(GlobalState& state, const StepControl& control, double time,
                         bool damped, double slack);

    const Model* model_;
    Assembler assembler_;
    NewtonOptions opts_;
    LinearSolver linear_;
    AssemblyResult assembly_;
};

/// Commits every cohesive point from the converged local solutions.
void commit_cohesive(const Model& model, GlobalState& state, const AssemblyResult& converged,
                     double time);

/// Largest drive / f_t - 1 over the closed virgin points of a converged assembly.
double activation_excess(const Model& model, const GlobalState& state,
                         const AssemblyResult& converged);

/// Largest |P^T sigma - T| / f_t over the open cohesive points of a converged assembly.
double max_balance_error(const Model& model, const GlobalState& state,
                         const AssemblyResult& converged);

} // namespace sdaheal
