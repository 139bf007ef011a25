/**
 * @file sda_kernel.hpp
 * @brief Element-level embedded strong discontinuity mechanics.
 *
 * Voigt convention: strain = [e_xx, e_yy, gamma_xy] (engineering shear),
 * stress = [s_xx, s_yy, s_xy]. With this convention the projection vectors
 * of V1 = n (x) n and V2 = (n (x) t)^S serve both as strain modes and as
 * stress contractions: V1 : sigma = p1 . sigma.
 */
#pragma once

#include "sdaheal/geometry.hpp"
#include "sdaheal/material_law.hpp"

#include <Eigen/Dense>

#include <span>

namespace sdaheal {

using Voigt3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix32 = Eigen::Matrix<double, 3, 2>;

/// Plane elasticity matrix in Voigt form.
Matrix3 elasticity_matrix(const BulkMaterial& bulk);

struct CrackSegment {
    int element = -1;
    Point2 normal{1.0, 0.0};
    Point2 tangent{0.0, 1.0};
    Point2 entry = Point2::Zero();
    Point2 exit = Point2::Zero();
    double char_length = 0.0; // l_c = V / A
};

/// Builds a segment with the tangent taken as the normal rotated +90 degrees.
CrackSegment make_segment(int element, const Point2& normal, const Point2& entry,
                          const Point2& exit, double char_length);

struct ProjectionPair {
    Voigt3 v1; // n (x) n
    Voigt3 v2; // (n (x) t)^S

    static ProjectionPair from_normal(const Point2& n, const Point2& t);
    Matrix32 matrix() const;
};

/// l_c = V / A with A the chord through the outline centroid parallel to the crack.
double characteristic_length(std::span<const Point2> outline, const Point2& normal);

/// (1/l_c) [V1 zeta_n + V2 zeta_t] in Voigt strain form.
Voigt3 enhanced_strain(double opening_n, double opening_t, const CrackSegment& seg);

/// sigma_tr = C : (eps - enhanced_strain(previous openings)).
Voigt3 trial_stress(const Voigt3& total_strain, const CohesiveState& state,
                    const CrackSegment& seg, const BulkMaterial& bulk);

struct LocalSolveOptions {
    double tolerance_factor = 1e-10; // absolute residual tolerance / f_t
    int max_iterations = 50;
    int max_halvings = 10;
    int max_branch_sweeps = 5;
    double closed_slack = 0.0; // a virgin point stays closed up to (1 + slack) f_t
};

struct LocalSolveReport {
    double delta_n = 0.0;
    double delta_t = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

struct LocalSolution {
    LocalSolveReport report;
    Voigt3 stress = Voigt3::Zero();
    CrackOpening opening;
    LawBranch branch;
    bool closed = false;       // rigid: the crack carries the projected stress without opening
    Eigen::Matrix2d law_tangent = Eigen::Matrix2d::Zero();
    Eigen::Vector2d traction = Eigen::Vector2d::Zero(); // law traction at the solution
};

/// Solves the 2x2 traction balance for the opening at time `time` given the
/// total strain sampled for the cracked element.
LocalSolution solve_local(const Voigt3& total_strain, const CohesiveState& state,
                          const CrackSegment& seg, const BulkMaterial& bulk,
                          const HealingAgent* agent, double time,
                          const LocalSolveOptions& opts = {});

struct TangentResult {
    Matrix3 tangent;
    bool regularized = false;
    bool fell_back_to_elastic = false;
};

/// C_ep = C - C [V1 V2] (G + l_c D)^-1 [V1; V2] C for a converged local solve.
TangentResult elastoplastic_tangent(const LocalSolution& sol, const CrackSegment& seg,
                                    const BulkMaterial& bulk);

/// G = [Vi : C : Vj].
Eigen::Matrix2d balance_matrix(const ProjectionPair& proj, const Matrix3& c);

/// Modulus for the strain fluctuation about the element mean in a cracked
/// element: C - C P (G + l_c k I)^-1 P^T C with the committed secant
/// k = T_mx / zeta_mx. Plain C for a crack that never opened.
Matrix3 fluctuation_elasticity(const CohesiveState& state, const CrackSegment& seg,
                               const BulkMaterial& bulk);

} // namespace sdaheal
