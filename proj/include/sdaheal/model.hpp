/**
 * @file model.hpp
 * @brief Static model definition and the evolving global state.
 */
#pragma once

#include "sdaheal/dof_system.hpp"
#include "sdaheal/material_law.hpp"
#include "sdaheal/mesh.hpp"
#include "sdaheal/sda_kernel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sdaheal {

struct LoadPattern {
    std::string name;
    Eigen::VectorXd force; // per dof, for a unit load factor
    int attached_dof = -1; // dof whose reaction this pattern takes over under force control
};

/// Relative opening of two nodes along a direction, in metres.
struct CmodGauge {
    int node_a = -1;
    int node_b = -1;
    Point2 direction{1.0, 0.0};

    bool defined() const { return node_a >= 0 && node_b >= 0; }
};

enum class CrackMode { tracked, prescribed_straight, prescribed_curve };

struct CrackSetup {
    CrackMode mode = CrackMode::tracked;
    std::optional<Point2> seed;
    Point2 direction{0.0, 1.0}; // straight: crack tangent; tracked: preferred tangent
    double curve_a = 0.0;       // sqrt(y - y_seed) + a (x - x0) = 0
    double curve_x0 = 0.0;
    double radius_factor = 1.5;
    double max_kink_deg = 45.0;
    double activation_ratio = 0.99;
    int max_segments_per_step = 10;
};

struct CrackPath {
    std::vector<CrackSegment> segments;
    std::vector<int> created_step; // step index at which each segment was embedded
    bool closed = false;           // tip reached the boundary
    std::optional<Point2> tip() const
    {
        if (segments.empty()) return std::nullopt;
        return segments.back().exit;
    }
};

class Model {
public:
    Mesh mesh;
    BulkMaterial bulk;
    std::optional<HealingAgent> healing;
    ReleaseMode release_mode = ReleaseMode::threshold;
    DofSystem dofs;
    std::vector<LoadPattern> patterns;
    CmodGauge cmod;
    CrackSetup crack;

    /// Validates inputs and precomputes element operators. Call after the
    /// mesh, material and dof ties are set.
    void prepare();

    const HealingAgent* agent() const { return healing ? &*healing : nullptr; }
    const Eigen::Matrix3d& elasticity() const { return elasticity_; }
    const ElementOperators& operators(int element, bool cracked) const
    {
        return cracked ? reduced_[element] : full_[element];
    }
    /// Element dof ids, (x, y) per node.
    const std::array<int, 16>& element_dofs(int element) const { return element_dofs_[element]; }

    int pattern_index(const std::string& name) const;
    double cmod_value(const Eigen::VectorXd& u) const;
    /// Coefficients c with cmod(u) = c . u.
    Eigen::VectorXd cmod_coefficients() const;
    /// sqrt(area) of each element.
    double median_element_size() const { return median_size_; }

private:
    Eigen::Matrix3d elasticity_ = Eigen::Matrix3d::Zero();
    std::vector<ElementOperators> full_;
    std::vector<ElementOperators> reduced_;
    std::vector<std::array<int, 16>> element_dofs_;
    double median_size_ = 0.0;
};

struct GlobalState {
    Eigen::VectorXd u;                 // per dof
    std::vector<double> lambda;        // per load pattern
    std::vector<int> segment_of;       // per element: index into path.segments or -1
    std::vector<CohesiveState> cohesive; // per path segment
    CrackPath path;
    double time = 0.0; // h
    int step = 0;
    double peak_reaction = 0.0;
    double peak_displacement = 0.0; // norm of the free displacements

    static GlobalState initial(const Model& model);
    bool cracked(int element) const { return segment_of[element] >= 0; }

    /// Adds a segment and its virgin cohesive point.
    void embed(const CrackSegment& seg, const BulkMaterial& bulk);
};

Eigen::VectorXd external_force(const Model& model, const GlobalState& state);

} // namespace sdaheal
