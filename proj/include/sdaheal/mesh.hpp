/**
 * @file mesh.hpp
 * @brief Eight-node serendipity quadrilateral meshes and element geometry.
 *
 * Connectivity is counterclockwise: corners 0..3, then mid-edge nodes on
 * edges 0-1, 1-2, 2-3, 3-0.
 */
#pragma once

#include "sdaheal/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace sdaheal {

using Connectivity = std::array<int, 8>;

struct Mesh {
    std::vector<Point2> nodes;
    std::vector<Connectivity> elements; // 0-based node indices
    std::vector<std::int64_t> node_ids;    // ids as written in the mesh file
    std::vector<std::int64_t> element_ids;
    double thickness = 1.0;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t element_count() const { return elements.size(); }

    /// Outline polygon of an element: corner, mid, corner, ... counterclockwise.
    std::array<Point2, 8> outline(int element) const;

    /// Throws GeometryError naming the first element with a non-positive Jacobian.
    void validate() const;
};

struct ShapeValues {
    Eigen::Matrix<double, 8, 1> n;
    Eigen::Matrix<double, 8, 2> dn; // d/dxi, d/deta
};

ShapeValues shape_functions(double xi, double eta);

/// Reference coordinates of the eight nodes.
const std::array<Point2, 8>& reference_nodes();

struct QuadraturePoint {
    double xi;
    double eta;
    double weight;
};

enum class QuadratureRule { full_3x3, reduced_2x2 };

std::span<const QuadraturePoint> quadrature(QuadratureRule rule);

using BMatrix = Eigen::Matrix<double, 3, 16>;
using ElementMatrix = Eigen::Matrix<double, 16, 16>;
using ElementVector = Eigen::Matrix<double, 16, 1>;

/// Precomputed strain operators and elastic stiffness for one element and
/// one quadrature rule. Element dofs are ordered (u_x, u_y) per node.
struct ElementOperators {
    std::vector<BMatrix> b;
    std::vector<double> weight; // w * detJ * thickness
    BMatrix b_mean;             // volume average of B
    double volume = 0.0;        // area * thickness
    ElementMatrix stiffness;    // elastic, for the C the operators were built with
};

ElementOperators build_element_operators(const Mesh& mesh, int element, QuadratureRule rule,
                                         const Eigen::Matrix3d& c);

/// Jacobian determinant at a reference point.
double jacobian_determinant(const Mesh& mesh, int element, double xi, double eta);

} // namespace sdaheal
