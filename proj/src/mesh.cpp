/** @file mesh.cpp */

#include "sdaheal/mesh.hpp"

#include <cmath>
#include <string>

namespace sdaheal {

namespace {

Eigen::Matrix<double, 8, 2> element_coordinates(const Mesh& mesh, int e)
{
    Eigen::Matrix<double, 8, 2> x;
    for (int a = 0; a < 8; ++a) x.row(a) = mesh.nodes[mesh.elements[e][a]].transpose();
    return x;
}

const std::array<QuadraturePoint, 9> gauss3 = [] {
    const double p = std::sqrt(0.6);
    const double pts[3] = {-p, 0.0, p};
    const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::array<QuadraturePoint, 9> q{};
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) q[3 * j + i] = {pts[i], pts[j], w[i] * w[j]};
    return q;
}();

const std::array<QuadraturePoint, 4> gauss2 = [] {
    const double p = 1.0 / std::sqrt(3.0);
    return std::array<QuadraturePoint, 4>{
        {{-p, -p, 1.0}, {p, -p, 1.0}, {p, p, 1.0}, {-p, p, 1.0}}};
}();

} // namespace

std::array<Point2, 8> Mesh::outline(int element) const
{
    const auto& c = elements[element];
    return {nodes[c[0]], nodes[c[4]], nodes[c[1]], nodes[c[5]],
            nodes[c[2]], nodes[c[6]], nodes[c[3]], nodes[c[7]]};
}

void Mesh::validate() const
{
    for (std::size_t e = 0; e < elements.size(); ++e) {
        for (int a : elements[e])
            if (a < 0 || static_cast<std::size_t>(a) >= nodes.size())
                throw GeometryError("element " + std::to_string(element_ids.empty()
                                                                    ? std::int64_t(e)
                                                                    : element_ids[e]) +
                                    ": node index out of range");
        for (const auto& q : quadrature(QuadratureRule::full_3x3)) {
            if (!(jacobian_determinant(*this, static_cast<int>(e), q.xi, q.eta) > 0.0)) {
                const auto id = element_ids.empty() ? std::int64_t(e) : element_ids[e];
                throw GeometryError("element " + std::to_string(id) +
                                    " is inverted or degenerate");
            }
        }
    }
}

const std::array<Point2, 8>& reference_nodes()
{
    static const std::array<Point2, 8> r{Point2(-1, -1), Point2(1, -1), Point2(1, 1),
                                         Point2(-1, 1),  Point2(0, -1), Point2(1, 0),
                                         Point2(0, 1),   Point2(-1, 0)};
    return r;
}

ShapeValues shape_functions(double xi, double eta)
{
    ShapeValues s;
    const auto& r = reference_nodes();
    for (int a = 0; a < 4; ++a) {
        const double xa = r[a].x(), ya = r[a].y();
        const double fx = 1.0 + xi * xa, fy = 1.0 + eta * ya;
        const double g = xi * xa + eta * ya - 1.0;
        s.n(a) = 0.25 * fx * fy * g;
        s.dn(a, 0) = 0.25 * xa * fy * (g + fx);
        s.dn(a, 1) = 0.25 * ya * fx * (g + fy);
    }
    // mid-edge nodes on eta = -1 and eta = +1
    for (int a : {4, 6}) {
        const double ya = r[a].y();
        s.n(a) = 0.5 * (1.0 - xi * xi) * (1.0 + eta * ya);
        s.dn(a, 0) = -xi * (1.0 + eta * ya);
        s.dn(a, 1) = 0.5 * (1.0 - xi * xi) * ya;
    }
    // mid-edge nodes on xi = +1 and xi = -1
    for (int a : {5, 7}) {
        const double xa = r[a].x();
        s.n(a) = 0.5 * (1.0 + xi * xa) * (1.0 - eta * eta);
        s.dn(a, 0) = 0.5 * xa * (1.0 - eta * eta);
        s.dn(a, 1) = -eta * (1.0 + xi * xa);
    }
    return s;
}

std::span<const QuadraturePoint> quadrature(QuadratureRule rule)
{
    if (rule == QuadratureRule::full_3x3) return gauss3;
    return gauss2;
}

double jacobian_determinant(const Mesh& mesh, int element, double xi, double eta)
{
    const auto s = shape_functions(xi, eta);
    const Eigen::Matrix2d j = s.dn.transpose() * element_coordinates(mesh, element);
    return j.determinant();
}

namespace {

BMatrix strain_matrix(const Eigen::Matrix<double, 8, 2>& dx)
{
    BMatrix b = BMatrix::Zero();
    for (int a = 0; a < 8; ++a) {
        b(0, 2 * a) = dx(a, 0);
        b(1, 2 * a + 1) = dx(a, 1);
        b(2, 2 * a) = dx(a, 1);
        b(2, 2 * a + 1) = dx(a, 0);
    }
    return b;
}

} // namespace

ElementOperators build_element_operators(const Mesh& mesh, int element, QuadratureRule rule,
                                         const Eigen::Matrix3d& c)
{
    const auto x = element_coordinates(mesh, element);
    ElementOperators ops;
    ops.b_mean.setZero();
    ops.stiffness.setZero();
    for (const auto& q : quadrature(rule)) {
        const auto s = shape_functions(q.xi, q.eta);
        // rows: d/dxi, d/deta; cols: x, y
        const Eigen::Matrix2d j = s.dn.transpose() * x;
        const double det = j.determinant();
        if (!(det > 0.0)) throw GeometryError("non-positive Jacobian in element operators");
        const BMatrix b = strain_matrix(s.dn * j.inverse().transpose());
        const double w = q.weight * det * mesh.thickness;
        ops.b.push_back(b);
        ops.weight.push_back(w);
        ops.b_mean += w * b;
        ops.volume += w;
        ops.stiffness.noalias() += w * b.transpose() * c * b;
    }
    ops.b_mean /= ops.volume;
    return ops;
}

} // namespace sdaheal
