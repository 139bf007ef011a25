/**
 * @file geometry.hpp
 * @brief Planar polygon utilities used for crack embedding.
 *
 * Element outlines are passed as counterclockwise vertex lists. For Q8
 * elements the outline interleaves corner and mid-edge nodes.
 */
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>

namespace sdaheal {

using Point2 = Eigen::Vector2d;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double polygon_area(std::span<const Point2> poly);
Point2 polygon_centroid(std::span<const Point2> poly);
bool point_in_polygon(std::span<const Point2> poly, const Point2& p);

/// Total length of the line through `origin` with direction `dir` that lies
/// inside the polygon.
double chord_length(std::span<const Point2> poly, const Point2& origin, const Point2& dir);

/// A line-boundary crossing: parameter s along the line and the edge hit.
struct BoundaryHit {
    double s = 0.0;
    Point2 point;
    int edge = -1;
};

/// Farthest crossing of the ray origin + s dir (s > tol) with the polygon
/// boundary, if any.
std::optional<BoundaryHit> ray_exit(std::span<const Point2> poly, const Point2& origin,
                                    const Point2& dir);

/// Unit vector rotated +90 degrees.
inline Point2 perpendicular(const Point2& v) { return {-v.y(), v.x()}; }

} // namespace sdaheal
