/** @file geometry.cpp */

#include "sdaheal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sdaheal {

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Crossings of the infinite line origin + s dir with every polygon edge.
std::vector<BoundaryHit> line_hits(std::span<const Point2> poly, const Point2& origin,
                                   const Point2& dir)
{
    std::vector<BoundaryHit> hits;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        const Point2 e = b - a;
        const double denom = cross(dir, e);
        if (std::abs(denom) < 1e-14 * e.norm() * dir.norm()) continue;
        const Point2 w = a - origin;
        const double s = cross(w, e) / denom;
        const double u = cross(w, dir) / denom;
        // Half-open on the edge so a vertex hit is counted once.
        if (u >= 0.0 && u < 1.0) hits.push_back({s, origin + s * dir, static_cast<int>(i)});
    }
    std::sort(hits.begin(), hits.end(),
              [](const BoundaryHit& l, const BoundaryHit& r) { return l.s < r.s; });
    return hits;
}

} // namespace

double polygon_area(std::span<const Point2> poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

Point2 polygon_centroid(std::span<const Point2> poly)
{
    double a = 0.0;
    Point2 c = Point2::Zero();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % poly.size()];
        const double w = cross(p, q);
        a += w;
        c += w * (p + q);
    }
    if (std::abs(a) <= 0.0) throw GeometryError("centroid of a degenerate polygon");
    return c / (3.0 * a);
}

bool point_in_polygon(std::span<const Point2> poly, const Point2& p)
{
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

double chord_length(std::span<const Point2> poly, const Point2& origin, const Point2& dir)
{
    const Point2 d = dir.normalized();
    const auto hits = line_hits(poly, origin, d);
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < hits.size(); i += 2) len += hits[i + 1].s - hits[i].s;
    return len;
}

std::optional<BoundaryHit> ray_exit(std::span<const Point2> poly, const Point2& origin,
                                    const Point2& dir)
{
    double scale = 0.0;
    for (const auto& p : poly) scale = std::max(scale, (p - origin).norm());
    const double tol = 1e-10 * scale;
    const auto hits = line_hits(poly, origin, dir.normalized());
    std::optional<BoundaryHit> best;
    for (const auto& h : hits)
        if (h.s > tol && (!best || h.s > best->s)) best = h;
    return best;
}

} // namespace sdaheal
