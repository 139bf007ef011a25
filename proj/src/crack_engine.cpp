/** @file crack_engine.cpp */

#include "sdaheal/crack_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sdaheal {

namespace {

double element_size(const Mesh& mesh, int e)
{
    const auto poly = mesh.outline(e);
    return std::sqrt(std::abs(polygon_area(poly)));
}

double normal_traction(const Voigt3& s, const Point2& n)
{
    return s(0) * n.x() * n.x() + s(1) * n.y() * n.y() + 2.0 * s(2) * n.x() * n.y();
}

Point2 rotate(const Point2& v, double radians)
{
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Point2 normal_of(const Point2& dir) { return {dir.y(), -dir.x()}; }

// Element that continues the path from p in direction dir.
int next_element(const Mesh& mesh, const Point2& p, const Point2& dir, double scale)
{
    return locate_element(mesh, p + 1e-7 * scale * dir.normalized());
}

// Best direction within the kink window around `centre`.
Point2 scan_direction(const Voigt3& stress, const Point2& centre, double max_kink_deg)
{
    const Point2 c = centre.normalized();
    Point2 best = c;
    double best_score = normal_traction(stress, normal_of(c));
    const int steps = static_cast<int>(std::floor(max_kink_deg));
    for (int k = 1; k <= steps; ++k)
        for (int sign : {1, -1}) {
            const Point2 d = rotate(c, sign * k * std::numbers::pi / 180.0);
            const double score = normal_traction(stress, normal_of(d));
            if (score > best_score) {
                best_score = score;
                best = d;
            }
        }
    return best;
}

// Directions in the kink window, best first.
std::vector<Point2> ranked_directions(const Voigt3& stress, const Point2& centre,
                                      double max_kink_deg)
{
    const Point2 c = centre.normalized();
    std::vector<std::pair<double, Point2>> scored{{normal_traction(stress, normal_of(c)), c}};
    const int steps = static_cast<int>(std::floor(max_kink_deg));
    for (int k = 1; k <= steps; ++k)
        for (int sign : {1, -1}) {
            const Point2 d = rotate(c, sign * k * std::numbers::pi / 180.0);
            scored.emplace_back(normal_traction(stress, normal_of(d)), d);
        }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    // Principal direction outside the window: keep going straight.
    const Point2 ideal = perpendicular(principal_stress(stress).direction);
    const double kink = std::acos(std::min(1.0, std::abs(ideal.dot(c)))) * 180.0 / std::numbers::pi;
    if (kink > max_kink_deg) {
        const auto straight = std::find_if(scored.begin(), scored.end(),
                                           [&](const auto& p) { return p.second == c; });
        std::rotate(scored.begin(), straight, straight + 1);
    }
    std::vector<Point2> out;
    out.reserve(scored.size());
    for (const auto& [score, d] : scored) out.push_back(d);
    return out;
}

constexpr double min_chord = 0.25;
constexpr double vertex_snap = 0.2;

// Exit moved onto a nearby outline vertex.
Point2 snapped(const Mesh& mesh, int element, const Point2& entry, const Point2& exit)
{
    const double snap = vertex_snap * element_size(mesh, element);
    for (const auto& v : mesh.outline(element))
        if ((v - exit).norm() < snap && (v - entry).norm() > snap) return v;
    return exit;
}

} // namespace

PrincipalStress principal_stress(const Voigt3& s)
{
    const double centre = 0.5 * (s(0) + s(1));
    const double radius = std::hypot(0.5 * (s(0) - s(1)), s(2));
    PrincipalStress p;
    p.max = centre + radius;
    p.min = centre - radius;
    const double angle = 0.5 * std::atan2(2.0 * s(2), s(0) - s(1));
    p.direction = {std::cos(angle), std::sin(angle)};
    return p;
}

int locate_element(const Mesh& mesh, const Point2& p)
{
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto poly = mesh.outline(static_cast<int>(e));
        if (point_in_polygon(poly, p)) return static_cast<int>(e);
    }
    return -1;
}

std::optional<InitiationSite> check_initiation(const Model& model, const GlobalState& state,
                                               const std::vector<Voigt3>& mean_stress)
{
    const double ft = model.bulk.tensile_strength;
    const Mesh& mesh = model.mesh;
    auto site_at = [&](int e, const Point2& seed) -> std::optional<InitiationSite> {
        if (e < 0 || state.cracked(e)) return std::nullopt;
        const PrincipalStress p = principal_stress(mean_stress[e]);
        if (!(p.max > ft)) return std::nullopt;
        return InitiationSite{e, seed, p.direction};
    };

    if (model.crack.seed) {
        const Point2 seed = *model.crack.seed;
        const int e = next_element(mesh, seed, model.crack.direction, model.median_element_size());
        return site_at(e, seed);
    }
    std::optional<InitiationSite> best;
    double best_value = ft;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const int id = static_cast<int>(e);
        if (state.cracked(id)) continue;
        const double value = principal_stress(mean_stress[e]).max;
        if (value > best_value) {
            const auto poly = mesh.outline(id);
            best = site_at(id, polygon_centroid(poly));
            best_value = value;
        }
    }
    return best;
}

CrackSegment embed_chord(const Mesh& mesh, int element, const Point2& entry, const Point2& exit)
{
    const Point2 chord = exit - entry;
    if (!(chord.norm() > 1e-9 * element_size(mesh, element)))
        throw GeometryError("crack chord is degenerate in element " + std::to_string(element));
    const Point2 n = normal_of(chord.normalized());
    const auto poly = mesh.outline(element);
    return make_segment(element, n, entry, exit, characteristic_length(poly, n));
}

CrackSegment embed(const Mesh& mesh, int element, const Point2& entry, const Point2& dir)
{
    const auto poly = mesh.outline(element);
    const auto hit = ray_exit(poly, entry, dir);
    if (!hit) throw GeometryError("crack chord misses element " + std::to_string(element));
    return embed_chord(mesh, element, entry, snapped(mesh, element, entry, hit->point));
}

Point2 curve_point(const CrackSetup& setup, double y)
{
    const double y0 = setup.seed ? setup.seed->y() : 0.0;
    const double rise = std::max(0.0, y - y0);
    return {setup.curve_x0 - std::sqrt(rise) / setup.curve_a, y};
}

std::vector<CrackSegment> prescribed_path(const Mesh& mesh, const CrackSetup& setup)
{
    if (!setup.seed) throw GeometryError("prescribed crack path needs a seed point");
    std::vector<CrackSegment> path;
    std::vector<bool> used(mesh.element_count(), false);
    double scale = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
        scale = std::max(scale, element_size(mesh, static_cast<int>(e)));

    if (setup.mode == CrackMode::prescribed_straight) {
        const Point2 d = setup.direction.normalized();
        Point2 p = *setup.seed;
        for (int e = next_element(mesh, p, d, scale); e >= 0 && !used[e];
             e = next_element(mesh, p, d, scale)) {
            path.push_back(embed(mesh, e, p, d));
            used[e] = true;
            p = path.back().exit;
        }
        return path;
    }

    if (!(setup.curve_a != 0.0)) throw GeometryError("curved crack path needs a != 0");
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& x : mesh.nodes) top = std::max(top, x.y());
    const double h = scale / 64.0;
    double y = setup.seed->y();
    Point2 p = *setup.seed;
    while (y < top) {
        const double probe = std::min(y + 1e-6 * scale, top);
        const int e = locate_element(mesh, curve_point(setup, probe));
        if (e < 0 || used[e]) break;
        const auto poly = mesh.outline(e);
        double lo = probe;
        double hi = probe;
        while (hi < top && point_in_polygon(poly, curve_point(setup, hi))) {
            lo = hi;
            hi = std::min(hi + h, top);
        }
        if (point_in_polygon(poly, curve_point(setup, hi))) {
            lo = hi; // reached the top of the mesh inside this element
        } else {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (point_in_polygon(poly, curve_point(setup, mid)) ? lo : hi) = mid;
            }
        }
        const Point2 exit = curve_point(setup, hi);
        path.push_back(embed_chord(mesh, e, p, exit));
        used[e] = true;
        p = exit;
        y = hi;
        if (lo == hi) break;
    }
    return path;
}

Voigt3 nonlocal_stress(const Model& model, const std::vector<Voigt3>& mean_stress,
                       const Point2& at, double radius)
{
    const Mesh& mesh = model.mesh;
    Voigt3 sum = Voigt3::Zero();
    double weight = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto poly = mesh.outline(static_cast<int>(e));
        const double r = (polygon_centroid(poly) - at).norm();
        if (r > 3.0 * radius) continue;
        const double w = std::exp(-(r * r) / (radius * radius)) * polygon_area(poly);
        sum += w * mean_stress[e];
        weight += w;
    }
    return weight > 0.0 ? Voigt3(sum / weight) : Voigt3::Zero();
}

Point2 tracked_direction(const Model& model, const GlobalState&,
                         const std::vector<Voigt3>& mean_stress, const Point2& tip,
                         const Point2& previous)
{
    const double radius = model.crack.radius_factor * model.median_element_size();
    const Voigt3 s = nonlocal_stress(model, mean_stress, tip, radius);
    return scan_direction(s, previous, model.crack.max_kink_deg);
}

bool propagate(const Model& model, GlobalState& state, const std::vector<LocalSolution>& local,
               const std::vector<Voigt3>& mean_stress)
{
    if (model.crack.mode != CrackMode::tracked || state.path.closed) return false;
    const Mesh& mesh = model.mesh;
    const double ft = model.bulk.tensile_strength;
    const double scale = model.median_element_size();

    if (state.path.segments.empty()) {
        const auto site = check_initiation(model, state, mean_stress);
        if (!site) return false;
        Point2 centre = perpendicular(site->normal);
        if (centre.dot(model.crack.direction) < 0.0) centre = -centre;
        if (model.crack.seed) centre = model.crack.direction.normalized();
        const Point2 d = tracked_direction(model, state, mean_stress, site->seed, centre);
        if (model.crack.seed) {
            state.embed(embed(mesh, site->element, site->seed, d), model.bulk);
        } else {
            const auto poly = mesh.outline(site->element);
            const auto back = ray_exit(poly, site->seed, -d);
            if (!back) return false;
            state.embed(embed(mesh, site->element, back->point, d), model.bulk);
        }
        return true;
    }

    const std::size_t tip_index = state.path.segments.size() - 1;
    const CrackSegment& tip = state.path.segments[tip_index];
    const CohesiveState& history = state.cohesive[tip_index];
    const double reached = std::max(history.max_opening, local[tip_index].opening.effective);
    if (!(softening_traction(reached, model.bulk) < model.crack.activation_ratio * ft)) return false;

    const double radius = model.crack.radius_factor * scale;
    const Voigt3 s = nonlocal_stress(model, mean_stress, tip.exit, radius);
    const auto candidates = ranked_directions(s, tip.tangent, model.crack.max_kink_deg);
    const Point2 d = candidates.front();
    const int next = next_element(mesh, tip.exit, d, scale);
    if (next < 0 || state.cracked(next)) {
        state.path.closed = true;
        return false;
    }
    if (!(principal_stress(mean_stress[next]).max >= ft)) return false;
    // Best direction whose chord is not a sliver.
    for (const Point2& c : candidates) {
        const int e = next_element(mesh, tip.exit, c, scale);
        if (e < 0 || state.cracked(e)) continue;
        const auto hit = ray_exit(mesh.outline(e), tip.exit, c);
        if (!hit) continue;
        const Point2 exit = snapped(mesh, e, tip.exit, hit->point);
        if ((exit - tip.exit).norm() < min_chord * element_size(mesh, e)) continue;
        state.embed(embed_chord(mesh, e, tip.exit, exit), model.bulk);
        return true;
    }
    return false;
}

} // namespace sdaheal
