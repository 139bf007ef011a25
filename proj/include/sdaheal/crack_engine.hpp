/**
 * @file crack_engine.hpp
 * @brief Crack initiation, path construction and tip propagation.
 *
 * A path is a chain of straight element chords; each chord's exit point is
 * the next chord's entry point. Prescribed paths are built once up front.
 * Tracked paths grow one element at a time from the tip, in the direction
 * that maximizes the normal traction of a nonlocally averaged stress.
 */
#pragma once

#include "sdaheal/model.hpp"

#include <optional>
#include <vector>

namespace sdaheal {

struct PrincipalStress {
    double max = 0.0;
    double min = 0.0;
    Point2 direction{1.0, 0.0}; // unit eigenvector of the max principal stress
};

PrincipalStress principal_stress(const Voigt3& stress);

/// Index of the first element whose outline contains p, or -1.
int locate_element(const Mesh& mesh, const Point2& p);

struct InitiationSite {
    int element = -1;
    Point2 seed = Point2::Zero();
    Point2 normal{1.0, 0.0};
};

/// Rankine check on element-mean stresses. With a seed in the setup only the
/// element at the seed is a candidate.
std::optional<InitiationSite> check_initiation(const Model& model, const GlobalState& state,
                                               const std::vector<Voigt3>& mean_stress);

/// Chord through `element` starting at `entry` in direction `dir`; the crack
/// normal is dir rotated by -90 degrees. Throws GeometryError if the chord
/// misses the element.
CrackSegment embed(const Mesh& mesh, int element, const Point2& entry, const Point2& dir);

/// Chord between two boundary points of an element.
CrackSegment embed_chord(const Mesh& mesh, int element, const Point2& entry, const Point2& exit);

/// Complete prescribed path for the straight or curved modes.
std::vector<CrackSegment> prescribed_path(const Mesh& mesh, const CrackSetup& setup);

/// Point of the curve sqrt(y - y_seed) + a (x - x0) = 0 at height y.
Point2 curve_point(const CrackSetup& setup, double y);

/// Crack tangent chosen from the averaged stress around the tip.
Point2 tracked_direction(const Model& model, const GlobalState& state,
                         const std::vector<Voigt3>& mean_stress, const Point2& tip,
                         const Point2& previous);

/// Stress averaged with a Gaussian weight of the given radius.
Voigt3 nonlocal_stress(const Model& model, const std::vector<Voigt3>& mean_stress,
                       const Point2& at, double radius);

/// Grows a tracked path by at most one segment using the trial solutions of
/// a converged (but uncommitted) assembly. Returns true if a segment was added.
bool propagate(const Model& model, GlobalState& state, const std::vector<LocalSolution>& local,
               const std::vector<Voigt3>& mean_stress);

} // namespace sdaheal
