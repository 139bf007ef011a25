/**
 * @file scenario.hpp
 * @brief Scenario files and their translation into a model and load program.
 *
 * Sectioned `key = value` text, `#` comments. Values are kept in file units
 * (MPa for strengths, N/m for fracture energies, h for times, mm for CMOD
 * and displacement targets and increments, m for coordinates) and converted
 * to SI only in build_scenario().
 *
 *   [model]      mesh, thickness, plane, cmod, cmod_direction
 *   [material]   E, nu, ft, Gf, beta
 *   [healing]    enabled, fh, Gh, Ah, T0 | T0_ratio, b, release
 *   [crack]      mode, seed, direction, a, x0, radius_factor, max_kink,
 *                activation_ratio
 *   [supports]   fix (box), fix_point (point)          repeatable
 *   [tie.NAME]   box, component, fixed
 *   [load.NAME]  edge, point, tie                      repeatable
 *   [program.N]  mode, load, tie, increment, step_time, until_cmod,
 *                until_displacement, until_load, steps, release
 *   [output]     force = load:NAME | dof:NAME
 *   [variant.V]  section.key = value overrides, applied with --variant V
 */
#pragma once

#include "sdaheal/continuation.hpp"
#include "sdaheal/mesh_io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdaheal {

struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    bool operator==(const Box&) const = default;
};

enum class Components { x, y, xy };

struct SupportSpec {
    bool point = false; // fix_point instead of a box
    Box box;            // for a point: (x0, y0) only
    Components components = Components::xy;
    bool operator==(const SupportSpec&) const = default;
};

struct TieSpec {
    std::string name;
    Box box;
    int component = 1;
    bool fixed = true;
    bool operator==(const TieSpec&) const = default;
};

struct LoadItem {
    enum class Kind { edge, point, tie } kind = Kind::edge;
    Box box;           // edge: box; point: (x0, y0)
    double fx = 0.0;   // total force for a unit load factor
    double fy = 0.0;
    std::string tie;
    bool operator==(const LoadItem&) const = default;
};

struct LoadSpec {
    std::string name;
    std::vector<LoadItem> items;
    bool operator==(const LoadSpec&) const = default;
};

struct PhaseSpec {
    int index = 0;
    std::string mode = "force";
    std::string load;
    std::string tie;
    double increment = 0.0; // N, or mm
    double step_time = 0.0; // h
    std::optional<double> until_cmod;         // mm
    std::optional<double> until_displacement; // mm
    std::optional<double> until_load;         // N
    int steps = 0;
    bool release_at_end = false;
    bool operator==(const PhaseSpec&) const = default;
};

struct HealingSpec {
    bool enabled = true;
    double fh = 0.0;     // MPa
    double gh = 0.0;     // N/m
    double ah = 0.0;     // 1/h
    std::optional<double> t0;       // MPa
    std::optional<double> t0_ratio; // of ft
    double b = 0.0;
    std::string release = "threshold";
    bool operator==(const HealingSpec&) const = default;
};

struct CrackSpec {
    std::string mode = "tracked";
    std::optional<Point2> seed;
    Point2 direction{0.0, 1.0};
    double a = 0.0;
    double x0 = 0.0;
    double radius_factor = 1.5;
    double max_kink = 45.0;
    double activation_ratio = 0.99;
    bool operator==(const CrackSpec&) const = default;
};

struct ScenarioFile {
    std::string source_dir; // base for relative mesh paths
    std::string mesh;
    double thickness = 1.0;
    std::string plane = "stress";
    std::optional<Box> cmod; // two points (x0, y0) -> (x1, y1)
    Point2 cmod_direction{1.0, 0.0};
    double young = 0.0;  // MPa
    double nu = 0.0;
    double ft = 0.0;     // MPa
    double gf = 0.0;     // N/m
    double beta = 1.0;
    std::optional<HealingSpec> healing;
    CrackSpec crack;
    std::vector<SupportSpec> supports;
    std::vector<TieSpec> ties;
    std::vector<LoadSpec> loads;
    std::vector<PhaseSpec> phases;
    std::string output = "";
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> variants;
    std::vector<std::string> warnings;

    bool operator==(const ScenarioFile& o) const;
};

struct ParseOptions {
    bool strict = false;
    std::vector<std::string> variants;                          // applied in order
    std::vector<std::pair<std::string, std::string>> overrides; // section.key = value
};

ScenarioFile read_scenario(std::istream& in, const std::string& source,
                           const ParseOptions& opts = {});
ScenarioFile read_scenario(const std::string& path, const ParseOptions& opts = {});
void write_scenario(std::ostream& out, const ScenarioFile& s);

/// Splits "section.key=value" into its parts.
std::pair<std::string, std::string> parse_override(const std::string& text);

struct Scenario {
    Model model;
    LoadProgram program;
    OutputSpec output;
    std::map<std::string, int> tie_dofs;
};

/// Builds the mesh (from file, or `builtin:<benchmark>:<refinement>`), dofs,
/// patterns and program. Throws on inconsistent input.
Scenario build_scenario(const ScenarioFile& file);
Scenario build_scenario(const ScenarioFile& file, Mesh mesh);

Mesh load_scenario_mesh(const ScenarioFile& file);

} // namespace sdaheal
