/**
 * @file mesh_io.hpp
 * @brief Plain-text Q8 mesh files and the structured mesher for the bundled benchmarks.
 *
 *   # comment
 *   NODES n
 *   id x y
 *   ...
 *   ELEMENTS m
 *   id n1 n2 n3 n4 n5 n6 n7 n8
 *
 * Coordinates are in metres. Element node lists are counterclockwise,
 * corners first, then the mid-edge nodes of edges 1-2, 2-3, 3-4, 4-1.
 */
#pragma once

#include "sdaheal/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdaheal {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

Mesh read_mesh(std::istream& in, const std::string& source = "<stream>");
Mesh read_mesh(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);

/// Tensor-product grid of Q8 cells. `xs` and `ys` are the grid lines;
/// `keep(i, j)` can drop cells; `map` can move the grid points.
struct GridSpec {
    std::vector<double> xs;
    std::vector<double> ys;
    std::function<bool(int, int)> keep;
    std::function<Point2(const Point2&)> map;
};

Mesh structured_mesh(const GridSpec& spec);

/// n equal divisions of [a, b], both ends included.
std::vector<double> divisions(double a, double b, int n);

/// Rectangle [0, lx] x [0, ly] with nx by ny cells.
Mesh rectangle_mesh(double lx, double ly, int nx, int ny);

enum class Refinement { coarse, medium, fine };

Refinement parse_refinement(const std::string& name);

/// Notched beam: 550 x 150 mm, notch 5 mm wide and 25 mm deep at mid-length.
Mesh bending_mesh(Refinement r);
/// 200 x 200 mm plate with a 25 mm deep, 5 mm wide notch at mid-height of the left edge.
Mesh tension_shear_mesh(Refinement r);
/// Trapezoidal dam 2.4 m high, 1.6 m base, with a 0.15 m notch on the upstream face at 0.6 m.
Mesh dam_mesh(Refinement r);

Mesh benchmark_mesh(const std::string& benchmark, Refinement r);

} // namespace sdaheal
