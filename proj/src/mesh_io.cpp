/** @file mesh_io.cpp */

#include "sdaheal/mesh_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sdaheal {

namespace {

std::string strip_comment(const std::string& line)
{
    const auto hash = line.find('#');
    std::string s = hash == std::string::npos ? line : line.substr(0, hash);
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line)
{
}

Mesh read_mesh(std::istream& in, const std::string& source)
{
    Mesh mesh;
    std::unordered_map<std::int64_t, int> node_index;
    std::unordered_map<std::int64_t, int> element_seen;
    enum class Block { none, nodes, elements } block = Block::none;
    std::size_t expected = 0;
    std::string raw;
    int lineno = 0;
    bool saw_nodes = false;
    bool saw_elements = false;

    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head == "NODES" || head == "ELEMENTS") {
            if (block == Block::nodes && mesh.nodes.size() != expected)
                throw ParseError(source, lineno, "expected " + std::to_string(expected) + " nodes");
            long long n = -1;
            if (!(ss >> n) || n < 0) throw ParseError(source, lineno, "bad count after " + head);
            std::string extra;
            if (ss >> extra) throw ParseError(source, lineno, "trailing text after count");
            expected = static_cast<std::size_t>(n);
            if (head == "NODES") {
                if (saw_nodes) throw ParseError(source, lineno, "repeated NODES block");
                block = Block::nodes;
                saw_nodes = true;
            } else {
                if (!saw_nodes) throw ParseError(source, lineno, "ELEMENTS before NODES");
                if (saw_elements) throw ParseError(source, lineno, "repeated ELEMENTS block");
                block = Block::elements;
                saw_elements = true;
            }
            continue;
        }

        std::int64_t id = 0;
        {
            const char* first = head.data();
            const char* last = head.data() + head.size();
            auto [ptr, ec] = std::from_chars(first, last, id);
            if (ec != std::errc() || ptr != last)
                throw ParseError(source, lineno, "expected an integer id, got '" + head + "'");
        }
        if (block == Block::nodes) {
            if (mesh.nodes.size() == expected)
                throw ParseError(source, lineno, "more nodes than declared");
            double x = 0.0;
            double y = 0.0;
            if (!(ss >> x >> y)) throw ParseError(source, lineno, "node needs x and y");
            std::string extra;
            if (ss >> extra) throw ParseError(source, lineno, "trailing text after node");
            if (!node_index.emplace(id, static_cast<int>(mesh.nodes.size())).second)
                throw ParseError(source, lineno, "duplicate node id " + std::to_string(id));
            mesh.nodes.emplace_back(x, y);
            mesh.node_ids.push_back(id);
        } else if (block == Block::elements) {
            if (mesh.elements.size() == expected)
                throw ParseError(source, lineno, "more elements than declared");
            if (!element_seen.emplace(id, 0).second)
                throw ParseError(source, lineno, "duplicate element id " + std::to_string(id));
            Connectivity c{};
            for (int a = 0; a < 8; ++a) {
                std::int64_t n = 0;
                if (!(ss >> n)) throw ParseError(source, lineno, "element needs 8 node ids");
                const auto it = node_index.find(n);
                if (it == node_index.end())
                    throw ParseError(source, lineno, "unknown node id " + std::to_string(n));
                c[a] = it->second;
            }
            std::string extra;
            if (ss >> extra) throw ParseError(source, lineno, "trailing text after element");
            mesh.elements.push_back(c);
            mesh.element_ids.push_back(id);
        } else {
            throw ParseError(source, lineno, "data outside a NODES or ELEMENTS block");
        }
    }
    if (!saw_nodes || !saw_elements) throw ParseError(source, lineno, "missing NODES or ELEMENTS");
    if (mesh.elements.size() != expected)
        throw ParseError(source, lineno, "expected " + std::to_string(expected) + " elements");
    mesh.validate();
    return mesh;
}

Mesh read_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file " + path);
    return read_mesh(in, path);
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out << "NODES " << mesh.node_count() << '\n';
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const auto id = mesh.node_ids.empty() ? std::int64_t(i + 1) : mesh.node_ids[i];
        out << id << ' ' << format_double(mesh.nodes[i].x()) << ' '
            << format_double(mesh.nodes[i].y()) << '\n';
    }
    out << "ELEMENTS " << mesh.element_count() << '\n';
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        out << (mesh.element_ids.empty() ? std::int64_t(e + 1) : mesh.element_ids[e]);
        for (int a : mesh.elements[e])
            out << ' ' << (mesh.node_ids.empty() ? std::int64_t(a + 1) : mesh.node_ids[a]);
        out << '\n';
    }
}

void write_mesh(const std::string& path, const Mesh& mesh)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mesh file " + path);
    write_mesh(out, mesh);
}

std::vector<double> divisions(double a, double b, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
    v.back() = b;
    return v;
}

Mesh structured_mesh(const GridSpec& spec)
{
    const int nx = static_cast<int>(spec.xs.size()) - 1;
    const int ny = static_cast<int>(spec.ys.size()) - 1;
    if (nx < 1 || ny < 1) throw GeometryError("structured_mesh: need at least one cell");
    const int gx = 2 * nx + 1;
    const int gy = 2 * ny + 1;
    auto coord = [](const std::vector<double>& v, int k) {
        return k % 2 == 0 ? v[k / 2] : 0.5 * (v[k / 2] + v[k / 2 + 1]);
    };
    auto kept = [&](int i, int j) { return !spec.keep || spec.keep(i, j); };

    std::vector<int> index(static_cast<std::size_t>(gx) * gy, -1);
    auto at = [&](int i, int j) -> int& { return index[static_cast<std::size_t>(j) * gx + i]; };
    const int offsets[8][2] = {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}};
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (kept(i, j))
                for (const auto& o : offsets) at(2 * i + o[0], 2 * j + o[1]) = 0;

    Mesh mesh;
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            if (at(i, j) < 0) continue;
            at(i, j) = static_cast<int>(mesh.nodes.size());
            Point2 p(coord(spec.xs, i), coord(spec.ys, j));
            if (spec.map) p = spec.map(p);
            mesh.nodes.push_back(p);
            mesh.node_ids.push_back(static_cast<std::int64_t>(mesh.nodes.size()));
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!kept(i, j)) continue;
            Connectivity c{};
            for (int a = 0; a < 8; ++a) c[a] = at(2 * i + offsets[a][0], 2 * j + offsets[a][1]);
            mesh.elements.push_back(c);
            mesh.element_ids.push_back(static_cast<std::int64_t>(mesh.elements.size()));
        }
    return mesh;
}

Mesh rectangle_mesh(double lx, double ly, int nx, int ny)
{
    return structured_mesh({divisions(0.0, lx, nx), divisions(0.0, ly, ny), {}, {}});
}

Refinement parse_refinement(const std::string& name)
{
    if (name == "coarse") return Refinement::coarse;
    if (name == "medium") return Refinement::medium;
    if (name == "fine") return Refinement::fine;
    throw std::invalid_argument("unknown refinement '" + name + "'");
}

namespace {

std::vector<double> join(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin() + 1, b.end());
    return a;
}

} // namespace

Mesh bending_mesh(Refinement r)
{
    const int side[] = {6, 12, 16};
    const int notch_rows[] = {2, 2, 3};
    const int upper_rows[] = {14, 16, 21};
    const int k = static_cast<int>(r);
    const double length = 0.55, height = 0.15, depth = 0.025, width = 0.005;
    const double left = 0.5 * (length - width);
    GridSpec g;
    g.xs = join(join(divisions(0.0, left, side[k]), {left, left + width}),
                divisions(left + width, length, side[k]));
    g.ys = join(divisions(0.0, depth, notch_rows[k]), divisions(depth, height, upper_rows[k]));
    const int slot = side[k];
    const int rows = notch_rows[k];
    g.keep = [=](int i, int j) { return !(i == slot && j < rows); };
    return structured_mesh(g);
}

Mesh tension_shear_mesh(Refinement r)
{
    const int notch_cols[] = {2, 3, 4};
    const int cols[] = {14, 17, 24};
    const int rows[] = {8, 10, 14};
    const int k = static_cast<int>(r);
    const double size = 0.2, depth = 0.025, half = 0.0025;
    GridSpec g;
    g.xs = join(divisions(0.0, depth, notch_cols[k]), divisions(depth, size, cols[k]));
    g.ys = join(join(divisions(0.0, 0.1 - half, rows[k]), {0.1 - half, 0.1 + half}),
                divisions(0.1 + half, size, rows[k]));
    const int slot_row = rows[k];
    const int nc = notch_cols[k];
    g.keep = [=](int i, int j) { return !(j == slot_row && i < nc); };
    return structured_mesh(g);
}

Mesh dam_mesh(Refinement r)
{
    const int notch_cols[] = {3, 4, 5};
    const int cols[] = {12, 16, 22};
    const int below[] = {8, 12, 16};
    const int above[] = {12, 16, 22};
    const int k = static_cast<int>(r);
    const double height = 2.4, base = 1.6, crest = 0.3;
    const double level = 0.6, depth = 0.15, half = 0.025;
    auto width = [=](double y) { return base - (base - crest) * y / height; };
    const double xi_notch = depth / width(level);
    GridSpec g;
    g.xs = join(divisions(0.0, xi_notch, notch_cols[k]), divisions(xi_notch, 1.0, cols[k]));
    g.ys = join(join(divisions(0.0, level - half, below[k]), {level - half, level + half}),
                divisions(level + half, height, above[k]));
    const int slot_row = below[k];
    const int nc = notch_cols[k];
    g.keep = [=](int i, int j) { return !(j == slot_row && i < nc); };
    g.map = [=](const Point2& p) { return Point2(p.x() * width(p.y()), p.y()); };
    return structured_mesh(g);
}

Mesh benchmark_mesh(const std::string& benchmark, Refinement r)
{
    if (benchmark == "bending") return bending_mesh(r);
    if (benchmark == "tension_shear") return tension_shear_mesh(r);
    if (benchmark == "dam") return dam_mesh(r);
    throw std::invalid_argument("unknown benchmark '" + benchmark + "'");
}

} // namespace sdaheal
