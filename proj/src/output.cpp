/** @file output.cpp */

#include "sdaheal/output.hpp"

#include "sdaheal/crack_engine.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace sdaheal {

namespace {

std::string g12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

HistoryWriter::HistoryWriter(const std::string& path) : file_(std::fopen(path.c_str(), "w"))
{
    if (!file_) throw std::runtime_error("cannot write " + path);
    std::fprintf(file_, "%s\n", header());
    std::fflush(file_);
}

HistoryWriter::~HistoryWriter()
{
    if (file_) {
        sync();
        std::fclose(file_);
    }
}

std::string format_row(const HistoryRow& row)
{
    return std::to_string(row.step) + "," + g12(row.time) + "," + g12(row.lambda) + "," +
           g12(row.reaction) + "," + g12(row.cmod * 1e3) + "," + g12(row.control);
}

void HistoryWriter::write(const HistoryRow& row)
{
    std::fprintf(file_, "%s\n", format_row(row).c_str());
    std::fflush(file_);
}

void HistoryWriter::sync()
{
    std::fflush(file_);
    ::fsync(::fileno(file_));
}

void write_crack_path(const std::string& path, const CrackPath& crack)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "x_m,y_m\n";
    if (crack.segments.empty()) return;
    out << g17(crack.segments.front().entry.x()) << ',' << g17(crack.segments.front().entry.y())
        << '\n';
    for (const auto& s : crack.segments) out << g17(s.exit.x()) << ',' << g17(s.exit.y()) << '\n';
}

void write_vtk(const std::string& path, const Model& model, const GlobalState& state,
               const AssemblyResult& assembly)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const Mesh& mesh = model.mesh;
    const std::size_t nn = mesh.node_count();
    const std::size_t ne = mesh.element_count();
    out << "# vtk DataFile Version 3.0\nsdaheal\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    for (const auto& p : mesh.nodes) out << g17(p.x()) << ' ' << g17(p.y()) << " 0\n";
    out << "CELLS " << ne << ' ' << ne * 9 << '\n';
    for (const auto& c : mesh.elements) {
        out << 8;
        for (int a : c) out << ' ' << a;
        out << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    for (std::size_t e = 0; e < ne; ++e) out << "23\n";

    out << "POINT_DATA " << nn << "\nVECTORS displacement double\n";
    for (std::size_t n = 0; n < nn; ++n) {
        const int i = static_cast<int>(n);
        out << g17(state.u(model.dofs.dof(i, 0))) << ' ' << g17(state.u(model.dofs.dof(i, 1)))
            << " 0\n";
    }
    out << "CELL_DATA " << ne << "\nSCALARS max_principal_stress double 1\nLOOKUP_TABLE default\n";
    for (std::size_t e = 0; e < ne; ++e) {
        const double v = e < assembly.mean_stress.size()
                             ? principal_stress(assembly.mean_stress[e]).max
                             : 0.0;
        out << g17(v) << '\n';
    }
    out << "SCALARS crack_opening double 1\nLOOKUP_TABLE default\n";
    for (std::size_t e = 0; e < ne; ++e) {
        const int s = state.segment_of[e];
        double zeta = 0.0;
        if (s >= 0) {
            zeta = static_cast<std::size_t>(s) < assembly.local.size()
                       ? assembly.local[s].opening.effective
                       : state.cohesive[s].max_opening;
        }
        out << g17(zeta) << '\n';
    }
}

std::map<std::string, std::vector<double>> read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (names.empty()) {
            names = cells;
            for (const auto& n : names) out[n];
            continue;
        }
        if (cells.size() != names.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(names.size()) + " columns");
        for (std::size_t k = 0; k < cells.size(); ++k) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[k], &used);
                if (used != cells[k].size()) throw std::invalid_argument(cells[k]);
                out[names[k]].push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" +
                                         cells[k] + "'");
            }
        }
    }
    if (names.empty()) throw std::runtime_error(path + ": empty file");
    return out;
}

} // namespace sdaheal
