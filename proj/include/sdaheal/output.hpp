/**
 * @file output.hpp
 * @brief History CSV, crack path and legacy VTK writers, and a small CSV reader.
 */
#pragma once

#include "sdaheal/assembly.hpp"
#include "sdaheal/continuation.hpp"

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace sdaheal {

/// Appends one row per call and flushes it, so a crash leaves a readable prefix.
class HistoryWriter {
public:
    explicit HistoryWriter(const std::string& path);
    ~HistoryWriter();
    HistoryWriter(const HistoryWriter&) = delete;
    HistoryWriter& operator=(const HistoryWriter&) = delete;

    void write(const HistoryRow& row);
    /// Flushes and syncs the file to disk.
    void sync();

    static const char* header() { return "step,time_h,lambda,reaction_N,cmod_mm,control"; }

private:
    std::FILE* file_ = nullptr;
};

std::string format_row(const HistoryRow& row);

void write_crack_path(const std::string& path, const CrackPath& crack);

/// Quadratic quads with nodal displacement, element max principal stress and
/// crack opening.
void write_vtk(const std::string& path, const Model& model, const GlobalState& state,
               const AssemblyResult& assembly);

/// Numeric CSV with a header row. Columns by name.
std::map<std::string, std::vector<double>> read_csv(const std::string& path);

} // namespace sdaheal
