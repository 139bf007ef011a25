/**
 * @file assembly.hpp
 * @brief Element kernels and global residual/tangent assembly.
 *
 * Two assembly paths share one element kernel. The serial path computes and
 * scatters element by element; the OpenMP path computes all elements in
 * parallel into per-element buffers and scatters them afterwards in element
 * order, so both produce bitwise identical results for any thread count.
 */
#pragma once

#include "sdaheal/model.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <vector>

namespace sdaheal {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct ElementResponse {
    ElementVector force = ElementVector::Zero();
    ElementMatrix stiffness = ElementMatrix::Zero();
    Voigt3 mean_stress = Voigt3::Zero();
    std::optional<LocalSolution> local;
    bool failed = false;
    bool tangent_fallback = false;
};

/// Internal force, tangent and element-mean stress of one element at `time`.
/// With `secant`, points on the softening envelope use the secant of the law
/// in the tangent instead of its slope.
ElementResponse element_response(const Model& model, const GlobalState& state, int element,
                                 double time, bool secant = false, double closed_slack = 0.0);

/// Element-mean stress only (no tangent).
Voigt3 element_mean_stress(const Model& model, const GlobalState& state, int element,
                           double time);

struct AssemblyResult {
    Eigen::VectorXd internal;            // per dof
    SparseMatrix stiffness;              // free equations only
    std::vector<LocalSolution> local;    // per crack segment
    std::vector<Voigt3> mean_stress;     // per element
    int failed_element = -1;
    int tangent_fallbacks = 0;

    bool ok() const { return failed_element < 0; }
};

class Assembler {
public:
    explicit Assembler(const Model& model) : model_(&model) {}

    void assemble_serial(const GlobalState& state, double time, AssemblyResult& out);
    void assemble_parallel(const GlobalState& state, double time, AssemblyResult& out);
    void assemble(const GlobalState& state, double time, AssemblyResult& out, bool parallel)
    {
        parallel ? assemble_parallel(state, time, out) : assemble_serial(state, time, out);
    }

    /// Secant tangents for points on the softening envelope.
    void set_secant(bool on) { secant_ = on; }
    /// Secant tangents for selected crack points only (indexed by segment).
    void set_secant_points(std::vector<char> points) { secant_points_ = std::move(points); }
    void set_closed_slack(double slack) { closed_slack_ = slack; }

private:
    void ensure_pattern();
    void begin(const GlobalState& state, AssemblyResult& out);
    void scatter(int element, const ElementResponse& r, const GlobalState& state,
                 AssemblyResult& out);
    bool secant_for(int element, const GlobalState& state) const;

    const Model* model_;
    unsigned revision_ = ~0u;
    SparseMatrix pattern_;
    std::vector<std::array<int, 256>> slot_; // per element: (a,b) -> value index or -1
    std::vector<ElementResponse> buffer_;
    bool secant_ = false;
    std::vector<char> secant_points_;
    double closed_slack_ = 0.0;
};

} // namespace sdaheal
