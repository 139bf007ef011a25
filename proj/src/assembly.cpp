/** @file assembly.cpp */

#include "sdaheal/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace sdaheal {

namespace {

ElementVector gather(const Model& model, const GlobalState& state, int element)
{
    ElementVector ue;
    const auto& d = model.element_dofs(element);
    for (int i = 0; i < 16; ++i) ue(i) = state.u(d[i]);
    return ue;
}

} // namespace

ElementResponse element_response(const Model& model, const GlobalState& state, int element,
                                 double time, bool secant, double closed_slack)
{
    ElementResponse r;
    const bool cracked = state.cracked(element);
    const ElementOperators& ops = model.operators(element, cracked);
    const ElementVector ue = gather(model, state, element);
    const Eigen::Matrix3d& c = model.elasticity();
    const Voigt3 mean_strain = ops.b_mean * ue;

    r.force.noalias() = ops.stiffness * ue;
    r.stiffness = ops.stiffness;
    if (!cracked) {
        r.mean_stress = c * mean_strain;
        return r;
    }

    const int s = state.segment_of[element];
    const CrackSegment& seg = state.path.segments[s];
    if (state.cohesive[s].max_opening > 0.0) {
        const Eigen::Matrix3d relax = c - fluctuation_elasticity(state.cohesive[s], seg, model.bulk);
        ElementMatrix k = ElementMatrix::Zero();
        for (std::size_t q = 0; q < ops.b.size(); ++q) {
            const BMatrix db = ops.b[q] - ops.b_mean;
            k.noalias() += ops.weight[q] * db.transpose() * relax * db;
        }
        r.stiffness -= k;
        r.force.noalias() -= k * ue;
    }
    LocalSolution sol =
        solve_local(mean_strain, state.cohesive[s], seg, model.bulk, model.agent(), time,
                    {.closed_slack = closed_slack});
    if (!sol.report.converged) {
        r.failed = true;
        r.local = std::move(sol);
        return r;
    }
    r.mean_stress = sol.stress;
    if (!sol.closed) {
        const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
        const Eigen::Vector2d z(sol.opening.normal, sol.opening.tangential);
        const Voigt3 relief = c * (proj.matrix() * z);
        // f = K u - (V / l_c) Bbar^T C P zeta
        r.force.noalias() -= (ops.volume / seg.char_length) * ops.b_mean.transpose() * relief;
        if (secant && sol.branch.original_loading && sol.opening.effective > 0.0) {
            const double k = sol.traction.norm() / std::hypot(sol.opening.normal, sol.opening.tangential);
            sol.law_tangent = k * Eigen::Matrix2d::Identity();
        }
        const TangentResult tan = elastoplastic_tangent(sol, seg, model.bulk);
        r.tangent_fallback = tan.fell_back_to_elastic;
        const Eigen::Matrix3d softening = c - tan.tangent;
        r.stiffness.noalias() -= ops.volume * ops.b_mean.transpose() * softening * ops.b_mean;
    }
    r.local = std::move(sol);
    return r;
}

Voigt3 element_mean_stress(const Model& model, const GlobalState& state, int element, double time)
{
    const bool cracked = state.cracked(element);
    const ElementOperators& ops = model.operators(element, cracked);
    const Voigt3 strain = ops.b_mean * gather(model, state, element);
    if (!cracked) return model.elasticity() * strain;
    const int s = state.segment_of[element];
    return solve_local(strain, state.cohesive[s], state.path.segments[s], model.bulk,
                       model.agent(), time)
        .stress;
}

void Assembler::ensure_pattern()
{
    const DofSystem& dofs = model_->dofs;
    if (revision_ == dofs.revision() && slot_.size() == model_->mesh.element_count()) return;

    const auto neq = static_cast<int>(dofs.equation_count());
    const std::size_t ne = model_->mesh.element_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ne * 256);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& d = model_->element_dofs(static_cast<int>(e));
        for (int a = 0; a < 16; ++a) {
            const int ra = dofs.equation(d[a]);
            if (ra < 0) continue;
            for (int b = 0; b < 16; ++b) {
                const int cb = dofs.equation(d[b]);
                if (cb >= 0) trip.emplace_back(ra, cb, 0.0);
            }
        }
    }
    pattern_.resize(neq, neq);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    slot_.assign(ne, {});
    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& d = model_->element_dofs(static_cast<int>(e));
        auto& slots = slot_[e];
        for (int a = 0; a < 16; ++a) {
            const int row = dofs.equation(d[a]);
            for (int b = 0; b < 16; ++b) {
                const int col = dofs.equation(d[b]);
                int idx = -1;
                if (row >= 0 && col >= 0) {
                    const int* first = inner + outer[col];
                    const int* last = inner + outer[col + 1];
                    idx = static_cast<int>(std::lower_bound(first, last, row) - inner);
                }
                slots[16 * a + b] = idx;
            }
        }
    }
    revision_ = dofs.revision();
}

void Assembler::begin(const GlobalState& state, AssemblyResult& out)
{
    ensure_pattern();
    out.internal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_->dofs.dof_count()));
    out.stiffness = pattern_;
    std::fill(out.stiffness.valuePtr(), out.stiffness.valuePtr() + out.stiffness.nonZeros(), 0.0);
    out.local.assign(state.path.segments.size(), LocalSolution{});
    out.mean_stress.assign(model_->mesh.element_count(), Voigt3::Zero());
    out.failed_element = -1;
    out.tangent_fallbacks = 0;
}

void Assembler::scatter(int element, const ElementResponse& r, const GlobalState& state,
                        AssemblyResult& out)
{
    if (r.failed && out.failed_element < 0) out.failed_element = element;
    if (r.tangent_fallback) ++out.tangent_fallbacks;
    const auto& d = model_->element_dofs(element);
    for (int a = 0; a < 16; ++a) out.internal(d[a]) += r.force(a);
    double* values = out.stiffness.valuePtr();
    const auto& slots = slot_[element];
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            const int idx = slots[16 * a + b];
            if (idx >= 0) values[idx] += r.stiffness(a, b);
        }
    out.mean_stress[element] = r.mean_stress;
    if (r.local) out.local[state.segment_of[element]] = *r.local;
}

bool Assembler::secant_for(int element, const GlobalState& state) const
{
    if (secant_) return true;
    const int s = state.segment_of[element];
    return s >= 0 && static_cast<std::size_t>(s) < secant_points_.size() && secant_points_[s];
}

void Assembler::assemble_serial(const GlobalState& state, double time, AssemblyResult& out)
{
    begin(state, out);
    const int ne = static_cast<int>(model_->mesh.element_count());
    for (int e = 0; e < ne; ++e)
        scatter(e, element_response(*model_, state, e, time, secant_for(e, state), closed_slack_),
                state, out);
}

void Assembler::assemble_parallel(const GlobalState& state, double time, AssemblyResult& out)
{
    begin(state, out);
    const int ne = static_cast<int>(model_->mesh.element_count());
    buffer_.resize(static_cast<std::size_t>(ne));
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e)
        buffer_[e] = element_response(*model_, state, e, time, secant_for(e, state), closed_slack_);
    for (int e = 0; e < ne; ++e) scatter(e, buffer_[e], state, out);
}

} // namespace sdaheal
