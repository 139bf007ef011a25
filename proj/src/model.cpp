/** @file model.cpp */

#include "sdaheal/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdaheal {

void Model::prepare()
{
    bulk.validate();
    if (healing) healing->validate(bulk);
    if (!(mesh.thickness > 0.0)) throw DomainError("thickness must be positive");
    mesh.validate();
    if (dofs.dof_count() == 0) dofs = DofSystem(mesh.node_count());

    elasticity_ = elasticity_matrix(bulk);
    full_.clear();
    reduced_.clear();
    element_dofs_.clear();
    std::vector<double> sizes;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const int id = static_cast<int>(e);
        full_.push_back(build_element_operators(mesh, id, QuadratureRule::full_3x3, elasticity_));
        reduced_.push_back(
            build_element_operators(mesh, id, QuadratureRule::reduced_2x2, elasticity_));
        std::array<int, 16> d{};
        for (int a = 0; a < 8; ++a) {
            d[2 * a] = dofs.dof(mesh.elements[e][a], 0);
            d[2 * a + 1] = dofs.dof(mesh.elements[e][a], 1);
        }
        element_dofs_.push_back(d);
        sizes.push_back(std::sqrt(full_.back().volume / mesh.thickness));
    }
    std::sort(sizes.begin(), sizes.end());
    median_size_ = sizes.empty() ? 0.0 : sizes[sizes.size() / 2];

    for (auto& p : patterns)
        if (p.force.size() != static_cast<Eigen::Index>(dofs.dof_count()))
            throw std::invalid_argument("load pattern '" + p.name + "' has the wrong size");
}

int Model::pattern_index(const std::string& name) const
{
    for (std::size_t i = 0; i < patterns.size(); ++i)
        if (patterns[i].name == name) return static_cast<int>(i);
    return -1;
}

double Model::cmod_value(const Eigen::VectorXd& u) const
{
    if (!cmod.defined()) return 0.0;
    return cmod_coefficients().dot(u);
}

Eigen::VectorXd Model::cmod_coefficients() const
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.dof_count()));
    if (!cmod.defined()) return c;
    const Point2 d = cmod.direction.normalized();
    for (int k = 0; k < 2; ++k) {
        c(dofs.dof(cmod.node_b, k)) += d(k);
        c(dofs.dof(cmod.node_a, k)) -= d(k);
    }
    return c;
}

GlobalState GlobalState::initial(const Model& model)
{
    GlobalState s;
    s.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dofs.dof_count()));
    for (std::size_t d = 0; d < model.dofs.dof_count(); ++d)
        if (model.dofs.is_fixed(static_cast<int>(d)))
            s.u(static_cast<Eigen::Index>(d)) = model.dofs.prescribed_value(static_cast<int>(d));
    s.lambda.assign(model.patterns.size(), 0.0);
    s.segment_of.assign(model.mesh.element_count(), -1);
    return s;
}

void GlobalState::embed(const CrackSegment& seg, const BulkMaterial& bulk)
{
    if (segment_of[seg.element] >= 0) throw GeometryError("element already carries a crack");
    segment_of[seg.element] = static_cast<int>(path.segments.size());
    path.segments.push_back(seg);
    path.created_step.push_back(step);
    CohesiveState c = CohesiveState::virgin(bulk);
    c.time = time;
    cohesive.push_back(c);
}

Eigen::VectorXd external_force(const Model& model, const GlobalState& state)
{
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dofs.dof_count()));
    for (std::size_t p = 0; p < model.patterns.size(); ++p)
        if (state.lambda[p] != 0.0) f += state.lambda[p] * model.patterns[p].force;
    return f;
}

} // namespace sdaheal
