/**
 * @file dof_system.hpp
 * @brief Degree-of-freedom map with ties, prescribed values and equation numbering.
 *
 * Every node has two raw dofs (x, y). Ties map several raw dofs onto one
 * shared dof, which is how a rigid loading platen is represented. Each
 * shared dof is either free (gets an equation) or prescribed.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdaheal {

class DofSystem {
public:
    DofSystem() = default;
    explicit DofSystem(std::size_t node_count);

    /// Maps component `component` of all `nodes` onto one dof and returns it.
    /// Must be called before any fix()/equation query.
    int tie(std::span<const int> nodes, int component);

    int dof(int node, int component) const { return raw_to_dof_[2 * node + component]; }
    std::size_t dof_count() const { return prescribed_.size(); }

    void fix(int dof, double value = 0.0);
    void release(int dof);
    bool is_fixed(int dof) const { return prescribed_[dof]; }
    double prescribed_value(int dof) const { return value_[dof]; }
    void set_prescribed_value(int dof, double value) { value_[dof] = value; }

    /// Equation index of a free dof, -1 for a prescribed one.
    int equation(int dof) const;
    std::size_t equation_count() const;

    /// Incremented whenever the free set changes.
    unsigned revision() const { return revision_; }

private:
    void renumber() const;

    std::vector<int> raw_to_dof_;
    std::vector<bool> prescribed_;
    std::vector<double> value_;
    mutable std::vector<int> equation_;
    mutable std::size_t equation_count_ = 0;
    mutable bool numbered_ = false;
    unsigned revision_ = 0;
};

} // namespace sdaheal
