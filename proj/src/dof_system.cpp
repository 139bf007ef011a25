/** @file dof_system.cpp */

#include "sdaheal/dof_system.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sdaheal {

DofSystem::DofSystem(std::size_t node_count)
    : raw_to_dof_(2 * node_count), prescribed_(2 * node_count, false), value_(2 * node_count, 0.0)
{
    std::iota(raw_to_dof_.begin(), raw_to_dof_.end(), 0);
}

int DofSystem::tie(std::span<const int> nodes, int component)
{
    if (nodes.empty()) throw std::invalid_argument("tie: empty node set");
    const int master = dof(nodes.front(), component);
    for (int n : nodes) raw_to_dof_[2 * n + component] = master;
    // Compact: dofs no longer referenced by any raw dof are removed.
    std::vector<bool> used(prescribed_.size(), false);
    for (int d : raw_to_dof_) used[d] = true;
    std::vector<int> remap(prescribed_.size(), -1);
    std::vector<bool> fixed;
    std::vector<double> values;
    int next = 0;
    for (std::size_t d = 0; d < used.size(); ++d) {
        if (!used[d]) continue;
        remap[d] = next++;
        fixed.push_back(prescribed_[d]);
        values.push_back(value_[d]);
    }
    for (int& d : raw_to_dof_) d = remap[d];
    prescribed_ = std::move(fixed);
    value_ = std::move(values);
    numbered_ = false;
    ++revision_;
    return remap[master];
}

void DofSystem::fix(int dof, double value)
{
    if (!prescribed_[dof]) {
        prescribed_[dof] = true;
        numbered_ = false;
        ++revision_;
    }
    value_[dof] = value;
}

void DofSystem::release(int dof)
{
    if (prescribed_[dof]) {
        prescribed_[dof] = false;
        numbered_ = false;
        ++revision_;
    }
}

void DofSystem::renumber() const
{
    equation_.assign(prescribed_.size(), -1);
    int next = 0;
    for (std::size_t d = 0; d < prescribed_.size(); ++d)
        if (!prescribed_[d]) equation_[d] = next++;
    equation_count_ = static_cast<std::size_t>(next);
    numbered_ = true;
}

int DofSystem::equation(int dof) const
{
    if (!numbered_) renumber();
    return equation_[dof];
}

std::size_t DofSystem::equation_count() const
{
    if (!numbered_) renumber();
    return equation_count_;
}

} // namespace sdaheal
