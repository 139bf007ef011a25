/** @file material_law.cpp */

#include "sdaheal/material_law.hpp"

#include <algorithm>
#include <cmath>

namespace sdaheal {

namespace {

// Openings below this fraction of G_f/f_t are treated as exactly closed.
constexpr double closed_fraction = 1e-14;

struct ScalarLaw {
    double value = 0.0;
    double slope = 0.0;
};

ScalarLaw original_scalar(double zeta, const CohesiveState& s, const BulkMaterial& bulk,
                          bool loading)
{
    if (loading || s.max_opening <= 0.0) {
        const double t = softening_traction(zeta, bulk);
        return {t, -bulk.tensile_strength / bulk.fracture_energy * t};
    }
    const double k = s.max_traction / s.max_opening;
    return {k * zeta, k};
}

ScalarLaw agent_scalar(double zeta, const CohesiveState& s, const HealingAgent& agent,
                       bool loading)
{
    const double r = healing_degree(std::max(0.0, s.time - s.release_time), agent);
    if (loading || s.max_healed_opening <= 0.0) {
        const double h = r * healed_envelope(zeta, agent);
        return {h, -agent.ultimate_strength / agent.ultimate_fracture_energy * h};
    }
    const double k = r * healed_envelope(s.max_healed_opening, agent) / s.max_healed_opening;
    return {k * zeta, k};
}

bool agent_active(const CohesiveState& s, const HealingAgent* agent)
{
    return agent != nullptr && s.released && s.contact > 0.0;
}

ScalarLaw equivalent_scalar(double zeta, const CohesiveState& s, const BulkMaterial& bulk,
                            const HealingAgent* agent, const LawBranch& branch)
{
    ScalarLaw eq = original_scalar(zeta, s, bulk, branch.original_loading);
    if (agent_active(s, agent)) {
        const ScalarLaw h = agent_scalar(zeta, s, *agent, branch.agent_loading);
        eq.value += s.contact * h.value;
        eq.slope += s.contact * h.slope;
    }
    return eq;
}

bool is_closed(const CrackOpening& o, const BulkMaterial& bulk)
{
    return o.effective <= closed_fraction * bulk.fracture_energy / bulk.tensile_strength;
}

// Secant stiffness used on the diagonal when the crack is exactly closed.
double closed_stiffness(const CohesiveState& s, const BulkMaterial& bulk,
                        const HealingAgent* agent)
{
    double k = s.max_opening > 0.0 ? s.max_traction / s.max_opening : bulk.penalty_stiffness();
    if (agent_active(s, agent)) {
        const double r = healing_degree(std::max(0.0, s.time - s.release_time), *agent);
        double kh = 0.0;
        if (s.max_healed_opening > 0.0) {
            kh = healed_envelope(s.max_healed_opening, *agent) / s.max_healed_opening;
        } else {
            const double f = agent->ultimate_strength;
            kh = 50.0 * f * f / agent->ultimate_fracture_energy;
        }
        k += s.contact * r * kh;
    }
    return k;
}

} // namespace

void BulkMaterial::validate() const
{
    if (!(young_modulus > 0.0)) throw DomainError("young_modulus must be positive");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
        throw DomainError("poisson_ratio must lie in [0, 0.5)");
    if (!(tensile_strength > 0.0)) throw DomainError("tensile_strength must be positive");
    if (!(fracture_energy > 0.0)) throw DomainError("fracture_energy must be positive");
    if (!(mode_mix_beta >= 0.0)) throw DomainError("mode_mix_beta must be non-negative");
}

double BulkMaterial::penalty_stiffness() const
{
    // k0 = f_t / zeta_0 with zeta_0 = G_f / (50 f_t)
    return 50.0 * tensile_strength * tensile_strength / fracture_energy;
}

void HealingAgent::validate(const BulkMaterial& bulk) const
{
    if (!(ultimate_strength > 0.0)) throw DomainError("healing ultimate_strength must be positive");
    if (!(ultimate_fracture_energy > 0.0))
        throw DomainError("healing ultimate_fracture_energy must be positive");
    if (!(healing_rate > 0.0)) throw DomainError("healing_rate must be positive");
    if (!(release_threshold > 0.0)) throw DomainError("release_threshold must be positive");
    if (!(contact_exponent > 0.0)) throw DomainError("contact_exponent must be positive");
    if (release_threshold > bulk.tensile_strength)
        throw DomainError("release_threshold must not exceed the tensile strength");
}

CrackOpening make_opening(double normal, double tangential, double beta)
{
    return {normal, tangential, effective_opening(std::max(normal, 0.0), tangential, beta)};
}

CohesiveState CohesiveState::virgin(const BulkMaterial& bulk)
{
    CohesiveState s;
    s.max_traction = bulk.tensile_strength;
    return s;
}

LawBranch detect_branch(double zeta, const CohesiveState& s)
{
    return {zeta >= s.max_opening, zeta >= s.max_healed_opening};
}

double effective_opening(double normal, double tangential, double beta)
{
    return std::sqrt(normal * normal + beta * beta * tangential * tangential);
}

double softening_traction(double opening, const BulkMaterial& bulk)
{
    if (opening < 0.0) throw DomainError("softening_traction: negative opening");
    return bulk.tensile_strength *
           std::exp(-bulk.tensile_strength / bulk.fracture_energy * opening);
}

double original_traction(double opening, const CohesiveState& s, const BulkMaterial& bulk)
{
    if (opening < 0.0) throw DomainError("original_traction: negative opening");
    return original_scalar(opening, s, bulk, opening >= s.max_opening).value;
}

double healing_degree(double elapsed, const HealingAgent& agent)
{
    if (elapsed < 0.0) throw DomainError("healing_degree: negative elapsed time");
    return -std::expm1(-agent.healing_rate * elapsed);
}

double healed_envelope(double opening, const HealingAgent& agent)
{
    return agent.ultimate_strength *
           std::exp(-agent.ultimate_strength / agent.ultimate_fracture_energy * opening);
}

double healed_traction(double opening, double elapsed, const CohesiveState& s,
                       const HealingAgent& agent)
{
    if (!s.released) return 0.0;
    CohesiveState at = s;
    at.time = s.release_time + elapsed;
    return agent_scalar(opening, at, agent, opening >= s.max_healed_opening).value;
}

double contact_factor(double release_traction, const BulkMaterial& bulk,
                      const HealingAgent& agent)
{
    if (release_traction > agent.release_threshold) return 0.0;
    const double ratio = std::clamp(release_traction / bulk.tensile_strength, 0.0, 1.0);
    return 1.0 - std::pow(ratio, agent.contact_exponent);
}

TractionResult equivalent_traction(const CrackOpening& o, const CohesiveState& s,
                                   const BulkMaterial& bulk, const HealingAgent* agent)
{
    return equivalent_traction(o, s, bulk, agent, detect_branch(o.effective, s));
}

TractionResult equivalent_traction(const CrackOpening& o, const CohesiveState& s,
                                   const BulkMaterial& bulk, const HealingAgent* agent,
                                   const LawBranch& branch)
{
    const double contact = o.normal < 0.0 ? bulk.penalty_stiffness() * o.normal : 0.0;
    if (is_closed(o, bulk)) return {contact, 0.0, 0.0};
    const double zeta = o.effective;
    const double teq = equivalent_scalar(zeta, s, bulk, agent, branch).value;
    const double zn = std::max(o.normal, 0.0);
    return {teq * zn / zeta + contact, teq * o.tangential / zeta, teq};
}

Eigen::Matrix2d traction_tangent(const CrackOpening& o, const CohesiveState& s,
                                 const BulkMaterial& bulk, const HealingAgent* agent)
{
    return traction_tangent(o, s, bulk, agent, detect_branch(o.effective, s));
}

Eigen::Matrix2d traction_tangent(const CrackOpening& o, const CohesiveState& s,
                                 const BulkMaterial& bulk, const HealingAgent* agent,
                                 const LawBranch& branch)
{
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    const bool contact = o.normal < 0.0;
    if (is_closed(o, bulk)) {
        const double k = closed_stiffness(s, bulk, agent);
        d(0, 0) = contact ? bulk.penalty_stiffness() : k;
        d(1, 1) = k;
        return d;
    }

    const double beta2 = bulk.mode_mix_beta * bulk.mode_mix_beta;
    const double zeta = o.effective;
    const ScalarLaw eq = equivalent_scalar(zeta, s, bulk, agent, branch);
    const double zn = std::max(o.normal, 0.0);
    const double zt = o.tangential;
    // d(zeta)/d(zeta_n), d(zeta)/d(zeta_t)
    const double dz_n = contact ? 0.0 : zn / zeta;
    const double dz_t = beta2 * zt / zeta;
    const double over = eq.value / zeta;

    // T_n = T_eq zn / zeta, T_t = T_eq zt / zeta
    d(0, 0) = contact ? bulk.penalty_stiffness()
                      : eq.slope * dz_n * zn / zeta + over * (1.0 - dz_n * zn / zeta);
    d(0, 1) = (eq.slope - over) * dz_t * zn / zeta;
    d(1, 0) = (eq.slope - over) * dz_n * zt / zeta;
    d(1, 1) = eq.slope * dz_t * zt / zeta + over * (1.0 - dz_t * zt / zeta);
    return d;
}

double closed_strength(const CohesiveState& s, const BulkMaterial& bulk, const HealingAgent* agent)
{
    double strength = s.max_opening > 0.0 ? 0.0 : bulk.tensile_strength;
    if (agent_active(s, agent) && s.max_healed_opening <= 0.0) {
        const double r = healing_degree(std::max(0.0, s.time - s.release_time), *agent);
        strength += s.contact * r * agent->ultimate_strength;
    }
    return strength;
}

CohesiveState commit_state(const CrackOpening& o, const CohesiveState& s, double time,
                           const BulkMaterial& bulk, const HealingAgent* agent, ReleaseMode mode)
{
    CohesiveState next = s;
    next.opening_n = o.normal;
    next.opening_t = o.tangential;
    next.time = time;
    if (o.effective > next.max_opening) {
        next.max_opening = o.effective;
        next.max_traction = softening_traction(next.max_opening, bulk);
    }
    if (s.released) {
        next.max_healed_opening = std::max(next.max_healed_opening, o.effective);
    } else if (agent != nullptr && mode == ReleaseMode::threshold) {
        next = release_agent(next, time, bulk, *agent);
    }
    return next;
}

CohesiveState release_agent(const CohesiveState& s, double time, const BulkMaterial& bulk,
                            const HealingAgent& agent)
{
    if (s.released || s.max_opening <= 0.0 || s.max_traction > agent.release_threshold) return s;
    CohesiveState next = s;
    next.released = true;
    next.release_time = time;
    next.release_traction = s.max_traction;
    next.contact = contact_factor(s.max_traction, bulk, agent);
    next.max_healed_opening = 0.0;
    return next;
}

} // namespace sdaheal
