/**
 * @file material_law.hpp
 * @brief Softening-healing traction-separation law for embedded cracks.
 *
 * The virgin material follows an exponential softening envelope with secant
 * unloading to the origin. A healing agent, released once the envelope
 * traction drops to a threshold, adds a second exponential law that matures
 * with rest time and acts as a parallel spring scaled by a contact factor.
 *
 * Units are SI throughout (Pa, m, N/m) except time, which is in hours so
 * that the healing rate can be given in 1/h.
 */
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sdaheal {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class PlaneMode { plane_stress, plane_strain };

struct BulkMaterial {
    double young_modulus = 0.0;    // Pa
    double poisson_ratio = 0.0;
    double tensile_strength = 0.0; // f_t, Pa
    double fracture_energy = 0.0;  // G_f, N/m
    double mode_mix_beta = 1.0;
    PlaneMode plane_mode = PlaneMode::plane_stress;

    void validate() const;

    /// Contact penalty stiffness, also used as the tangent of a closed virgin crack.
    double penalty_stiffness() const;
};

struct HealingAgent {
    double ultimate_strength = 0.0;        // f_h,inf, Pa
    double ultimate_fracture_energy = 0.0; // G_h,inf, N/m
    double healing_rate = 0.0;             // A_h, 1/h
    double release_threshold = 0.0;        // T_0, Pa
    double contact_exponent = 0.0;         // b

    void validate(const BulkMaterial& bulk) const;
};

/// Crack opening split along the crack normal and tangent, plus the
/// mixed-mode effective value.
struct CrackOpening {
    double normal = 0.0;
    double tangential = 0.0;
    double effective = 0.0;
};

/// Builds an opening from its components. A negative normal component is
/// interpenetration: it is handled by the contact penalty and does not count
/// towards the effective opening.
CrackOpening make_opening(double normal, double tangential, double beta);

/// History of one cohesive point. Build with CohesiveState::virgin().
struct CohesiveState {
    double opening_n = 0.0;
    double opening_t = 0.0;
    double max_opening = 0.0;          // zeta_mx
    double max_traction = 0.0;         // T_mx = TL(zeta_mx)
    bool released = false;
    double release_time = 0.0;         // t_r
    double release_traction = 0.0;     // T_mx at t_r
    double contact = 0.0;              // alpha, frozen at release
    double max_healed_opening = 0.0;   // zeta_hx
    double time = 0.0;                 // current time, h

    static CohesiveState virgin(const BulkMaterial& bulk);
};

/// Which side of each history branch point a law evaluation uses.
struct LawBranch {
    bool original_loading = true;
    bool agent_loading = true;

    friend bool operator==(const LawBranch&, const LawBranch&) = default;
};

LawBranch detect_branch(double effective_opening, const CohesiveState& state);

double effective_opening(double normal, double tangential, double beta);

/// Exponential softening envelope TL.
double softening_traction(double opening, const BulkMaterial& bulk);

/// T(zeta): envelope when zeta >= zeta_mx, secant to the origin otherwise.
double original_traction(double opening, const CohesiveState& state, const BulkMaterial& bulk);

/// R(dt) = 1 - exp(-A_h dt).
double healing_degree(double elapsed, const HealingAgent& agent);

/// Mature healed envelope HL_inf.
double healed_envelope(double opening, const HealingAgent& agent);

/// H(zeta, dt) = R(dt) H_inf(zeta); zero before release.
double healed_traction(double opening, double elapsed, const CohesiveState& state,
                       const HealingAgent& agent);

double contact_factor(double release_traction, const BulkMaterial& bulk,
                      const HealingAgent& agent);

struct TractionResult {
    double normal = 0.0;
    double tangential = 0.0;
    double equivalent = 0.0;
};

/// Parallel-spring traction T_eq = T + alpha H resolved onto n and t. The
/// agent may be null for a non-healing material. Healing maturity uses
/// state.time.
TractionResult equivalent_traction(const CrackOpening& opening, const CohesiveState& state,
                                   const BulkMaterial& bulk, const HealingAgent* agent);

/// Same with the history branches forced, as used inside a frozen Newton sweep.
TractionResult equivalent_traction(const CrackOpening& opening, const CohesiveState& state,
                                   const BulkMaterial& bulk, const HealingAgent* agent,
                                   const LawBranch& branch);

/// D = D_o + alpha D_h, the Jacobian of (T_n, T_t) with respect to (zeta_n, zeta_t).
Eigen::Matrix2d traction_tangent(const CrackOpening& opening, const CohesiveState& state,
                                 const BulkMaterial& bulk, const HealingAgent* agent);

Eigen::Matrix2d traction_tangent(const CrackOpening& opening, const CohesiveState& state,
                                 const BulkMaterial& bulk, const HealingAgent* agent,
                                 const LawBranch& branch);

/// Traction the closed crack can carry before it opens: f_t for a virgin
/// point plus alpha R f_h,inf for an agent that has not been reopened.
double closed_strength(const CohesiveState& state, const BulkMaterial& bulk,
                       const HealingAgent* agent);

/// Controls how the healing agent is released on commit.
enum class ReleaseMode {
    threshold, ///< release on the first committed step with T_mx <= T_0
    explicit_  ///< release only through release_agent()
};

/// Updates the history after a converged global step at time t.
CohesiveState commit_state(const CrackOpening& opening, const CohesiveState& state, double time,
                           const BulkMaterial& bulk, const HealingAgent* agent,
                           ReleaseMode mode = ReleaseMode::threshold);

/// Releases the agent at time t if the envelope traction has dropped to T_0.
/// Returns the state unchanged otherwise, or if already released.
CohesiveState release_agent(const CohesiveState& state, double time, const BulkMaterial& bulk,
                            const HealingAgent& agent);

} // namespace sdaheal
