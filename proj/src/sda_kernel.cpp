/** @file sda_kernel.cpp */

#include "sdaheal/sda_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace sdaheal {

namespace {

struct LocalProblem {
    const BulkMaterial& bulk;
    const HealingAgent* agent;
    const CohesiveState& state;
    Eigen::Matrix2d g_over_lc;
    Eigen::Vector2d t0; // projected stress at zero opening

    CrackOpening opening(const Eigen::Vector2d& z) const
    {
        return make_opening(z(0), z(1), bulk.mode_mix_beta);
    }

    Eigen::Vector2d law(const Eigen::Vector2d& z, const LawBranch& b) const
    {
        const auto t = equivalent_traction(opening(z), state, bulk, agent, b);
        return {t.normal, t.tangential};
    }

    Eigen::Vector2d residual(const Eigen::Vector2d& z, const LawBranch& b) const
    {
        return t0 - g_over_lc * z - law(z, b);
    }

    Eigen::Matrix2d jacobian(const Eigen::Vector2d& z, const LawBranch& b) const
    {
        return g_over_lc + traction_tangent(opening(z), state, bulk, agent, b);
    }
};

struct SweepResult {
    Eigen::Vector2d z;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

SweepResult newton_sweep(const LocalProblem& p, Eigen::Vector2d z, const LawBranch& b,
                         double tol, const LocalSolveOptions& opts)
{
    SweepResult out;
    Eigen::Vector2d r = p.residual(z, b);
    double rn = r.norm();
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (rn <= tol) {
            out.converged = true;
            break;
        }
        const Eigen::Matrix2d j = p.jacobian(z, b);
        const Eigen::Vector2d dz = j.fullPivLu().solve(r);
        if (!dz.allFinite()) break;
        double step = 1.0;
        Eigen::Vector2d zn = z + dz;
        Eigen::Vector2d rnew = p.residual(zn, b);
        for (int h = 0; h < opts.max_halvings && rnew.norm() > rn; ++h) {
            step *= 0.5;
            zn = z + step * dz;
            rnew = p.residual(zn, b);
        }
        z = zn;
        r = rnew;
        rn = r.norm();
        ++out.iterations;
    }
    if (rn <= tol) out.converged = true;
    out.z = z;
    out.residual = rn;
    return out;
}

} // namespace

Matrix3 elasticity_matrix(const BulkMaterial& bulk)
{
    const double e = bulk.young_modulus;
    const double nu = bulk.poisson_ratio;
    Matrix3 c = Matrix3::Zero();
    if (bulk.plane_mode == PlaneMode::plane_stress) {
        const double f = e / (1.0 - nu * nu);
        c << f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * (1.0 - nu) / 2.0;
    } else {
        const double f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
        c << f * (1.0 - nu), f * nu, 0.0, f * nu, f * (1.0 - nu), 0.0, 0.0, 0.0,
            f * (1.0 - 2.0 * nu) / 2.0;
    }
    return c;
}

CrackSegment make_segment(int element, const Point2& normal, const Point2& entry,
                          const Point2& exit, double char_length)
{
    CrackSegment s;
    s.element = element;
    s.normal = normal.normalized();
    s.tangent = perpendicular(s.normal);
    s.entry = entry;
    s.exit = exit;
    s.char_length = char_length;
    return s;
}

ProjectionPair ProjectionPair::from_normal(const Point2& n, const Point2& t)
{
    ProjectionPair p;
    p.v1 << n.x() * n.x(), n.y() * n.y(), 2.0 * n.x() * n.y();
    p.v2 << n.x() * t.x(), n.y() * t.y(), n.x() * t.y() + n.y() * t.x();
    return p;
}

Matrix32 ProjectionPair::matrix() const
{
    Matrix32 m;
    m.col(0) = v1;
    m.col(1) = v2;
    return m;
}

Eigen::Matrix2d balance_matrix(const ProjectionPair& proj, const Matrix3& c)
{
    const Matrix32 p = proj.matrix();
    return p.transpose() * c * p;
}

double characteristic_length(std::span<const Point2> outline, const Point2& normal)
{
    const double area = polygon_area(outline);
    if (!(area > 0.0)) throw GeometryError("characteristic_length: degenerate element");
    const Point2 centroid = polygon_centroid(outline);
    const double chord = chord_length(outline, centroid, perpendicular(normal.normalized()));
    if (!(chord > 0.0)) throw GeometryError("characteristic_length: empty chord");
    return area / chord;
}

Voigt3 enhanced_strain(double opening_n, double opening_t, const CrackSegment& seg)
{
    const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
    return (proj.v1 * opening_n + proj.v2 * opening_t) / seg.char_length;
}

Voigt3 trial_stress(const Voigt3& total_strain, const CohesiveState& state,
                    const CrackSegment& seg, const BulkMaterial& bulk)
{
    return elasticity_matrix(bulk) *
           (total_strain - enhanced_strain(state.opening_n, state.opening_t, seg));
}

LocalSolution solve_local(const Voigt3& total_strain, const CohesiveState& state,
                          const CrackSegment& seg, const BulkMaterial& bulk,
                          const HealingAgent* agent, double time, const LocalSolveOptions& opts)
{
    CohesiveState at = state;
    at.time = time;

    const Matrix3 c = elasticity_matrix(bulk);
    const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
    const Matrix32 pm = proj.matrix();
    const double lc = seg.char_length;
    const Eigen::Matrix2d g = pm.transpose() * c * pm;
    const Eigen::Vector3d c_eps = c * total_strain;

    LocalProblem prob{bulk, agent, at, g / lc, pm.transpose() * c_eps};
    const double tol = opts.tolerance_factor * bulk.tensile_strength;
    const Eigen::Vector2d previous(state.opening_n, state.opening_t);

    LocalSolution sol;
    const double strength = closed_strength(at, bulk, agent);
    const double drive = std::hypot(std::max(prob.t0(0), 0.0), prob.t0(1));
    const bool was_closed = prob.opening(previous).effective <= 0.0 && previous(0) >= 0.0;

    const bool can_close = strength > 0.0 && drive <= strength;
    auto closed_solution = [&] {
        sol.closed = true;
        sol.opening = make_opening(0.0, 0.0, bulk.mode_mix_beta);
        sol.branch = detect_branch(0.0, at);
        sol.stress = c_eps;
        sol.traction = prob.t0;
        sol.report = {-previous(0), -previous(1), 0, 0.0, true};
        return sol;
    };
    if (can_close && (was_closed || state.max_opening <= 0.0)) return closed_solution();
    if (state.max_opening <= 0.0 && drive <= strength * (1.0 + opts.closed_slack))
        return closed_solution();

    Eigen::Vector2d z = previous;
    if (prob.opening(z).effective <= 0.0) {
        // Start from the linearised opening beyond the closed strength.
        Eigen::Vector2d drive_dir = Eigen::Vector2d(std::max(prob.t0(0), 0.0), prob.t0(1));
        const double dn = drive_dir.norm();
        const Eigen::Vector2d excess =
            dn > 0.0 ? Eigen::Vector2d(prob.t0 - strength * drive_dir / dn) : prob.t0;
        const Eigen::Matrix2d k0 =
            prob.g_over_lc + bulk.penalty_stiffness() * Eigen::Matrix2d::Identity();
        z = k0.fullPivLu().solve(excess);
    }

    LawBranch branch = detect_branch(prob.opening(z).effective, at);
    SweepResult sweep;
    int total_iterations = 0;
    bool consistent = false;
    for (int s = 0; s < opts.max_branch_sweeps; ++s) {
        sweep = newton_sweep(prob, z, branch, tol, opts);
        total_iterations += sweep.iterations;
        if (!sweep.converged) break;
        z = sweep.z;
        const LawBranch found = detect_branch(prob.opening(z).effective, at);
        if (found == branch) {
            consistent = true;
            break;
        }
        branch = found;
    }

    if (!(consistent && sweep.converged) && can_close) return closed_solution();

    sol.opening = prob.opening(z);
    sol.branch = branch;
    sol.stress = c * (total_strain - pm * z / lc);
    sol.traction = prob.law(z, branch);
    sol.law_tangent = traction_tangent(sol.opening, at, bulk, agent, branch);
    sol.report.delta_n = z(0) - previous(0);
    sol.report.delta_t = z(1) - previous(1);
    sol.report.iterations = total_iterations;
    sol.report.residual_norm = sweep.residual;
    sol.report.converged = consistent && sweep.converged;
    return sol;
}

TangentResult elastoplastic_tangent(const LocalSolution& sol, const CrackSegment& seg,
                                    const BulkMaterial& bulk)
{
    const Matrix3 c = elasticity_matrix(bulk);
    TangentResult out{c, false, false};
    if (sol.closed) return out;

    const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
    const Matrix32 pm = proj.matrix();
    const Eigen::Matrix2d g = pm.transpose() * c * pm;
    Eigen::Matrix2d m = g + seg.char_length * sol.law_tangent;

    auto singular = [&](const Eigen::Matrix2d& a) {
        return !(std::abs(a.determinant()) > 1e-14 * a.squaredNorm()) || !a.allFinite();
    };
    if (singular(m)) {
        m += 1e-12 * g.trace() * Eigen::Matrix2d::Identity();
        out.regularized = true;
        if (singular(m)) {
            out.fell_back_to_elastic = true;
            return out;
        }
    }
    const Matrix32 cp = c * pm;
    out.tangent = c - cp * m.inverse() * cp.transpose();
    return out;
}

Matrix3 fluctuation_elasticity(const CohesiveState& state, const CrackSegment& seg,
                               const BulkMaterial& bulk)
{
    const Matrix3 c = elasticity_matrix(bulk);
    if (!(state.max_opening > 0.0)) return c;
    const double k = state.max_traction / state.max_opening;
    const auto proj = ProjectionPair::from_normal(seg.normal, seg.tangent);
    const Matrix32 pm = proj.matrix();
    const Eigen::Matrix2d m =
        pm.transpose() * c * pm + seg.char_length * k * Eigen::Matrix2d::Identity();
    const Matrix32 cp = c * pm;
    return c - cp * m.inverse() * cp.transpose();
}

} // namespace sdaheal
