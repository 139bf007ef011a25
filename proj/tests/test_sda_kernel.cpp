#include "oracles.hpp"
#include "sdaheal/sda_kernel.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace sdaheal;

namespace {

BulkMaterial bar(double nu = 0.0)
{
    BulkMaterial b;
    b.young_modulus = 30e9;
    b.poisson_ratio = nu;
    b.tensile_strength = 3e6;
    b.fracture_energy = 100.0;
    return b;
}

std::array<Point2, 4> rectangle(double w, double h)
{
    return {Point2(0, 0), Point2(w, 0), Point2(w, h), Point2(0, h)};
}

CrackSegment horizontal(double lc)
{
    return make_segment(0, {0.0, 1.0}, {0.0, 0.5}, {1.0, 0.5}, lc);
}

} // namespace

TEST_CASE("plane elasticity")
{
    auto b = bar(0.2);
    CHECK((elasticity_matrix(b) - oracle::plane_stress(30e9, 0.2)).norm() <= 1e-6);
    b.plane_mode = PlaneMode::plane_strain;
    const Matrix3 c = elasticity_matrix(b);
    const double lam = 30e9 * 0.2 / (1.2 * 0.6);
    const double mu = 30e9 / 2.4;
    CHECK(c(0, 0) == doctest::Approx(lam + 2.0 * mu));
    CHECK(c(0, 1) == doctest::Approx(lam));
    CHECK(c(2, 2) == doctest::Approx(mu));
}

TEST_CASE("characteristic length is area over crack chord")
{
    const auto r = rectangle(0.04, 0.01);
    CHECK(characteristic_length(r, {0.0, 1.0}) == doctest::Approx(0.01));
    CHECK(characteristic_length(r, {1.0, 0.0}) == doctest::Approx(0.04));
    const auto sq = rectangle(0.02, 0.02);
    const Point2 diag = Point2(1.0, 1.0).normalized();
    CHECK(characteristic_length(sq, diag) == doctest::Approx(0.02 / std::sqrt(2.0)));
    // shallow angle: the chord is capped by the outline
    const double th = 10.0 * std::numbers::pi / 180.0;
    const Point2 n(-std::sin(th), std::cos(th));
    const double chord = 0.02 / std::cos(th);
    CHECK(characteristic_length(sq, n) == doctest::Approx(0.02 * 0.02 / chord));
    const std::array<Point2, 3> flat{Point2(0, 0), Point2(1, 0), Point2(2, 0)};
    CHECK_THROWS_AS(characteristic_length(flat, {0.0, 1.0}), GeometryError);
}

TEST_CASE("projection vectors contract stress onto the crack")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Point2 n = Point2(u(rng), u(rng)).normalized();
        const Point2 t = perpendicular(n);
        const auto p = ProjectionPair::from_normal(n, t);
        Eigen::Matrix2d s;
        s << u(rng), u(rng), 0.0, u(rng);
        s(1, 0) = s(0, 1);
        const Voigt3 v(s(0, 0), s(1, 1), s(0, 1));
        CHECK(p.v1.dot(v) == doctest::Approx(n.dot(s * n)));
        CHECK(p.v2.dot(v) == doctest::Approx(n.dot(s * t)));
    }
}

TEST_CASE("enhanced strain of a unit opening")
{
    const auto seg = horizontal(0.02);
    const Voigt3 e = enhanced_strain(1e-4, 2e-4, seg);
    CHECK(e(0) == doctest::Approx(0.0));
    CHECK(e(1) == doctest::Approx(1e-4 / 0.02));
    CHECK(std::abs(e(2)) == doctest::Approx(2e-4 / 0.02));
}

TEST_CASE("mode I opening agrees with the bisection oracle")
{
    const auto b = bar();
    const double lc = 0.02;
    const auto seg = horizontal(lc);
    const double eps_peak = 3e6 / 30e9;
    for (double f : {1.05, 1.5, 3.0, 10.0, 40.0}) {
        const double eps = f * eps_peak;
        auto s = CohesiveState::virgin(b);
        const auto sol = solve_local({0.0, eps, 0.0}, s, seg, b, nullptr, 0.0);
        REQUIRE_FALSE(sol.closed);
        REQUIRE(sol.report.converged);
        const double z = oracle::uniaxial_opening(eps, 30e9, lc, 3e6, 100.0);
        CHECK(sol.opening.normal == doctest::Approx(z).epsilon(1e-9));
        CHECK(sol.stress(1) == doctest::Approx(oracle::tl(z, 3e6, 100.0)).epsilon(1e-8));
    }
}

TEST_CASE("a virgin crack stays rigid below the strength")
{
    const auto b = bar(0.2);
    const auto seg = horizontal(0.02);
    const auto s = CohesiveState::virgin(b);
    const Voigt3 eps(0.0, 0.9 * 3e6 / 30e9, 0.0);
    const auto sol = solve_local(eps, s, seg, b, nullptr, 0.0);
    CHECK(sol.closed);
    CHECK((sol.stress - elasticity_matrix(b) * eps).norm() == doctest::Approx(0.0));
    const auto t = elastoplastic_tangent(sol, seg, b);
    CHECK((t.tangent - elasticity_matrix(b)).norm() == 0.0);
}

TEST_CASE("converged stress balances the cohesive traction")
{
    const auto b = bar(0.2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double th = 2.0 * std::numbers::pi * u(rng);
        const Point2 n(std::cos(th), std::sin(th));
        const auto seg = make_segment(0, n, Point2::Zero(), perpendicular(n), 0.005 + 0.03 * u(rng));
        auto s = CohesiveState::virgin(b);
        if (i % 3 == 0) {
            s.max_opening = 5e-5 * u(rng) + 1e-6;
            s.max_traction = oracle::tl(s.max_opening, 3e6, 100.0);
        }
        const double scale = 3e6 / 30e9;
        const Voigt3 eps(scale * (4.0 * u(rng) - 1.0), scale * (4.0 * u(rng) - 1.0),
                         scale * (4.0 * u(rng) - 2.0));
        const auto sol = solve_local(eps, s, seg, b, nullptr, 0.0);
        if (sol.closed) continue;
        REQUIRE(sol.report.converged);
        const auto p = ProjectionPair::from_normal(seg.normal, seg.tangent).matrix();
        CHECK((p.transpose() * sol.stress - sol.traction).norm() <= 1e-8 * 3e6);
    }
}

TEST_CASE("elastoplastic tangent is the derivative of the stress map")
{
    const auto b = bar(0.2);
    const double th = 0.3;
    const Point2 n(std::cos(th), std::sin(th));
    const auto seg = make_segment(0, n, Point2::Zero(), perpendicular(n), 0.015);
    auto s = CohesiveState::virgin(b);
    s.max_opening = 2e-5;
    s.max_traction = oracle::tl(2e-5, 3e6, 100.0);
    s.opening_n = 2e-5;
    const Matrix3 c = elasticity_matrix(b);
    // strain that opens the crack to about 3e-5 in mode I with some sliding
    const Voigt3 eps = c.inverse() * Voigt3(2.2e6, 0.4e6, 0.6e6) +
                       enhanced_strain(3e-5, 5e-6, seg);
    const auto sol = solve_local(eps, s, seg, b, nullptr, 0.0);
    REQUIRE_FALSE(sol.closed);
    REQUIRE(sol.branch.original_loading);
    const Matrix3 k = elastoplastic_tangent(sol, seg, b).tangent;
    Matrix3 fd;
    const double h = 1e-7 * eps.norm();
    for (int j = 0; j < 3; ++j) {
        Voigt3 p = eps;
        Voigt3 m = eps;
        p(j) += h;
        m(j) -= h;
        fd.col(j) = (solve_local(p, s, seg, b, nullptr, 0.0).stress -
                     solve_local(m, s, seg, b, nullptr, 0.0).stress) /
                    (2.0 * h);
    }
    CHECK((k - fd).norm() <= 1e-5 * fd.norm());
    CHECK((k - k.transpose()).norm() <= 1e-12 * k.norm());
}

TEST_CASE("fluctuation modulus")
{
    const auto b = bar(0.2);
    const auto seg = horizontal(0.02);
    const auto v = CohesiveState::virgin(b);
    CHECK((fluctuation_elasticity(v, seg, b) - elasticity_matrix(b)).norm() == 0.0);
    auto s = v;
    s.max_opening = 1e-4;
    s.max_traction = oracle::tl(1e-4, 3e6, 100.0);
    const Matrix3 f = fluctuation_elasticity(s, seg, b);
    CHECK((f - f.transpose()).norm() <= 1e-12 * f.norm());
    Eigen::SelfAdjointEigenSolver<Matrix3> eig(f);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    // softer than C normal to the crack
    CHECK(f(1, 1) < elasticity_matrix(b)(1, 1));
}
