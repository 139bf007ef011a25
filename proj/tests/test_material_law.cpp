#include "oracles.hpp"
#include "sdaheal/material_law.hpp"

#include <doctest.h>

#include <random>

using namespace sdaheal;

namespace {

BulkMaterial concrete()
{
    BulkMaterial b;
    b.young_modulus = 30e9;
    b.poisson_ratio = 0.2;
    b.tensile_strength = 3e6;
    b.fracture_energy = 100.0;
    return b;
}

HealingAgent agent()
{
    HealingAgent a;
    a.ultimate_strength = 0.7e6;
    a.ultimate_fracture_energy = 42.0;
    a.healing_rate = 0.096;
    a.release_threshold = 1.5e6;
    a.contact_exponent = 2.0;
    return a;
}

CohesiveState opened(const BulkMaterial& b, double zmx)
{
    CohesiveState s = CohesiveState::virgin(b);
    s.max_opening = zmx;
    s.max_traction = oracle::tl(zmx, b.tensile_strength, b.fracture_energy);
    return s;
}

} // namespace

TEST_CASE("softening envelope matches the exponential law")
{
    const auto b = concrete();
    CHECK(softening_traction(0.0, b) == doctest::Approx(3e6).epsilon(1e-15));
    for (double z : {1e-6, 1e-5, 3.3e-5, 1e-4, 5e-4})
        CHECK(softening_traction(z, b) == doctest::Approx(oracle::tl(z, 3e6, 100.0)).epsilon(1e-13));
    CHECK_THROWS_AS(softening_traction(-1e-9, b), DomainError);
}

TEST_CASE("area under the envelope is the fracture energy")
{
    const auto b = concrete();
    const double end = 40.0 * b.fracture_energy / b.tensile_strength;
    const int n = 200000;
    double area = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z0 = end * i / n;
        const double z1 = end * (i + 1) / n;
        area += 0.5 * (z1 - z0) * (softening_traction(z0, b) + softening_traction(z1, b));
    }
    CHECK(area == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("secant unloading passes through the origin")
{
    const auto b = concrete();
    const double zmx = 4e-5;
    const auto s = opened(b, zmx);
    for (double f : {0.0, 0.1, 0.5, 0.99})
        CHECK(original_traction(f * zmx, s, b) ==
              doctest::Approx(oracle::original(f * zmx, zmx, 3e6, 100.0)).epsilon(1e-13));
    CHECK(original_traction(2.0 * zmx, s, b) == doctest::Approx(oracle::tl(2.0 * zmx, 3e6, 100.0)));
}

TEST_CASE("healing degree reaches 90 percent after 24 hours")
{
    CHECK(healing_degree(24.0, agent()) == doctest::Approx(0.9).epsilon(1e-3));
    CHECK(healing_degree(0.0, agent()) == 0.0);
    CHECK_THROWS_AS(healing_degree(-1.0, agent()), DomainError);
}

TEST_CASE("scaling the mature law by R equals the law of the scaled parameters")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    std::uniform_real_distribution<double> uz(0.0, 1e-3);
    const auto a = agent();
    for (int i = 0; i < 1000; ++i) {
        const double r = ur(rng);
        const double z = uz(rng);
        HealingAgent scaled = a;
        scaled.ultimate_strength = r * a.ultimate_strength;
        scaled.ultimate_fracture_energy = r * a.ultimate_fracture_energy;
        const double lhs = r * healed_envelope(z, a);
        const double rhs = r > 0.0 ? healed_envelope(z, scaled) : 0.0;
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * a.ultimate_strength);
    }
}

TEST_CASE("contact factor")
{
    const auto b = concrete();
    const auto a = agent();
    CHECK(contact_factor(1.5e6, b, a) == doctest::Approx(0.75));
    CHECK(contact_factor(0.0, b, a) == doctest::Approx(1.0));
    CHECK(contact_factor(1.6e6, b, a) == 0.0);
    for (double t : {0.1e6, 0.7e6, 1.2e6})
        CHECK(contact_factor(t, b, a) == doctest::Approx(oracle::contact(t, 3e6, 1.5e6, 2.0)));
}

TEST_CASE("equivalent traction is the parallel spring sum")
{
    const auto b = concrete();
    const auto a = agent();
    auto s = opened(b, 1e-4);
    s = release_agent(s, 10.0, b, a);
    REQUIRE(s.released);
    s.time = 34.0;
    const double alpha = oracle::contact(s.max_traction, 3e6, 1.5e6, 2.0);
    const double r = oracle::maturity(24.0, 0.096);
    for (double z : {1e-5, 5e-5, 2e-4}) {
        const double zn = 0.8 * z;
        const double zt = 0.6 * z;
        const auto t = equivalent_traction(make_opening(zn, zt, 1.0), s, b, &a);
        const double teq = oracle::original(z, 1e-4, 3e6, 100.0) + alpha * r * oracle::hl(z, 0.7e6, 42.0);
        CHECK(t.equivalent == doctest::Approx(teq).epsilon(1e-12));
        CHECK(t.normal == doctest::Approx(teq * 0.8).epsilon(1e-12));
        CHECK(t.tangential == doctest::Approx(teq * 0.6).epsilon(1e-12));
    }
    // no agent before release
    const auto v = opened(b, 1e-4);
    CHECK(equivalent_traction(make_opening(1e-5, 0.0, 1.0), v, b, &a).equivalent ==
          doctest::Approx(oracle::original(1e-5, 1e-4, 3e6, 100.0)));
}

TEST_CASE("negative normal opening is contact, not effective opening")
{
    const auto o = make_opening(-1e-6, 2e-6, 1.0);
    CHECK(o.effective == doctest::Approx(2e-6));
    const auto b = concrete();
    const auto s = opened(b, 1e-4);
    const auto t = equivalent_traction(o, s, b, nullptr);
    CHECK(t.normal < 0.0);
    CHECK(t.normal == doctest::Approx(-1e-6 * b.penalty_stiffness()));
}

TEST_CASE("law tangent matches finite differences")
{
    const auto b = concrete();
    const auto a = agent();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> angle(-1.2, 1.2);
    for (int i = 0; i < 200; ++i) {
        const double zmx = 1e-4 * u(rng);
        auto s = opened(b, zmx);
        const bool healed = i % 2 == 1;
        if (healed) {
            s = opened(b, 5e-4 * u(rng) + 2e-4);
            s = release_agent(s, 0.0, b, a);
            s.time = 24.0 * u(rng);
            s.max_healed_opening = i % 4 == 1 ? 0.0 : 3e-5 * u(rng);
        }
        const double z = s.max_opening * 2.0 * u(rng);
        const double th = angle(rng);
        const Eigen::Vector2d x(z * std::cos(th), z * std::sin(th));
        const LawBranch br = detect_branch(x.norm(), s);
        const auto d = traction_tangent(make_opening(x(0), x(1), 1.0), s, b, &a, br);
        const double h = 1e-6 * z;
        Eigen::Matrix2d fd;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d p = x;
            Eigen::Vector2d m = x;
            p(k) += h;
            m(k) -= h;
            const auto tp = equivalent_traction(make_opening(p(0), p(1), 1.0), s, b, &a, br);
            const auto tm = equivalent_traction(make_opening(m(0), m(1), 1.0), s, b, &a, br);
            fd(0, k) = (tp.normal - tm.normal) / (2.0 * h);
            fd(1, k) = (tp.tangential - tm.tangential) / (2.0 * h);
        }
        REQUIRE((d - fd).norm() <= 1e-5 * fd.norm());
    }
}

TEST_CASE("commit keeps the largest opening and releases by threshold")
{
    const auto b = concrete();
    const auto a = agent();
    auto s = CohesiveState::virgin(b);
    s = commit_state(make_opening(1e-5, 0.0, 1.0), s, 1.0, b, &a);
    CHECK(s.max_opening == doctest::Approx(1e-5));
    CHECK_FALSE(s.released);
    s = commit_state(make_opening(5e-6, 0.0, 1.0), s, 2.0, b, &a);
    CHECK(s.max_opening == doctest::Approx(1e-5));
    CHECK(s.time == 2.0);
    // T_mx = 0.5 f_t at zeta = ln 2 G_f / f_t
    const double z_half = std::log(2.0) * 100.0 / 3e6;
    s = commit_state(make_opening(1.01 * z_half, 0.0, 1.0), s, 3.0, b, &a);
    CHECK(s.released);
    CHECK(s.release_time == 3.0);
    CHECK(s.contact == doctest::Approx(oracle::contact(s.max_traction, 3e6, 1.5e6, 2.0)));

    auto e = CohesiveState::virgin(b);
    e = commit_state(make_opening(2.0 * z_half, 0.0, 1.0), e, 3.0, b, &a, ReleaseMode::explicit_);
    CHECK_FALSE(e.released);
    e = release_agent(e, 5.0, b, a);
    CHECK(e.released);
    CHECK(e.release_time == 5.0);
    const auto again = release_agent(e, 9.0, b, a);
    CHECK(again.release_time == 5.0);
}

TEST_CASE("release is refused above the threshold")
{
    const auto b = concrete();
    const auto a = agent();
    const auto s = opened(b, 1e-6);
    CHECK_FALSE(release_agent(s, 1.0, b, a).released);
    CHECK_FALSE(release_agent(CohesiveState::virgin(b), 1.0, b, a).released);
}

TEST_CASE("closed strength")
{
    const auto b = concrete();
    const auto a = agent();
    CHECK(closed_strength(CohesiveState::virgin(b), b, &a) == 3e6);
    auto s = release_agent(opened(b, 1e-4), 0.0, b, a);
    s.time = 24.0;
    const double expect = s.contact * oracle::maturity(24.0, 0.096) * 0.7e6;
    CHECK(closed_strength(s, b, &a) == doctest::Approx(expect));
    CHECK(closed_strength(s, b, nullptr) == 0.0);
}

TEST_CASE("parameter validation")
{
    auto b = concrete();
    CHECK_NOTHROW(b.validate());
    b.poisson_ratio = 0.5;
    CHECK_THROWS_AS(b.validate(), DomainError);
    b = concrete();
    b.fracture_energy = 0.0;
    CHECK_THROWS_AS(b.validate(), DomainError);
    auto a = agent();
    CHECK_NOTHROW(a.validate(concrete()));
    a.release_threshold = 4e6;
    CHECK_THROWS_AS(a.validate(concrete()), DomainError);
    a = agent();
    a.healing_rate = 0.0;
    CHECK_THROWS_AS(a.validate(concrete()), DomainError);
}
