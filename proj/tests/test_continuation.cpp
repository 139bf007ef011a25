#include "support.hpp"

#include "sdaheal/continuation.hpp"

#include <doctest.h>

#include <cmath>

using namespace sdaheal;

TEST_CASE("explicit release times from recorded envelopes")
{
    // segment 0 exists from step 1, segment 1 from step 3
    const std::vector<int> created{1, 3};
    const std::vector<std::vector<double>> traces{
        {}, {3.0}, {2.0}, {1.4, 3.0}, {1.0, 2.9}, {0.8, 1.2}};
    const std::vector<double> times{0.0, 7.2, 14.4, 21.6, 28.8, 36.0};
    const auto r = assign_release_times(created, traces, times, 1.5);
    REQUIRE(r[0]);
    CHECK(*r[0] == 21.6);
    REQUIRE(r[1]);
    CHECK(*r[1] == 36.0);
    const auto none = assign_release_times(created, traces, times, 0.5);
    CHECK_FALSE(none[0]);
    CHECK_FALSE(none[1]);
}

TEST_CASE("threshold release on commit matches the explicit assignment")
{
    RunOptions o;
    o.record_traces = true;
    auto r = testing::run(testing::bundled("dam", {"dt72"}), o);
    REQUIRE(r.history.complete);
    const auto& model = r.scenario.model;
    const auto expected = assign_release_times(r.state.path.created_step, r.history.max_traction_trace,
                                               r.history.step_times,
                                               model.healing->release_threshold);
    int released = 0;
    for (std::size_t s = 0; s < r.state.cohesive.size(); ++s) {
        const auto& c = r.state.cohesive[s];
        CHECK(c.released == expected[s].has_value());
        if (c.released) {
            ++released;
            CHECK(c.release_time == *expected[s]);
        }
    }
    CHECK(released > 0);
    CHECK(r.history.releases.size() == static_cast<std::size_t>(released));
}

TEST_CASE("targets are met exactly and rest advances only the clock")
{
    auto r = testing::run(testing::bundled("bending"));
    REQUIRE(r.history.complete);
    const auto& rows = r.history.rows;
    double cmod_end1 = 0.0;
    double load_end2 = -1.0;
    int rest_rows = 0;
    double cmod_before_rest = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].phase == 0) cmod_end1 = rows[i].cmod;
        if (rows[i].phase == 1) load_end2 = rows[i].lambda;
        if (rows[i].phase == 2) {
            ++rest_rows;
            CHECK(rows[i].cmod == doctest::Approx(cmod_before_rest).epsilon(1e-9));
            CHECK(rows[i].time == doctest::Approx(rows[i - 1].time + 24.0));
        } else {
            cmod_before_rest = rows[i].cmod;
        }
    }
    CHECK(cmod_end1 == doctest::Approx(0.3e-3).epsilon(1e-9));
    CHECK(load_end2 == doctest::Approx(0.0).scale(1.0));
    CHECK(rest_rows == 1);
    CHECK(rows.back().cmod == doctest::Approx(0.5e-3).epsilon(1e-9));
    CHECK(r.history.releases.size() > 0);
    CHECK(r.history.max_balance_error <= 1e-8);
}

TEST_CASE("one-element tearing dissipates the fracture energy")
{
    auto sc = testing::coupon(0.02, false,
                              "[program.1]\nmode = displacement\ntie = top\nincrement = 0.002\n"
                              "until_displacement = 0.9\n");
    auto r = testing::run(std::move(sc));
    REQUIRE(r.history.complete);
    double work = 0.0;
    const auto& rows = r.history.rows;
    for (std::size_t i = 1; i < rows.size(); ++i)
        work += 0.5 * (rows[i].reaction + rows[i - 1].reaction) * (rows[i].control - rows[i - 1].control) * 1e-3;
    const double area = 0.02 * 0.1;
    CHECK(work / area == doctest::Approx(100.0).epsilon(0.01));
}

TEST_CASE("an unreachable force target returns a partial history")
{
    auto sc = testing::coupon(0.02, false,
                              "[program.1]\nmode = force\nload = pull\nincrement = 1000\n"
                              "until_load = 20000\n"
                              "[load.pull]\ntie = top\n");
    RunOptions o;
    o.max_cuts = 3;
    auto r = testing::run(std::move(sc), o);
    CHECK_FALSE(r.history.complete);
    CHECK_FALSE(r.history.failure.empty());
    // the peak is 3 MPa * 0.002 m2 = 6 kN
    CHECK(r.history.rows.back().lambda <= 6000.0);
    CHECK(r.history.rows.size() >= 6);
}

TEST_CASE("unloading to zero displacement returns along the secant")
{
    auto sc = testing::coupon(0.02, false,
                              "[program.1]\nmode = displacement\ntie = top\nincrement = 0.002\n"
                              "until_displacement = 0.04\n"
                              "[program.2]\nmode = displacement\ntie = top\nincrement = -0.002\n"
                              "until_displacement = 0.0\n");
    auto r = testing::run(std::move(sc));
    REQUIRE(r.history.complete);
    const auto& rows = r.history.rows;
    CHECK(std::abs(rows.back().reaction) <= 1e-6 * 6000.0);
    for (const auto& row : rows) CHECK(row.reaction >= -1e-6);
}
