#include "support.hpp"

#include "sdaheal/back_analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sdaheal;

namespace {

MeasuredCurve ramp(double offset = 0.0)
{
    MeasuredCurve m;
    for (int i = 0; i <= 10; ++i) {
        m.cmod_mm.push_back(0.1 * i);
        m.force_n.push_back(1000.0 * i + offset);
    }
    return m;
}

// Smooth bowl in log space with its minimum at (fh0, gh0).
double bowl(double fh, double gh, double fh0, double gh0)
{
    const double a = std::log(fh / fh0);
    const double b = std::log(gh / gh0);
    return a * a + 0.5 * b * b + 0.3 * a * b;
}

} // namespace

TEST_CASE("rms misfit")
{
    const auto m = ramp();
    SimulatedCurve s;
    s.cmod_mm = {0.0, 1.0};
    s.force_n = {0.0, 10000.0};
    CHECK(rms_misfit(s, m) == doctest::Approx(0.0).scale(1.0));
    s.force_n = {250.0, 10250.0};
    CHECK(rms_misfit(s, m) == doctest::Approx(250.0));
    // only the samples inside the simulated range count
    s.cmod_mm = {0.0, 0.5};
    s.force_n = {100.0, 5100.0};
    CHECK(rms_misfit(s, m) == doctest::Approx(100.0));
    s.cmod_mm = {2.0, 3.0};
    CHECK_THROWS(rms_misfit(s, m));
}

TEST_CASE("measured curve validation")
{
    auto m = ramp();
    CHECK_NOTHROW(m.validate());
    CHECK(m.peak() == 10000.0);
    auto short_curve = m;
    short_curve.cmod_mm.resize(4);
    short_curve.force_n.resize(4);
    CHECK_THROWS(short_curve.validate());
    auto unsorted = m;
    unsorted.cmod_mm[3] = unsorted.cmod_mm[2];
    CHECK_THROWS(unsorted.validate());

    const auto path = (std::filesystem::temp_directory_path() / "sdaheal_measured.csv").string();
    {
        std::ofstream out(path);
        out.precision(17);
        out << "cmod_mm,force_N\n";
        for (std::size_t i = 0; i < m.cmod_mm.size(); ++i) out << m.cmod_mm[i] << ',' << m.force_n[i] << '\n';
    }
    const auto r = read_measured(path);
    CHECK(r.cmod_mm == m.cmod_mm);
    CHECK(r.force_n == m.force_n);
    std::filesystem::remove(path);
}

TEST_CASE("fit spec validation")
{
    FitSpec s;
    CHECK_NOTHROW(s.validate());
    s.fh_lower = 4.0;
    CHECK_THROWS(s.validate());
    s = {};
    s.fit_fh = false;
    s.fit_gh = false;
    CHECK_THROWS(s.validate());
    s = {};
    s.grid = 0;
    CHECK_THROWS(s.validate());
}

TEST_CASE("calibration recovers the minimum of a smooth objective")
{
    int calls = 0;
    const Objective f = [&](double fh, double gh, bool*) {
        ++calls;
        return bowl(fh, gh, 0.9, 63.0);
    };
    const FitSpec spec;
    const auto r = calibrate(spec, f);
    CHECK(r.fh == doctest::Approx(0.9).epsilon(0.01));
    CHECK(r.gh == doctest::Approx(63.0).epsilon(0.01));
    CHECK(r.evaluations <= 150);
    CHECK(r.evaluations == calls);
    CHECK(static_cast<int>(r.log.size()) == r.evaluations);
    CHECK(r.log.front().stage == "grid");

    const auto again = calibrate(spec, f);
    CHECK(again.fh == r.fh);
    CHECK(again.gh == r.gh);
    CHECK(again.evaluations == r.evaluations);
}

TEST_CASE("grid only and single parameter fits")
{
    const Objective f = [](double fh, double gh, bool*) { return bowl(fh, gh, 0.5, 20.0); };
    FitSpec grid_only;
    grid_only.budget = 0;
    const auto g = calibrate(grid_only, f);
    CHECK(g.evaluations == 64);
    for (const auto& e : g.log) CHECK(e.misfit >= g.misfit);

    FitSpec one;
    one.fit_gh = false;
    one.fixed_gh = 20.0;
    const auto r = calibrate(one, f);
    CHECK(r.gh == 20.0);
    CHECK(r.fh == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.evaluations <= 8 + one.budget);
}

TEST_CASE("failed evaluations are penalised and logged")
{
    const Objective f = [](double fh, double gh, bool* failed) {
        if (fh > 1.0) {
            if (failed) *failed = true;
            return 1e6;
        }
        return bowl(fh, gh, 0.6, 30.0);
    };
    const auto r = calibrate(FitSpec{}, f);
    CHECK(r.fh <= 1.0);
    CHECK(r.fh == doctest::Approx(0.6).epsilon(0.02));
    bool any_failed = false;
    for (const auto& e : r.log) any_failed = any_failed || e.failed;
    CHECK(any_failed);
}

TEST_CASE("reload objective vanishes at the parameters that produced the curve")
{
    std::vector<Scenario> ensemble;
    ensemble.push_back(testing::bundled("bending"));
    ReloadObjective probe(ensemble, ramp());
    const auto sim = probe.simulate(0, 0.7, 42.0);
    REQUIRE(sim.complete);
    REQUIRE(sim.cmod_mm.size() >= 5);
    MeasuredCurve m;
    m.cmod_mm = sim.cmod_mm;
    m.force_n = sim.force_n;

    ReloadObjective objective(ensemble, m);
    CHECK(objective(0.7, 42.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(objective(1.0, 42.0) > 1.0);
    CHECK(objective(0.7, 80.0) > 0.0);
    CHECK(objective.runs() == 3);
    CHECK(objective.penalty() == doctest::Approx(10.0 * m.peak()));
}
