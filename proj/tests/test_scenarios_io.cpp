#include "support.hpp"

#include "sdaheal/output.hpp"
#include "sdaheal/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sdaheal;

namespace {

std::string temp_file(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("sdaheal_" + name)).string();
}

ScenarioFile parse(const std::string& text, bool strict = false)
{
    std::istringstream in(text);
    ParseOptions o;
    o.strict = strict;
    return read_scenario(in, "inline", o);
}

} // namespace

TEST_CASE("bundled scenarios convert to SI")
{
    const auto bend = testing::bundled("bending");
    const auto& m = bend.model;
    CHECK(m.bulk.young_modulus == doctest::Approx(30e9));
    CHECK(m.bulk.tensile_strength == doctest::Approx(3e6));
    CHECK(m.bulk.fracture_energy == 100.0);
    REQUIRE(m.healing);
    CHECK(m.healing->ultimate_strength == doctest::Approx(0.7e6));
    CHECK(m.healing->ultimate_fracture_energy == 42.0);
    CHECK(m.healing->release_threshold == doctest::Approx(1.5e6));
    CHECK(m.release_mode == ReleaseMode::explicit_);
    CHECK(m.mesh.element_count() == 206);
    REQUIRE(bend.program.phases.size() == 4);
    CHECK(bend.program.phases[0].mode == ControlMode::cmod);
    CHECK(*bend.program.phases[0].until_cmod == doctest::Approx(0.3e-3));
    CHECK(bend.program.phases[0].increment == doctest::Approx(5e-6));
    CHECK(bend.program.phases[1].release_at_end);
    CHECK(bend.program.phases[2].mode == ControlMode::rest);
    CHECK(bend.program.phases[2].step_time == 24.0);

    const auto dam = testing::bundled("dam");
    REQUIRE(dam.model.healing);
    CHECK(dam.model.healing->release_threshold == doctest::Approx(0.9 * 3.6e6));
    CHECK(dam.model.healing->contact_exponent == 3.0);
    CHECK(dam.model.release_mode == ReleaseMode::threshold);
    CHECK(dam.program.phases[1].step_time == 7.2);
    CHECK(testing::bundled("dam", {"dt30"}).program.phases[1].step_time == 3.0);
    CHECK_FALSE(testing::bundled("dam", {"nohealing"}).model.healing);
    CHECK(testing::bundled("bending", {"medium"}).model.mesh.element_count() == 448);
}

TEST_CASE("overrides beat variants")
{
    const auto sc = testing::bundled("dam", {"dt30"}, {"program.2.step_time=1.5", "material.ft = 4"});
    CHECK(sc.program.phases[1].step_time == 1.5);
    CHECK(sc.model.bulk.tensile_strength == doctest::Approx(4e6));
    CHECK_THROWS(parse_override("no_equals"));
    CHECK_THROWS(parse_override("nodot=1"));
    const auto kv = parse_override("crack.mode=tracked");
    CHECK(kv.first == "crack.mode");
    CHECK(kv.second == "tracked");
    ParseOptions o;
    o.variants = {"missing"};
    CHECK_THROWS(read_scenario(testing::scenario_path("bending"), o));
}

TEST_CASE("scenario files round trip")
{
    for (const char* name : {"bending", "dam", "tension_shear"}) {
        const auto a = read_scenario(testing::scenario_path(name));
        std::stringstream ss;
        write_scenario(ss, a);
        auto b = read_scenario(ss, a.source_dir + "/x.scn");
        b.source_dir = a.source_dir;
        CHECK(b == a);
    }
}

TEST_CASE("unknown keys warn, or fail in strict mode")
{
    const std::string text = "[material]\nE = 30000\ncolour = grey\n";
    const auto s = parse(text);
    REQUIRE(s.warnings.size() == 1);
    CHECK(s.warnings[0].find(":3:") != std::string::npos);
    try {
        parse(text, true);
        FAIL("strict parse accepted an unknown key");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("malformed values carry the line")
{
    auto line_of = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("[material]\nE = abc\n") == 2);
    CHECK(line_of("[crack]\n\nmode = zigzag\n") == 3);
    CHECK(line_of("[supports]\nfix = 0 0 1\n") == 2);
    CHECK(line_of("[program.1]\nmode = sideways\n") == 2);
    CHECK(line_of("E = 3\n") == 1);
}

TEST_CASE("inconsistent scenarios are rejected when built")
{
    auto text = std::string("[model]\nmesh = builtin:bending:coarse\n[material]\nE = 30000\nnu = 0.2\n"
                            "ft = 3\nGf = 100\n[crack]\nmode = straight\nseed = 0.275 0.025\n"
                            "[program.1]\nmode = force\nload = nowhere\nincrement = 1\nsteps = 1\n");
    CHECK_THROWS(build_scenario(parse(text)));
}

TEST_CASE("history csv")
{
    const std::string path = temp_file("history.csv");
    {
        HistoryWriter w(path);
        HistoryRow r;
        for (int i = 0; i < 3; ++i) {
            r.step = i;
            r.time = 7.2 * i;
            r.lambda = 100.0 * i;
            r.reaction = -50.0 * i;
            r.cmod = 1e-5 * i;
            r.control = 0.01 * i;
            w.write(r);
        }
    }
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == HistoryWriter::header());
    const auto cols = read_csv(path);
    REQUIRE(cols.at("step").size() == 3);
    CHECK(cols.at("time_h")[2] == doctest::Approx(14.4));
    CHECK(cols.at("reaction_N")[1] == doctest::Approx(-50.0));
    CHECK(cols.at("cmod_mm")[2] == doctest::Approx(0.02));
    std::filesystem::remove(path);
}

TEST_CASE("vtk and crack path files")
{
    auto r = testing::run(testing::bundled("bending", {}, {"program.1.until_cmod=0.05"}),
                          {.last_phase = 0});
    REQUIRE(r.history.complete);
    NewtonSolver newton(r.scenario.model);
    const auto& a = newton.evaluate(r.state, r.state.time);
    const std::string vtk = temp_file("state.vtk");
    write_vtk(vtk, r.scenario.model, r.state, a);
    std::ifstream in(vtk);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("# vtk DataFile", 0) == 0);
    std::stringstream body;
    body << in.rdbuf();
    CHECK(body.str().find("CELLS " + std::to_string(r.scenario.model.mesh.element_count())) !=
          std::string::npos);
    std::filesystem::remove(vtk);

    const std::string csv = temp_file("path.csv");
    write_crack_path(csv, r.state.path);
    const auto cols = read_csv(csv);
    CHECK(cols.at("x_m").size() == r.state.path.segments.size() + 1);
    CHECK(cols.at("y_m").back() == doctest::Approx(0.15));
    std::filesystem::remove(csv);
}
