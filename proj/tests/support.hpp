/** @file support.hpp */
#pragma once

#include "sdaheal/scenario.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::string scenario_path(const std::string& name)
{
    return std::string(SDAHEAL_SOURCE_DIR) + "/scenarios/" + name + ".scn";
}

inline std::string data_path(const std::string& name)
{
    return std::string(SDAHEAL_SOURCE_DIR) + "/tests/data/" + name;
}

inline sdaheal::Scenario bundled(const std::string& name, std::vector<std::string> variants = {},
                                 std::vector<std::string> overrides = {})
{
    sdaheal::ParseOptions o;
    o.variants = std::move(variants);
    for (const auto& s : overrides) o.overrides.push_back(sdaheal::parse_override(s));
    return sdaheal::build_scenario(sdaheal::read_scenario(scenario_path(name), o));
}

// One square element of side h with a horizontal crack at mid-height, pulled
// by a rigid top platen. `program` is appended verbatim.
inline sdaheal::Scenario coupon(double h, bool healing, const std::string& program)
{
    const std::string s = std::to_string(h);
    const std::string half = std::to_string(0.5 * h);
    std::string text = "[model]\nthickness = 0.1\nplane = stress\n"
                       "[material]\nE = 30000\nnu = 0\nft = 3\nGf = 100\nbeta = 1\n"
                       "[crack]\nmode = straight\nseed = 0 " + half + "\ndirection = 1 0\n"
                       "[supports]\nfix = 0 0 " + s + " 0 y\nfix_point = 0 0 xy\n"
                       "[tie.top]\nbox = 0 " + s + " " + s + " " + s + "\ncomponent = y\nfixed = true\n"
                       "[output]\nforce = dof:top\n";
    if (healing)
        text += "[healing]\nfh = 0.7\nGh = 42\nAh = 0.096\nT0_ratio = 0.5\nb = 2.0\n"
                "release = explicit\n";
    text += program;
    std::istringstream in(text);
    return sdaheal::build_scenario(sdaheal::read_scenario(in, "coupon"),
                                   sdaheal::rectangle_mesh(h, h, 1, 1));
}

struct Run {
    sdaheal::Scenario scenario;
    sdaheal::GlobalState state;
    sdaheal::RunHistory history;
};

inline Run run(sdaheal::Scenario sc, sdaheal::RunOptions opts = {})
{
    Run r{std::move(sc), {}, {}};
    r.state = sdaheal::GlobalState::initial(r.scenario.model);
    r.history = sdaheal::run_program(r.scenario.model, r.scenario.program, r.state,
                                     r.scenario.output, opts);
    return r;
}

} // namespace testing
