// Serial reference against the OpenMP assembly on a cracked bending state.

#include "sdaheal/assembly.hpp"
#include "sdaheal/scenario.hpp"
#include "sdaheal/solver.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

using namespace sdaheal;

namespace {

struct Fixture {
    Scenario scenario;
    GlobalState state;
};

Fixture& cracked(const std::string& refinement)
{
    static std::map<std::string, Fixture> cache;
    auto it = cache.find(refinement);
    if (it != cache.end()) return it->second;
    ParseOptions o;
    o.overrides.push_back(parse_override("model.mesh=builtin:bending:" + refinement));
    Fixture f{build_scenario(read_scenario(std::string(SDAHEAL_SOURCE_DIR) + "/scenarios/bending.scn", o)), {}};
    f.state = GlobalState::initial(f.scenario.model);
    prepare_crack(f.scenario.model, f.state);
    NewtonSolver newton(f.scenario.model);
    const int p = f.scenario.model.pattern_index("force");
    for (int k = 0; k < 20; ++k) {
        if (!newton.solve(f.state, {ControlMode::cmod, p, -1, 5e-6}, 0.0).converged)
            throw std::runtime_error("bench state did not converge");
        commit_cohesive(f.scenario.model, f.state, newton.assembly(), 0.0);
    }
    return cache.emplace(refinement, std::move(f)).first->second;
}

const char* level(int i)
{
    static const char* names[] = {"coarse", "medium", "fine"};
    return names[i];
}

void serial(benchmark::State& st)
{
    auto& f = cracked(level(static_cast<int>(st.range(0))));
    Assembler a(f.scenario.model);
    AssemblyResult out;
    for (auto _ : st) {
        a.assemble_serial(f.state, 0.0, out);
        benchmark::DoNotOptimize(out.internal.data());
    }
    st.counters["elements"] = static_cast<double>(f.scenario.model.mesh.element_count());
}

void parallel(benchmark::State& st)
{
    auto& f = cracked(level(static_cast<int>(st.range(0))));
    Assembler a(f.scenario.model);
    AssemblyResult out;
    for (auto _ : st) {
        a.assemble_parallel(f.state, 0.0, out);
        benchmark::DoNotOptimize(out.internal.data());
    }
    st.counters["elements"] = static_cast<double>(f.scenario.model.mesh.element_count());
}

} // namespace

BENCHMARK(serial)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(parallel)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
