#include "sdaheal/back_analysis.hpp"
#include "sdaheal/output.hpp"
#include "sdaheal/scenario.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace sdaheal;

namespace {

enum Exit { ok = 0, usage = 1, input = 2, solver = 3 };

struct Common {
    std::vector<std::string> overrides;
    std::vector<std::string> variants;
    bool strict = false;
    int threads = 0;
    bool verbose = false;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--override", c.overrides, "section.key=value, repeatable");
    app->add_option("--variant", c.variants, "named variant from the scenario file, repeatable");
    app->add_flag("--strict", c.strict, "unknown keys are errors");
    app->add_option("--threads", c.threads, "assembly threads")->check(CLI::NonNegativeNumber);
    app->add_flag("--verbose", c.verbose, "print Newton iterations");
}

ParseOptions parse_options(const Common& c)
{
    ParseOptions o;
    o.strict = c.strict;
    o.variants = c.variants;
    for (const auto& s : c.overrides) o.overrides.push_back(parse_override(s));
    return o;
}

ScenarioFile load(const std::string& path, const Common& c)
{
    ScenarioFile f = read_scenario(path, parse_options(c));
    for (const auto& w : f.warnings) std::cerr << "warning: " << w << '\n';
    return f;
}

int run(const std::string& path, const std::string& dir, const Common& c)
{
    Scenario sc = build_scenario(load(path, c));
    fs::create_directories(dir);
    HistoryWriter history((fs::path(dir) / "history.csv").string());
    GlobalState state = GlobalState::initial(sc.model);
    RunOptions opts;
    opts.newton.verbose = c.verbose;
    opts.on_row = [&](const HistoryRow& r) { history.write(r); };
    opts.on_phase_end = [&](int, const GlobalState&) { history.sync(); };
    const RunHistory h = run_program(sc.model, sc.program, state, sc.output, opts);
    history.sync();

    write_crack_path((fs::path(dir) / "crack_path.csv").string(), state.path);
    NewtonSolver newton(sc.model);
    const AssemblyResult& a = newton.evaluate(state, state.time);
    write_vtk((fs::path(dir) / "fields_final.vtk").string(), sc.model, state, a);

    std::printf("steps %d, rows %zu, cuts %d, segments %zu, releases %zu, max balance error "
                "%.3g ft, max activation excess %.3g\n",
                state.step, h.rows.size(), h.step_cuts, state.path.segments.size(),
                h.releases.size(), h.max_balance_error, h.max_activation_excess);
    if (!h.complete) {
        std::cerr << "solver failure: " << h.failure << '\n';
        return solver;
    }
    return ok;
}

struct FitArgs {
    std::string measured;
    std::vector<std::string> ensemble;
    std::vector<double> fh_bounds{0.05, 3.0};
    std::vector<double> gh_bounds{5.0, 200.0};
    std::optional<double> fix_fh;
    std::optional<double> fix_gh;
    int grid = 8;
    int budget = 86;
    int reload_phase = -1;
};

int fit(const std::string& path, const std::string& dir, const Common& c, const FitArgs& a)
{
    std::vector<Scenario> ensemble;
    ensemble.push_back(build_scenario(load(path, c)));
    for (const auto& v : a.ensemble) {
        Common cv = c;
        cv.variants.push_back(v);
        ensemble.push_back(build_scenario(load(path, cv)));
    }
    MeasuredCurve measured = read_measured(a.measured);
    FitSpec spec;
    spec.fh_lower = a.fh_bounds[0];
    spec.fh_upper = a.fh_bounds[1];
    spec.gh_lower = a.gh_bounds[0];
    spec.gh_upper = a.gh_bounds[1];
    if (a.fix_fh) {
        spec.fit_fh = false;
        spec.fixed_fh = *a.fix_fh;
    }
    if (a.fix_gh) {
        spec.fit_gh = false;
        spec.fixed_gh = *a.fix_gh;
    }
    spec.grid = a.grid;
    spec.budget = a.budget;
    spec.reload_phase = a.reload_phase;
    spec.validate();

    ReloadObjective objective(std::move(ensemble), measured, a.reload_phase);
    const FitResult r = calibrate(spec, [&](double fh, double gh, bool* failed) {
        const double m = objective(fh, gh, failed);
        std::fprintf(stderr, "fh %.6g MPa  Gh %.6g N/m  misfit %.6g N\n", fh, gh, m);
        return m;
    });

    fs::create_directories(dir);
    {
        std::ofstream log(fs::path(dir) / "fit_log.csv");
        log << "index,stage,fh_MPa,Gh_N_per_m,misfit_N,failed\n";
        char buf[160];
        for (const auto& e : r.log) {
            std::snprintf(buf, sizeof buf, "%d,%s,%.12g,%.12g,%.12g,%d\n", e.index, e.stage.c_str(),
                          e.fh, e.gh, e.misfit, e.failed ? 1 : 0);
            log << buf;
        }
    }
    std::ofstream rep(fs::path(dir) / "fit_report.txt");
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "fh_inf = %.6g MPa\nGh_inf = %.6g N/m\nmisfit = %.6g N (peak %.6g N)\n"
                  "evaluations = %d\nconverged = %s\n",
                  r.fh, r.gh, r.misfit, measured.peak(), r.evaluations,
                  r.converged ? "yes" : "no (budget exhausted)");
    rep << buf;
    std::cout << buf;
    return ok;
}

int mesh(const std::string& benchmark, const std::string& refinement, const std::string& out)
{
    const Mesh m = benchmark_mesh(benchmark, parse_refinement(refinement));
    if (out.empty() || out == "-") write_mesh(std::cout, m);
    else write_mesh(out, m);
    std::fprintf(stderr, "%zu nodes, %zu elements\n", m.node_count(), m.element_count());
    return ok;
}

std::vector<std::pair<double, double>> force_cmod(const std::string& path)
{
    const auto cols = read_csv(path);
    const auto c = cols.find("cmod_mm");
    const auto f = cols.find("reaction_N");
    if (c == cols.end() || f == cols.end())
        throw std::runtime_error(path + ": not a history file");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < c->second.size(); ++i) out.emplace_back(c->second[i], f->second[i]);
    return out;
}

int report(const std::string& healing, const std::string& baseline, const std::string& dir)
{
    const auto h = force_cmod(healing);
    const auto b = force_cmod(baseline);
    fs::create_directories(dir);
    std::ofstream csv(fs::path(dir) / "comparison.csv");
    csv << "curve,cmod_mm,reaction_N\n";
    char buf[120];
    double peak_h = 0.0;
    double peak_b = 0.0;
    for (const auto& [x, y] : h) {
        std::snprintf(buf, sizeof buf, "healing,%.12g,%.12g\n", x, y);
        csv << buf;
        peak_h = std::max(peak_h, y);
    }
    for (const auto& [x, y] : b) {
        std::snprintf(buf, sizeof buf, "baseline,%.12g,%.12g\n", x, y);
        csv << buf;
        peak_b = std::max(peak_b, y);
    }
    std::ofstream gp(fs::path(dir) / "comparison.gp");
    gp << "set datafile separator ','\nset xlabel 'CMOD [mm]'\nset ylabel 'Force [N]'\n"
       << "set key top right\n"
       << "plot '" << fs::absolute(healing).string()
       << "' using 5:4 skip 1 with lines title 'healing', \\\n     '"
       << fs::absolute(baseline).string() << "' using 5:4 skip 1 with lines title 'baseline'\n";
    std::printf("peak healing %.6g N, peak baseline %.6g N, ratio %.4f\n", peak_h, peak_b,
                peak_b > 0.0 ? peak_h / peak_b : 0.0);
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-healing concrete fracture simulator"};
    app.require_subcommand(1);

    Common common;
    std::string scenario;
    std::string out = "out";

    auto* run_cmd = app.add_subcommand("run", "run a scenario");
    run_cmd->add_option("scenario", scenario, "scenario file")->required();
    run_cmd->add_option("-o,--output", out, "output directory");
    add_common(run_cmd, common);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "calibrate fh_inf and Gh_inf against a reload curve");
    fit_cmd->add_option("scenario", scenario, "scenario file")->required();
    fit_cmd->add_option("--measured", fa.measured, "CSV of CMOD mm, force N")->required();
    fit_cmd->add_option("-o,--output", out, "output directory");
    fit_cmd->add_option("--ensemble", fa.ensemble, "extra variants averaged into the misfit");
    fit_cmd->add_option("--fh-bounds", fa.fh_bounds, "MPa")->expected(2);
    fit_cmd->add_option("--gh-bounds", fa.gh_bounds, "N/m")->expected(2);
    fit_cmd->add_option("--fix-fh", fa.fix_fh, "hold fh_inf (MPa)");
    fit_cmd->add_option("--fix-gh", fa.fix_gh, "hold Gh_inf (N/m)");
    fit_cmd->add_option("--grid", fa.grid, "grid points per parameter");
    fit_cmd->add_option("--budget", fa.budget, "simplex evaluations after the grid");
    fit_cmd->add_option("--reload-phase", fa.reload_phase, "program phase fitted (default last)");
    add_common(fit_cmd, common);

    std::string benchmark;
    std::string refinement = "coarse";
    std::string mesh_out;
    auto* mesh_cmd = app.add_subcommand("mesh", "write a benchmark mesh");
    mesh_cmd->add_option("benchmark", benchmark, "bending, tension_shear or dam")->required();
    mesh_cmd->add_option("-r,--refinement", refinement, "coarse, medium or fine");
    mesh_cmd->add_option("-o,--output", mesh_out, "mesh file (default stdout)");

    std::string healing_csv;
    std::string baseline_csv;
    auto* report_cmd = app.add_subcommand("report", "compare healing and baseline histories");
    report_cmd->add_option("healing", healing_csv, "history.csv with healing")->required();
    report_cmd->add_option("baseline", baseline_csv, "history.csv without healing")->required();
    report_cmd->add_option("-o,--output", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }
    if (common.threads > 0) omp_set_num_threads(common.threads);

    try {
        if (*run_cmd) return run(scenario, out, common);
        if (*fit_cmd) return fit(scenario, out, common, fa);
        if (*mesh_cmd) return mesh(benchmark, refinement, mesh_out);
        if (*report_cmd) return report(healing_csv, baseline_csv, out);
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return solver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input;
    }
    return usage;
}
