/** @file back_analysis.cpp */

#include "sdaheal/back_analysis.hpp"

#include "sdaheal/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdaheal {

void MeasuredCurve::validate() const
{
    if (cmod_mm.size() != force_n.size()) throw std::invalid_argument("measured curve: column sizes differ");
    if (cmod_mm.size() < 5) throw std::invalid_argument("measured curve needs at least 5 samples");
    for (std::size_t i = 1; i < cmod_mm.size(); ++i)
        if (!(cmod_mm[i] > cmod_mm[i - 1]))
            throw std::invalid_argument("measured CMOD must be strictly increasing");
    for (std::size_t i = 0; i < cmod_mm.size(); ++i)
        if (!std::isfinite(cmod_mm[i]) || !std::isfinite(force_n[i]))
            throw std::invalid_argument("measured curve has a non-finite sample");
}

double MeasuredCurve::peak() const
{
    double p = 0.0;
    for (double f : force_n) p = std::max(p, std::abs(f));
    return p;
}

MeasuredCurve read_measured(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measured curve " + path);
    MeasuredCurve c;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x = 0.0;
        double y = 0.0;
        std::string extra;
        if (!(ss >> x >> y) || (ss >> extra)) {
            if (first) {
                first = false;
                continue;
            }
            throw ParseError(path, lineno, "expected two numbers");
        }
        first = false;
        c.cmod_mm.push_back(x);
        c.force_n.push_back(y);
    }
    c.validate();
    return c;
}

void FitSpec::validate() const
{
    auto ordered = [](double lo, double hi) {
        return std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && lo < hi;
    };
    if (!ordered(fh_lower, fh_upper) || !ordered(gh_lower, gh_upper))
        throw std::invalid_argument("fit bounds must be finite, positive and ordered");
    if (!fit_fh && !fit_gh) throw std::invalid_argument("fit needs at least one free parameter");
    if (grid < 1 || budget < 0) throw std::invalid_argument("grid must be >= 1 and budget >= 0");
}

double rms_misfit(const SimulatedCurve& simulated, const MeasuredCurve& measured)
{
    std::vector<std::pair<double, double>> sim;
    for (std::size_t i = 0; i < simulated.cmod_mm.size(); ++i)
        sim.emplace_back(simulated.cmod_mm[i], simulated.force_n[i]);
    std::stable_sort(sim.begin(), sim.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sim.size() < 2) throw std::invalid_argument("simulated curve has fewer than two points");
    const double lo = std::max(sim.front().first, measured.cmod_mm.front());
    const double hi = std::min(sim.back().first, measured.cmod_mm.back());
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < measured.cmod_mm.size(); ++i) {
        const double x = measured.cmod_mm[i];
        if (x < lo || x > hi) continue;
        auto it = std::lower_bound(sim.begin(), sim.end(), x,
                                   [](const auto& p, double v) { return p.first < v; });
        double f = 0.0;
        if (it == sim.begin()) f = it->second;
        else if (it == sim.end()) f = sim.back().second;
        else {
            const auto& b = *it;
            const auto& a = *(it - 1);
            const double w = b.first > a.first ? (x - a.first) / (b.first - a.first) : 1.0;
            f = a.second + w * (b.second - a.second);
        }
        const double d = f - measured.force_n[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("simulated and measured CMOD ranges do not overlap");
    return std::sqrt(sum / n);
}

ReloadObjective::ReloadObjective(std::vector<Scenario> ensemble, MeasuredCurve measured,
                                 int reload_phase, RunOptions opts)
    : measured_(std::move(measured)), reload_phase_(reload_phase), opts_(std::move(opts))
{
    measured_.validate();
    if (ensemble.empty()) throw std::invalid_argument("back analysis needs a scenario");
    for (auto& s : ensemble) {
        if (!s.model.healing) throw std::invalid_argument("back analysis needs a healing block");
        const int n = static_cast<int>(s.program.phases.size());
        const int reload = reload_phase_ < 0 ? n - 1 : reload_phase_;
        if (reload < 0 || reload >= n) throw std::invalid_argument("reload phase out of range");
        members_.push_back({std::move(s), std::nullopt, std::nullopt});
    }
    opts_.initial_row = false;
    opts_.on_row = nullptr;
    opts_.on_phase_end = nullptr;
}

void ReloadObjective::prepare(Member& m)
{
    const int n = static_cast<int>(m.scenario.program.phases.size());
    const int reload = reload_phase_ < 0 ? n - 1 : reload_phase_;
    if (m.model || reload == 0) return;
    Model model = m.scenario.model;
    GlobalState state = GlobalState::initial(model);
    RunOptions o = opts_;
    o.last_phase = reload - 1;
    const RunHistory h = run_program(model, m.scenario.program, state, m.scenario.output, o);
    if (!h.complete) throw SolverFailure("history before the reload failed: " + h.failure);
    if (h.agent_loaded) return; // depends on the candidate, rerun every time
    m.model = std::move(model);
    m.state = std::move(state);
}

SimulatedCurve ReloadObjective::simulate(std::size_t member, double fh_mpa, double gh)
{
    Member& m = members_.at(member);
    prepare(m);
    const int n = static_cast<int>(m.scenario.program.phases.size());
    const int reload = reload_phase_ < 0 ? n - 1 : reload_phase_;
    Model model = m.model ? *m.model : m.scenario.model;
    GlobalState state = m.state ? *m.state : GlobalState::initial(model);
    model.healing->ultimate_strength = fh_mpa * 1e6;
    model.healing->ultimate_fracture_energy = gh;
    RunOptions o = opts_;
    o.first_phase = m.model ? reload : 0;
    o.last_phase = reload;
    ++runs_;
    const RunHistory h = run_program(model, m.scenario.program, state, m.scenario.output, o);
    SimulatedCurve c;
    c.complete = h.complete;
    for (const auto& row : h.rows)
        if (row.phase == reload) {
            c.cmod_mm.push_back(row.cmod * 1e3);
            c.force_n.push_back(row.reaction);
        }
    return c;
}

double ReloadObjective::operator()(double fh_mpa, double gh, bool* failed)
{
    double total = 0.0;
    bool bad = false;
    for (std::size_t k = 0; k < members_.size() && !bad; ++k) {
        SimulatedCurve c;
        try {
            c = simulate(k, fh_mpa, gh);
        } catch (const SolverFailure&) {
            bad = true;
            break;
        }
        if (!c.complete || c.cmod_mm.size() < 2) {
            bad = true;
            break;
        }
        total += rms_misfit(c, measured_);
    }
    if (failed) *failed = bad;
    return bad ? penalty() : total / static_cast<double>(members_.size());
}

namespace {

class Search {
public:
    Search(const FitSpec& spec, const Objective& objective, FitResult& result)
        : spec_(spec), objective_(objective), result_(result)
    {
        if (spec.fit_fh) free_.push_back(0);
        if (spec.fit_gh) free_.push_back(1);
        lower_ = {std::log(spec.fh_lower), std::log(spec.gh_lower)};
        upper_ = {std::log(spec.fh_upper), std::log(spec.gh_upper)};
    }

    std::size_t dims() const { return free_.size(); }

    double spacing(std::size_t d) const
    {
        const int k = free_[d];
        return (upper_[k] - lower_[k]) / std::max(1, spec_.grid - 1);
    }

    std::vector<double> clamp(std::vector<double> x) const
    {
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = std::clamp(x[d], lower_[free_[d]], upper_[free_[d]]);
        return x;
    }

    std::pair<double, double> params(const std::vector<double>& x) const
    {
        double fh = spec_.fixed_fh;
        double gh = spec_.fixed_gh;
        for (std::size_t d = 0; d < x.size(); ++d)
            (free_[d] == 0 ? fh : gh) = std::exp(x[d]);
        return {fh, gh};
    }

    double evaluate(const std::vector<double>& x, const std::string& stage, bool counts = true)
    {
        const auto [fh, gh] = params(clamp(x));
        const auto key = std::make_pair(fh, gh);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
        bool failed = false;
        const double misfit = objective_(fh, gh, &failed);
        Evaluation e;
        e.index = static_cast<int>(result_.log.size());
        e.stage = stage;
        e.fh = fh;
        e.gh = gh;
        e.misfit = misfit;
        e.failed = failed;
        result_.log.push_back(e);
        cache_[key] = misfit;
        if (counts) ++spent_;
        if (misfit < result_.misfit || result_.log.size() == 1) {
            result_.misfit = misfit;
            result_.fh = fh;
            result_.gh = gh;
            best_ = clamp(x);
        }
        return misfit;
    }

    void grid()
    {
        const int n = spec_.grid;
        auto level = [&](int k, int i) {
            return n == 1 ? 0.5 * (lower_[k] + upper_[k])
                          : lower_[k] + (upper_[k] - lower_[k]) * i / (n - 1);
        };
        if (dims() == 1) {
            for (int i = 0; i < n; ++i) evaluate({level(free_[0], i)}, "grid", false);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) evaluate({level(0, i), level(1, j)}, "grid", false);
        }
    }

    bool exhausted() const { return spent_ >= spec_.budget; }

    // Returns true when the simplex contracted below the tolerance.
    bool simplex(const std::vector<double>& start, double scale, const std::string& stage)
    {
        const std::size_t n = dims();
        std::vector<std::vector<double>> v{clamp(start)};
        for (std::size_t d = 0; d < n; ++d) {
            auto p = v[0];
            const double h = scale * spacing(d);
            p[d] = p[d] + h <= upper_[free_[d]] ? p[d] + h : p[d] - h;
            v.push_back(clamp(p));
        }
        std::vector<double> f;
        for (const auto& p : v) {
            if (exhausted()) return false;
            f.push_back(evaluate(p, stage));
        }
        const int guard = 20 * spec_.budget + 200;
        for (int iter = 0; iter < guard; ++iter) {
            std::vector<std::size_t> order(v.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
            std::vector<std::vector<double>> sv;
            std::vector<double> sf;
            for (auto k : order) {
                sv.push_back(v[k]);
                sf.push_back(f[k]);
            }
            v = std::move(sv);
            f = std::move(sf);

            double size = 0.0;
            for (std::size_t k = 1; k < v.size(); ++k)
                for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(v[k][d] - v[0][d]));
            if (size < spec_.tolerance) return true;
            if (exhausted()) return false;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t d = 0; d < n; ++d) centroid[d] += v[k][d] / static_cast<double>(n);
            auto along = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (v[n][d] - centroid[d]);
                return clamp(p);
            };
            const auto xr = along(-1.0);
            const double fr = evaluate(xr, stage);
            if (fr < f[0]) {
                if (exhausted()) { v[n] = xr; f[n] = fr; continue; }
                const auto xe = along(-2.0);
                const double fe = evaluate(xe, stage);
                if (fe < fr) { v[n] = xe; f[n] = fe; }
                else { v[n] = xr; f[n] = fr; }
            } else if (fr < f[n - 1]) {
                v[n] = xr;
                f[n] = fr;
            } else {
                if (exhausted()) return false;
                const bool outside = fr < f[n];
                const auto xc = along(outside ? -0.5 : 0.5);
                const double fc = evaluate(xc, stage);
                if (fc < (outside ? fr : f[n])) {
                    v[n] = xc;
                    f[n] = fc;
                } else {
                    for (std::size_t k = 1; k <= n; ++k) {
                        if (exhausted()) return false;
                        for (std::size_t d = 0; d < n; ++d) v[k][d] = v[0][d] + 0.5 * (v[k][d] - v[0][d]);
                        v[k] = clamp(v[k]);
                        f[k] = evaluate(v[k], stage);
                    }
                }
            }
        }
        return false;
    }

    const std::vector<double>& best() const { return best_; }
    int spent() const { return spent_; }

private:
    const FitSpec& spec_;
    const Objective& objective_;
    FitResult& result_;
    std::vector<int> free_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::map<std::pair<double, double>, double> cache_;
    std::vector<double> best_;
    int spent_ = 0;
};

} // namespace

FitResult calibrate(const FitSpec& spec, const Objective& objective)
{
    spec.validate();
    FitResult result;
    Search search(spec, objective, result);
    search.grid();
    if (spec.budget > 0) {
        const bool first = search.simplex(search.best(), 1.0, "simplex");
        if (first || !search.exhausted()) {
            auto start = search.best();
            for (std::size_t d = 0; d < start.size(); ++d)
                start[d] += (d % 2 == 0 ? 0.25 : -0.25) * search.spacing(d);
            result.converged = search.simplex(start, 0.5, "restart");
        }
    }
    result.evaluations = static_cast<int>(result.log.size());
    return result;
}

} // namespace sdaheal
