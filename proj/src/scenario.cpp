/** @file scenario.cpp */

#include "sdaheal/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sdaheal {

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

class Reader {
public:
    Reader(std::string source, bool strict) : source_(std::move(source)), strict_(strict) {}

    [[noreturn]] void error(int line, const std::string& msg) const
    {
        throw ParseError(source_, line, msg);
    }

    void unknown(const Entry& e, std::vector<std::string>& warnings) const
    {
        const std::string msg = "unknown key '" + e.key + "' in [" + e.section + "]";
        if (strict_) error(e.line, msg);
        warnings.push_back(source_ + ":" + std::to_string(e.line) + ": " + msg);
    }

    double number(const Entry& e) const
    {
        const std::string v = trim(e.value);
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            error(e.line, "'" + e.key + "' expects a number, got '" + v + "'");
        }
    }

    int integer(const Entry& e) const
    {
        const double d = number(e);
        if (d != std::floor(d) || std::abs(d) > 1e9)
            error(e.line, "'" + e.key + "' expects an integer");
        return static_cast<int>(d);
    }

    bool boolean(const Entry& e) const
    {
        const std::string v = trim(e.value);
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        error(e.line, "'" + e.key + "' expects true or false");
    }

    std::vector<double> numbers(const Entry& e, std::size_t count) const
    {
        const auto words = split_words(e.value);
        if (words.size() != count)
            error(e.line, "'" + e.key + "' expects " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (const auto& w : words) out.push_back(number({e.section, e.key, w, e.line}));
        return out;
    }

    Box box(const Entry& e) const
    {
        const auto v = numbers(e, 4);
        return {v[0], v[1], v[2], v[3]};
    }

    Components components(const Entry& e, const std::string& word) const
    {
        if (word == "x") return Components::x;
        if (word == "y") return Components::y;
        if (word == "xy") return Components::xy;
        error(e.line, "expected x, y or xy, got '" + word + "'");
    }

private:
    std::string source_;
    bool strict_;
};

std::vector<Entry> tokenize(std::istream& in, const Reader& reader)
{
    std::vector<Entry> out;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') reader.error(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) reader.error(lineno, "empty section name");
            out.push_back({section, "", "", lineno}); // marks the section as present
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) reader.error(lineno, "expected key = value");
        if (section.empty()) reader.error(lineno, "key outside a section");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) reader.error(lineno, "empty key");
        out.push_back({section, key, trim(line.substr(eq + 1)), lineno});
    }
    return out;
}

void apply_override(std::vector<Entry>& entries, const std::string& section, const std::string& key,
                    const std::string& value, int line)
{
    bool section_present = false;
    auto insert_at = entries.end();
    for (auto it = entries.begin(); it != entries.end(); ++it)
        if (it->section == section) {
            section_present = true;
            insert_at = it + 1;
        }
    std::erase_if(entries, [&](const Entry& e) { return e.section == section && e.key == key; });
    if (!section_present) {
        entries.push_back({section, "", "", line});
        entries.push_back({section, key, value, line});
        return;
    }
    // Re-find the position after erasing.
    insert_at = entries.end();
    for (auto it = entries.begin(); it != entries.end(); ++it)
        if (it->section == section) insert_at = it + 1;
    entries.insert(insert_at, {section, key, value, line});
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

} // namespace

std::pair<std::string, std::string> parse_override(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override needs key=value: " + text);
    auto key = trim(text.substr(0, eq));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.')
        throw std::invalid_argument("override key needs section.key: " + text);
    return {key, trim(text.substr(eq + 1))};
}

bool ScenarioFile::operator==(const ScenarioFile& o) const
{
    return mesh == o.mesh && thickness == o.thickness && plane == o.plane && cmod == o.cmod &&
           cmod_direction == o.cmod_direction && young == o.young && nu == o.nu && ft == o.ft &&
           gf == o.gf && beta == o.beta && healing == o.healing && crack == o.crack &&
           supports == o.supports && ties == o.ties && loads == o.loads && phases == o.phases &&
           output == o.output && variants == o.variants;
}

ScenarioFile read_scenario(std::istream& in, const std::string& source, const ParseOptions& opts)
{
    const Reader r(source, opts.strict);
    std::vector<Entry> entries = tokenize(in, r);

    ScenarioFile s;
    // Variants are collected first, then applied as overrides.
    for (const auto& e : entries)
        if (starts_with(e.section, "variant.") && !e.key.empty())
            s.variants[e.section.substr(8)].emplace_back(e.key, e.value);
        else if (starts_with(e.section, "variant.") && e.key.empty())
            s.variants[e.section.substr(8)];
    std::erase_if(entries, [](const Entry& e) { return starts_with(e.section, "variant."); });

    auto split_key = [&](const std::string& full, int line) {
        const auto dot = full.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == full.size())
            r.error(line, "override key must be section.key, got '" + full + "'");
        return std::pair{full.substr(0, dot), full.substr(dot + 1)};
    };
    for (const auto& name : opts.variants) {
        const auto it = s.variants.find(name);
        if (it == s.variants.end())
            throw std::invalid_argument("scenario " + source + " has no variant '" + name + "'");
        for (const auto& [key, value] : it->second) {
            const auto [sec, k] = split_key(key, 0);
            apply_override(entries, sec, k, value, 0);
        }
    }
    for (const auto& [key, value] : opts.overrides) {
        const auto [sec, k] = split_key(key, 0);
        apply_override(entries, sec, k, value, 0);
    }

    std::map<int, PhaseSpec> phases;
    std::map<std::string, TieSpec> ties;
    std::vector<std::string> tie_order;
    std::map<std::string, LoadSpec> loads;
    std::vector<std::string> load_order;
    std::set<std::string> seen_sections;

    for (const auto& e : entries) {
        const std::string& sec = e.section;
        const std::string& k = e.key;
        if (k.empty()) {
            if (sec == "healing" && !s.healing) s.healing = HealingSpec{};
            if (starts_with(sec, "tie.") && !ties.count(sec.substr(4))) {
                ties[sec.substr(4)].name = sec.substr(4);
                tie_order.push_back(sec.substr(4));
            }
            if (starts_with(sec, "load.") && !loads.count(sec.substr(5))) {
                loads[sec.substr(5)].name = sec.substr(5);
                load_order.push_back(sec.substr(5));
            }
            if (starts_with(sec, "program.")) {
                const int n = r.integer({sec, "program index", sec.substr(8), e.line});
                phases[n].index = n;
            }
            continue;
        }
        if (sec == "model") {
            if (k == "mesh") s.mesh = e.value;
            else if (k == "thickness") s.thickness = r.number(e);
            else if (k == "plane") {
                if (e.value != "stress" && e.value != "strain")
                    r.error(e.line, "plane must be stress or strain");
                s.plane = e.value;
            } else if (k == "cmod") s.cmod = r.box(e);
            else if (k == "cmod_direction") {
                const auto v = r.numbers(e, 2);
                s.cmod_direction = {v[0], v[1]};
            } else r.unknown(e, s.warnings);
        } else if (sec == "material") {
            if (k == "E") s.young = r.number(e);
            else if (k == "nu") s.nu = r.number(e);
            else if (k == "ft") s.ft = r.number(e);
            else if (k == "Gf") s.gf = r.number(e);
            else if (k == "beta") s.beta = r.number(e);
            else r.unknown(e, s.warnings);
        } else if (sec == "healing") {
            if (!s.healing) s.healing = HealingSpec{};
            HealingSpec& h = *s.healing;
            if (k == "enabled") h.enabled = r.boolean(e);
            else if (k == "fh") h.fh = r.number(e);
            else if (k == "Gh") h.gh = r.number(e);
            else if (k == "Ah") h.ah = r.number(e);
            else if (k == "T0") h.t0 = r.number(e);
            else if (k == "T0_ratio") h.t0_ratio = r.number(e);
            else if (k == "b") h.b = r.number(e);
            else if (k == "release") {
                if (e.value != "threshold" && e.value != "explicit")
                    r.error(e.line, "release must be threshold or explicit");
                h.release = e.value;
            } else r.unknown(e, s.warnings);
        } else if (sec == "crack") {
            CrackSpec& c = s.crack;
            if (k == "mode") {
                if (e.value != "tracked" && e.value != "straight" && e.value != "curve")
                    r.error(e.line, "crack mode must be tracked, straight or curve");
                c.mode = e.value;
            } else if (k == "seed") {
                const auto v = r.numbers(e, 2);
                c.seed = Point2(v[0], v[1]);
            } else if (k == "direction") {
                const auto v = r.numbers(e, 2);
                c.direction = {v[0], v[1]};
            } else if (k == "a") c.a = r.number(e);
            else if (k == "x0") c.x0 = r.number(e);
            else if (k == "radius_factor") c.radius_factor = r.number(e);
            else if (k == "max_kink") c.max_kink = r.number(e);
            else if (k == "activation_ratio") c.activation_ratio = r.number(e);
            else r.unknown(e, s.warnings);
        } else if (sec == "supports") {
            SupportSpec sp;
            const auto words = split_words(e.value);
            if (k == "fix") {
                if (words.size() != 5) r.error(e.line, "fix expects x0 y0 x1 y1 components");
                sp.box = r.box({sec, k, words[0] + " " + words[1] + " " + words[2] + " " + words[3],
                                e.line});
                sp.components = r.components(e, words[4]);
            } else if (k == "fix_point") {
                if (words.size() != 3) r.error(e.line, "fix_point expects x y components");
                const auto p = r.numbers({sec, k, words[0] + " " + words[1], e.line}, 2);
                sp.point = true;
                sp.box = {p[0], p[1], p[0], p[1]};
                sp.components = r.components(e, words[2]);
            } else {
                r.unknown(e, s.warnings);
                continue;
            }
            s.supports.push_back(sp);
        } else if (starts_with(sec, "tie.")) {
            TieSpec& t = ties[sec.substr(4)];
            if (k == "box") t.box = r.box(e);
            else if (k == "component") {
                if (e.value != "x" && e.value != "y") r.error(e.line, "component must be x or y");
                t.component = e.value == "x" ? 0 : 1;
            } else if (k == "fixed") t.fixed = r.boolean(e);
            else r.unknown(e, s.warnings);
        } else if (starts_with(sec, "load.")) {
            LoadSpec& l = loads[sec.substr(5)];
            LoadItem item;
            if (k == "edge") {
                const auto v = r.numbers(e, 6);
                item.kind = LoadItem::Kind::edge;
                item.box = {v[0], v[1], v[2], v[3]};
                item.fx = v[4];
                item.fy = v[5];
            } else if (k == "point") {
                const auto v = r.numbers(e, 4);
                item.kind = LoadItem::Kind::point;
                item.box = {v[0], v[1], v[0], v[1]};
                item.fx = v[2];
                item.fy = v[3];
            } else if (k == "tie") {
                item.kind = LoadItem::Kind::tie;
                item.tie = e.value;
            } else {
                r.unknown(e, s.warnings);
                continue;
            }
            l.items.push_back(item);
        } else if (starts_with(sec, "program.")) {
            const int n = r.integer({sec, "program index", sec.substr(8), e.line});
            PhaseSpec& p = phases[n];
            p.index = n;
            if (k == "mode") {
                if (e.value != "force" && e.value != "displacement" && e.value != "cmod" &&
                    e.value != "rest")
                    r.error(e.line, "mode must be force, displacement, cmod or rest");
                p.mode = e.value;
            } else if (k == "load") p.load = e.value;
            else if (k == "tie") p.tie = e.value;
            else if (k == "increment") p.increment = r.number(e);
            else if (k == "step_time") p.step_time = r.number(e);
            else if (k == "until_cmod") p.until_cmod = r.number(e);
            else if (k == "until_displacement") p.until_displacement = r.number(e);
            else if (k == "until_load") p.until_load = r.number(e);
            else if (k == "steps") p.steps = r.integer(e);
            else if (k == "release") {
                if (e.value != "phase_end" && e.value != "none")
                    r.error(e.line, "release must be phase_end or none");
                p.release_at_end = e.value == "phase_end";
            } else r.unknown(e, s.warnings);
        } else if (sec == "output") {
            if (k == "force") {
                if (!starts_with(e.value, "load:") && !starts_with(e.value, "dof:"))
                    r.error(e.line, "force must be load:NAME or dof:NAME");
                s.output = e.value;
            } else r.unknown(e, s.warnings);
        } else {
            const std::string msg = "unknown section [" + sec + "]";
            if (opts.strict) r.error(e.line, msg);
            if (seen_sections.insert(sec).second)
                s.warnings.push_back(source + ":" + std::to_string(e.line) + ": " + msg);
        }
    }
    for (const auto& name : tie_order) s.ties.push_back(ties[name]);
    for (const auto& name : load_order) s.loads.push_back(loads[name]);
    for (const auto& [n, p] : phases) s.phases.push_back(p);
    return s;
}

ScenarioFile read_scenario(const std::string& path, const ParseOptions& opts)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    ScenarioFile s = read_scenario(in, path, opts);
    s.source_dir = std::filesystem::path(path).parent_path().string();
    return s;
}

void write_scenario(std::ostream& out, const ScenarioFile& s)
{
    auto box = [](const Box& b) {
        return fmt(b.x0) + " " + fmt(b.y0) + " " + fmt(b.x1) + " " + fmt(b.y1);
    };
    auto comps = [](Components c) {
        return c == Components::x ? "x" : c == Components::y ? "y" : "xy";
    };
    out << "[model]\n";
    if (!s.mesh.empty()) out << "mesh = " << s.mesh << '\n';
    out << "thickness = " << fmt(s.thickness) << '\n';
    out << "plane = " << s.plane << '\n';
    if (s.cmod) out << "cmod = " << box(*s.cmod) << '\n';
    out << "cmod_direction = " << fmt(s.cmod_direction.x()) << ' ' << fmt(s.cmod_direction.y())
        << '\n';
    out << "\n[material]\nE = " << fmt(s.young) << "\nnu = " << fmt(s.nu)
        << "\nft = " << fmt(s.ft) << "\nGf = " << fmt(s.gf) << "\nbeta = " << fmt(s.beta)
        << '\n';
    if (s.healing) {
        const HealingSpec& h = *s.healing;
        out << "\n[healing]\nenabled = " << (h.enabled ? "true" : "false") << "\nfh = " << fmt(h.fh)
            << "\nGh = " << fmt(h.gh) << "\nAh = " << fmt(h.ah) << '\n';
        if (h.t0) out << "T0 = " << fmt(*h.t0) << '\n';
        if (h.t0_ratio) out << "T0_ratio = " << fmt(*h.t0_ratio) << '\n';
        out << "b = " << fmt(h.b) << "\nrelease = " << h.release << '\n';
    }
    const CrackSpec& c = s.crack;
    out << "\n[crack]\nmode = " << c.mode << '\n';
    if (c.seed) out << "seed = " << fmt(c.seed->x()) << ' ' << fmt(c.seed->y()) << '\n';
    out << "direction = " << fmt(c.direction.x()) << ' ' << fmt(c.direction.y()) << '\n'
        << "a = " << fmt(c.a) << "\nx0 = " << fmt(c.x0) << "\nradius_factor = "
        << fmt(c.radius_factor) << "\nmax_kink = " << fmt(c.max_kink)
        << "\nactivation_ratio = " << fmt(c.activation_ratio) << '\n';
    out << "\n[supports]\n";
    for (const auto& sp : s.supports) {
        if (sp.point)
            out << "fix_point = " << fmt(sp.box.x0) << ' ' << fmt(sp.box.y0) << ' '
                << comps(sp.components) << '\n';
        else
            out << "fix = " << box(sp.box) << ' ' << comps(sp.components) << '\n';
    }
    for (const auto& t : s.ties)
        out << "\n[tie." << t.name << "]\nbox = " << box(t.box) << "\ncomponent = "
            << (t.component == 0 ? "x" : "y") << "\nfixed = " << (t.fixed ? "true" : "false")
            << '\n';
    for (const auto& l : s.loads) {
        out << "\n[load." << l.name << "]\n";
        for (const auto& it : l.items) {
            if (it.kind == LoadItem::Kind::edge)
                out << "edge = " << box(it.box) << ' ' << fmt(it.fx) << ' ' << fmt(it.fy) << '\n';
            else if (it.kind == LoadItem::Kind::point)
                out << "point = " << fmt(it.box.x0) << ' ' << fmt(it.box.y0) << ' ' << fmt(it.fx)
                    << ' ' << fmt(it.fy) << '\n';
            else
                out << "tie = " << it.tie << '\n';
        }
    }
    for (const auto& p : s.phases) {
        out << "\n[program." << p.index << "]\nmode = " << p.mode << '\n';
        if (!p.load.empty()) out << "load = " << p.load << '\n';
        if (!p.tie.empty()) out << "tie = " << p.tie << '\n';
        out << "increment = " << fmt(p.increment) << "\nstep_time = " << fmt(p.step_time) << '\n';
        if (p.until_cmod) out << "until_cmod = " << fmt(*p.until_cmod) << '\n';
        if (p.until_displacement)
            out << "until_displacement = " << fmt(*p.until_displacement) << '\n';
        if (p.until_load) out << "until_load = " << fmt(*p.until_load) << '\n';
        out << "steps = " << p.steps << '\n';
        if (p.release_at_end) out << "release = phase_end\n";
    }
    if (!s.output.empty()) out << "\n[output]\nforce = " << s.output << '\n';
    for (const auto& [name, entries] : s.variants) {
        out << "\n[variant." << name << "]\n";
        for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    }
}

Mesh load_scenario_mesh(const ScenarioFile& file)
{
    if (file.mesh.empty()) throw std::invalid_argument("scenario has no mesh");
    if (starts_with(file.mesh, "builtin:")) {
        const std::string spec = file.mesh.substr(8);
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("builtin mesh must be builtin:<benchmark>:<refinement>");
        return benchmark_mesh(spec.substr(0, colon), parse_refinement(spec.substr(colon + 1)));
    }
    std::filesystem::path p(file.mesh);
    if (p.is_relative() && !file.source_dir.empty()) p = std::filesystem::path(file.source_dir) / p;
    return read_mesh(p.string());
}

Scenario build_scenario(const ScenarioFile& file) { return build_scenario(file, load_scenario_mesh(file)); }

namespace {

double mesh_scale(const Mesh& mesh)
{
    Eigen::AlignedBox2d bb;
    for (const auto& p : mesh.nodes) bb.extend(p);
    return bb.diagonal().norm();
}

std::vector<int> nodes_in_box(const Mesh& mesh, const Box& b)
{
    const double tol = 1e-9 * mesh_scale(mesh);
    const double x0 = std::min(b.x0, b.x1) - tol, x1 = std::max(b.x0, b.x1) + tol;
    const double y0 = std::min(b.y0, b.y1) - tol, y1 = std::max(b.y0, b.y1) + tol;
    std::vector<int> out;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Point2& p = mesh.nodes[i];
        if (p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1)
            out.push_back(static_cast<int>(i));
    }
    return out;
}

int nearest_node(const Mesh& mesh, const Point2& p)
{
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double d = (mesh.nodes[i] - p).squaredNorm();
        if (d < dist) {
            dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

struct Side {
    int a, m, b;
};

// Element sides lying on the boundary (used by exactly one element).
std::vector<Side> boundary_sides(const Mesh& mesh)
{
    std::map<std::pair<int, int>, int> count;
    std::vector<Side> sides;
    for (const auto& c : mesh.elements)
        for (int k = 0; k < 4; ++k) {
            const Side s{c[k], c[4 + k], c[(k + 1) % 4]};
            sides.push_back(s);
            ++count[{std::min(s.a, s.b), std::max(s.a, s.b)}];
        }
    std::vector<Side> out;
    for (const auto& s : sides)
        if (count[{std::min(s.a, s.b), std::max(s.a, s.b)}] == 1) out.push_back(s);
    return out;
}

} // namespace

Scenario build_scenario(const ScenarioFile& file, Mesh mesh)
{
    Scenario sc;
    Model& m = sc.model;
    m.mesh = std::move(mesh);
    m.mesh.thickness = file.thickness;
    m.bulk.young_modulus = file.young * 1e6;
    m.bulk.poisson_ratio = file.nu;
    m.bulk.tensile_strength = file.ft * 1e6;
    m.bulk.fracture_energy = file.gf;
    m.bulk.mode_mix_beta = file.beta;
    m.bulk.plane_mode = file.plane == "strain" ? PlaneMode::plane_strain : PlaneMode::plane_stress;
    if (file.healing && file.healing->enabled) {
        const HealingSpec& h = *file.healing;
        HealingAgent a;
        a.ultimate_strength = h.fh * 1e6;
        a.ultimate_fracture_energy = h.gh;
        a.healing_rate = h.ah;
        if (h.t0) a.release_threshold = *h.t0 * 1e6;
        else if (h.t0_ratio) a.release_threshold = *h.t0_ratio * m.bulk.tensile_strength;
        else throw std::invalid_argument("healing needs T0 or T0_ratio");
        a.contact_exponent = h.b;
        m.healing = a;
        m.release_mode = h.release == "explicit" ? ReleaseMode::explicit_ : ReleaseMode::threshold;
    }

    const Mesh& mesh_ref = m.mesh;
    m.dofs = DofSystem(mesh_ref.node_count());
    std::map<std::string, std::pair<int, int>> tie_anchor; // first node, component
    for (const auto& t : file.ties) {
        const auto nodes = nodes_in_box(mesh_ref, t.box);
        if (nodes.empty()) throw std::invalid_argument("tie '" + t.name + "' selects no nodes");
        m.dofs.tie(nodes, t.component);
        tie_anchor[t.name] = {nodes.front(), t.component};
    }
    for (const auto& [name, anchor] : tie_anchor)
        sc.tie_dofs[name] = m.dofs.dof(anchor.first, anchor.second);
    for (const auto& t : file.ties)
        if (t.fixed) m.dofs.fix(sc.tie_dofs[t.name], 0.0);

    for (const auto& sp : file.supports) {
        std::vector<int> nodes;
        if (sp.point) nodes.push_back(nearest_node(mesh_ref, {sp.box.x0, sp.box.y0}));
        else nodes = nodes_in_box(mesh_ref, sp.box);
        if (nodes.empty()) throw std::invalid_argument("a support selects no nodes");
        for (int n : nodes) {
            if (sp.components != Components::y) m.dofs.fix(m.dofs.dof(n, 0), 0.0);
            if (sp.components != Components::x) m.dofs.fix(m.dofs.dof(n, 1), 0.0);
        }
    }

    const auto ndof = static_cast<Eigen::Index>(m.dofs.dof_count());
    const auto sides = boundary_sides(mesh_ref);
    for (const auto& l : file.loads) {
        LoadPattern p;
        p.name = l.name;
        p.force = Eigen::VectorXd::Zero(ndof);
        for (const auto& item : l.items) {
            if (item.kind == LoadItem::Kind::tie) {
                const auto it = sc.tie_dofs.find(item.tie);
                if (it == sc.tie_dofs.end())
                    throw std::invalid_argument("load '" + l.name + "' names unknown tie " + item.tie);
                p.force(it->second) += 1.0;
                p.attached_dof = it->second;
            } else if (item.kind == LoadItem::Kind::point) {
                const int n = nearest_node(mesh_ref, {item.box.x0, item.box.y0});
                p.force(m.dofs.dof(n, 0)) += item.fx;
                p.force(m.dofs.dof(n, 1)) += item.fy;
            } else {
                const auto in_box = nodes_in_box(mesh_ref, item.box);
                const std::set<int> inside(in_box.begin(), in_box.end());
                std::vector<Side> chosen;
                double total = 0.0;
                for (const auto& s : sides)
                    if (inside.count(s.a) && inside.count(s.m) && inside.count(s.b)) {
                        chosen.push_back(s);
                        total += (mesh_ref.nodes[s.b] - mesh_ref.nodes[s.a]).norm();
                    }
                if (chosen.empty() || !(total > 0.0))
                    throw std::invalid_argument("edge load of '" + l.name + "' selects no edge");
                for (const auto& s : chosen) {
                    const double share = (mesh_ref.nodes[s.b] - mesh_ref.nodes[s.a]).norm() / total;
                    const double w[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
                    const int nodes[3] = {s.a, s.m, s.b};
                    for (int k = 0; k < 3; ++k) {
                        p.force(m.dofs.dof(nodes[k], 0)) += share * w[k] * item.fx;
                        p.force(m.dofs.dof(nodes[k], 1)) += share * w[k] * item.fy;
                    }
                }
            }
        }
        m.patterns.push_back(std::move(p));
    }

    if (file.cmod) {
        m.cmod.node_a = nearest_node(mesh_ref, {file.cmod->x0, file.cmod->y0});
        m.cmod.node_b = nearest_node(mesh_ref, {file.cmod->x1, file.cmod->y1});
        m.cmod.direction = file.cmod_direction;
    }

    CrackSetup& cs = m.crack;
    cs.mode = file.crack.mode == "straight" ? CrackMode::prescribed_straight
              : file.crack.mode == "curve"  ? CrackMode::prescribed_curve
                                            : CrackMode::tracked;
    cs.seed = file.crack.seed;
    cs.direction = file.crack.direction;
    cs.curve_a = file.crack.a;
    cs.curve_x0 = file.crack.x0;
    cs.radius_factor = file.crack.radius_factor;
    cs.max_kink_deg = file.crack.max_kink;
    cs.activation_ratio = file.crack.activation_ratio;

    auto pattern_of = [&](const std::string& name, int index) {
        const int p = m.pattern_index(name);
        if (p < 0)
            throw std::invalid_argument("program." + std::to_string(index) + " names unknown load '" +
                                        name + "'");
        return p;
    };
    for (const auto& ps : file.phases) {
        Phase ph;
        ph.name = "program." + std::to_string(ps.index);
        ph.step_time = ps.step_time;
        ph.steps = ps.steps;
        ph.release_at_end = ps.release_at_end;
        if (ps.until_cmod) ph.until_cmod = *ps.until_cmod * 1e-3;
        if (ps.until_displacement) ph.until_displacement = *ps.until_displacement * 1e-3;
        if (ps.until_load) ph.until_load = *ps.until_load;
        if (ps.mode == "force") {
            ph.mode = ControlMode::force;
            ph.pattern = pattern_of(ps.load, ps.index);
            ph.increment = ps.increment;
        } else if (ps.mode == "displacement") {
            ph.mode = ControlMode::displacement;
            const auto it = sc.tie_dofs.find(ps.tie);
            if (it == sc.tie_dofs.end())
                throw std::invalid_argument(ph.name + " needs a tie for displacement control");
            ph.dof = it->second;
            ph.increment = ps.increment * 1e-3;
        } else if (ps.mode == "cmod") {
            if (!m.cmod.defined()) throw std::invalid_argument(ph.name + " needs a CMOD gauge");
            ph.mode = ControlMode::cmod;
            ph.pattern = pattern_of(ps.load, ps.index);
            ph.increment = ps.increment * 1e-3;
        } else {
            ph.mode = ControlMode::rest;
        }
        if (ph.mode != ControlMode::rest && !(std::abs(ph.increment) > 0.0))
            throw std::invalid_argument(ph.name + " needs a non-zero increment");
        if (ph.mode == ControlMode::rest && !(ph.step_time > 0.0))
            throw std::invalid_argument(ph.name + " rest phase needs step_time > 0");
        if (ph.mode == ControlMode::force && ph.until_cmod && !m.cmod.defined())
            throw std::invalid_argument(ph.name + " needs a CMOD gauge");
        sc.program.phases.push_back(ph);
    }

    if (starts_with(file.output, "dof:")) {
        const auto it = sc.tie_dofs.find(file.output.substr(4));
        if (it == sc.tie_dofs.end()) throw std::invalid_argument("output names unknown tie");
        sc.output = {OutputSpec::Kind::dof, it->second};
    } else if (starts_with(file.output, "load:")) {
        sc.output = {OutputSpec::Kind::load, pattern_of(file.output.substr(5), 0)};
    } else {
        sc.output = {OutputSpec::Kind::load, 0};
    }

    m.prepare();
    return sc;
}

} // namespace sdaheal
