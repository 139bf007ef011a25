#include "support.hpp"

#include "sdaheal/assembly.hpp"
#include "sdaheal/mesh_io.hpp"
#include "sdaheal/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

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

// 4 x 3 cells, uneven spacing, interior nodes pushed off the grid lines.
Mesh distorted()
{
    GridSpec g;
    g.xs = {0.0, 0.07, 0.11, 0.2, 0.3};
    g.ys = {0.0, 0.04, 0.13, 0.2};
    g.map = [](const Point2& p) {
        const double bump = p.x() * (0.3 - p.x()) * p.y() * (0.2 - p.y());
        return Point2(p.x() + 40.0 * bump, p.y() - 30.0 * bump);
    };
    return structured_mesh(g);
}

bool on_boundary(const Point2& p)
{
    const double tol = 1e-12;
    return p.x() < tol || p.x() > 0.3 - tol || p.y() < tol || p.y() > 0.2 - tol;
}

Point2 linear_field(const Point2& p)
{
    return {1e-4 + 2e-5 * p.x() - 1e-5 * p.y(), -3e-5 + 0.5e-5 * p.x() + 3e-5 * p.y()};
}

} // namespace

TEST_CASE("serendipity shape functions")
{
    const auto& ref = reference_nodes();
    for (int a = 0; a < 8; ++a) {
        const auto s = shape_functions(ref[a].x(), ref[a].y());
        for (int b = 0; b < 8; ++b) CHECK(s.n(b) == doctest::Approx(a == b ? 1.0 : 0.0));
    }
    for (double xi : {-0.7, 0.1, 0.55})
        for (double eta : {-0.3, 0.8}) {
            const auto s = shape_functions(xi, eta);
            CHECK(s.n.sum() == doctest::Approx(1.0));
            CHECK(s.dn.col(0).sum() == doctest::Approx(0.0));
            CHECK(s.dn.col(1).sum() == doctest::Approx(0.0));
        }
}

TEST_CASE("quadrature rules integrate the reference square")
{
    for (auto rule : {QuadratureRule::full_3x3, QuadratureRule::reduced_2x2}) {
        double w = 0.0;
        double x2 = 0.0;
        for (const auto& q : quadrature(rule)) {
            w += q.weight;
            x2 += q.weight * q.xi * q.xi * q.eta * q.eta;
        }
        CHECK(w == doctest::Approx(4.0));
        CHECK(x2 == doctest::Approx(4.0 / 9.0));
    }
    CHECK(quadrature(QuadratureRule::full_3x3).size() == 9);
    CHECK(quadrature(QuadratureRule::reduced_2x2).size() == 4);
}

TEST_CASE("patch test on a distorted mesh")
{
    Model m;
    m.mesh = distorted();
    m.mesh.thickness = 0.1;
    m.bulk = concrete();
    m.dofs = DofSystem(m.mesh.node_count());
    std::vector<bool> boundary(m.mesh.node_count());
    for (std::size_t i = 0; i < m.mesh.node_count(); ++i) {
        boundary[i] = on_boundary(m.mesh.nodes[i]);
        if (!boundary[i]) continue;
        const Point2 u = linear_field(m.mesh.nodes[i]);
        m.dofs.fix(m.dofs.dof(static_cast<int>(i), 0), u.x());
        m.dofs.fix(m.dofs.dof(static_cast<int>(i), 1), u.y());
    }
    m.prepare();
    GlobalState s = GlobalState::initial(m);
    NewtonSolver newton(m);
    const auto rep = newton.solve(s, {ControlMode::rest, -1, -1, 0.0}, 0.0);
    REQUIRE(rep.converged);
    int interior = 0;
    for (std::size_t i = 0; i < m.mesh.node_count(); ++i) {
        if (boundary[i]) continue;
        ++interior;
        const Point2 u = linear_field(m.mesh.nodes[i]);
        CHECK(s.u(m.dofs.dof(static_cast<int>(i), 0)) == doctest::Approx(u.x()).epsilon(1e-9));
        CHECK(s.u(m.dofs.dof(static_cast<int>(i), 1)) == doctest::Approx(u.y()).epsilon(1e-9));
    }
    CHECK(interior > 0);
    const Eigen::Vector3d strain(2e-5, 3e-5, -1e-5 + 0.5e-5);
    const Eigen::Vector3d sigma = m.elasticity() * strain;
    const auto& a = newton.evaluate(s, 0.0);
    for (const auto& st : a.mean_stress) CHECK((st - sigma).norm() <= 1e-6 * sigma.norm());
}

TEST_CASE("assembled stiffness is symmetric and thread count does not change it")
{
    auto sc = testing::bundled("bending");
    Model& m = sc.model;
    GlobalState s = GlobalState::initial(m);
    prepare_crack(m, s);
    NewtonSolver newton(m);
    const int p = m.pattern_index("force");
    // a few CMOD steps, crack open
    for (int k = 0; k < 12; ++k) {
        const auto rep = newton.solve(s, {ControlMode::cmod, p, -1, 5e-6}, 0.0);
        REQUIRE(rep.converged);
        commit_cohesive(m, s, newton.assembly(), 0.0);
    }
    Assembler asm_(m);
    AssemblyResult serial;
    AssemblyResult parallel;
    asm_.assemble_serial(s, 0.0, serial);
    asm_.assemble_parallel(s, 0.0, parallel);
    REQUIRE(serial.ok());
    REQUIRE(parallel.ok());
    int open = 0;
    for (const auto& l : serial.local) open += l.closed ? 0 : 1;
    CHECK(open > 0);
    const SparseMatrix k = serial.stiffness;
    const SparseMatrix kt = k.transpose();
    CHECK((k - kt).norm() <= 1e-12 * k.norm());
    CHECK(serial.internal == parallel.internal);
    REQUIRE(serial.stiffness.nonZeros() == parallel.stiffness.nonZeros());
    for (Eigen::Index i = 0; i < serial.stiffness.nonZeros(); ++i)
        REQUIRE(serial.stiffness.valuePtr()[i] == parallel.stiffness.valuePtr()[i]);
}

TEST_CASE("dof ties, prescribed values and equation numbering")
{
    DofSystem d(4);
    const std::array<int, 3> nodes{1, 2, 3};
    const int shared = d.tie(nodes, 1);
    CHECK(d.dof(1, 1) == shared);
    CHECK(d.dof(3, 1) == shared);
    CHECK(d.dof(1, 0) != d.dof(2, 0));
    CHECK(d.dof_count() == 6);
    CHECK(d.equation_count() == 6);
    const unsigned r0 = d.revision();
    d.fix(shared, 1e-3);
    CHECK(d.revision() != r0);
    CHECK(d.is_fixed(shared));
    CHECK(d.prescribed_value(shared) == 1e-3);
    CHECK(d.equation(shared) == -1);
    CHECK(d.equation_count() == 5);
    d.release(shared);
    CHECK(d.equation(shared) >= 0);
}

TEST_CASE("mesh files round trip")
{
    const Mesh m = rectangle_mesh(1.0, 0.2, 100, 20);
    CHECK(m.element_count() == 2000);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.node_count() == m.node_count());
    REQUIRE(r.element_count() == m.element_count());
    for (std::size_t i = 0; i < m.node_count(); ++i) REQUIRE(r.nodes[i] == m.nodes[i]);
    for (std::size_t e = 0; e < m.element_count(); ++e) REQUIRE(r.elements[e] == m.elements[e]);
    CHECK(r.node_ids == m.node_ids);
    CHECK(r.element_ids == m.element_ids);
}

TEST_CASE("mesh parse errors carry the line")
{
    auto fails_at = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            read_mesh(in);
        } catch (const ParseError& e) {
            return e.line() == line;
        }
        return false;
    };
    const std::string nodes = "NODES 8\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n5 0.5 0\n6 1 0.5\n7 0.5 1\n8 0 0.5\n";
    CHECK(fails_at(nodes + "ELEMENTS 1\n1 1 2 3 4 5 6 7 9\n", 11));
    CHECK(fails_at(nodes + "ELEMENTS 2\n1 1 2 3 4 5 6 7 8\n", 11));
    CHECK(fails_at("NODES 2\n1 0 0\n1 1 0\n", 3));
    CHECK(fails_at("NODES x\n", 1));
    CHECK(fails_at("1 0 0\n", 1));
    std::istringstream ok(nodes + "ELEMENTS 1\n1 1 2 3 4 5 6 7 8\n");
    CHECK(read_mesh(ok).element_count() == 1);
    std::istringstream inverted(nodes + "ELEMENTS 1\n1 1 4 3 2 8 7 6 5\n");
    CHECK_THROWS_AS(read_mesh(inverted), GeometryError);
}

TEST_CASE("benchmark meshes")
{
    CHECK(bending_mesh(Refinement::coarse).element_count() == 206);
    CHECK(bending_mesh(Refinement::medium).element_count() == 448);
    CHECK(bending_mesh(Refinement::fine).element_count() == 789);
    for (const char* b : {"bending", "tension_shear", "dam"})
        for (auto r : {Refinement::coarse, Refinement::medium, Refinement::fine}) {
            const Mesh m = benchmark_mesh(b, r);
            CHECK_NOTHROW(m.validate());
            double area = 0.0;
            for (std::size_t e = 0; e < m.element_count(); ++e) {
                const auto poly = m.outline(static_cast<int>(e));
                area += polygon_area(poly);
            }
            if (std::string(b) == "bending") CHECK(area == doctest::Approx(0.55 * 0.15 - 0.005 * 0.025));
            if (std::string(b) == "tension_shear") CHECK(area == doctest::Approx(0.04 - 0.025 * 0.005));
        }
    CHECK_THROWS(parse_refinement("ultra"));
}
