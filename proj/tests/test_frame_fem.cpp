#include "starlat/frame_fem.hpp"
#include "starlat/oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace starlat;

namespace {

Material plain(double E, double alpha, double nu = 0.3)
{
    return {"plain", {{20.0, E}}, {{20.0, alpha}}, nu};
}

ElementState unit_bar(double angle_deg = 0.0)
{
    const double a = angle_deg * std::numbers::pi / 180.0;
    return make_element_state({0, 0}, {std::cos(a), std::sin(a)}, plain(1.0, 1e-5), 20.0, rectangular_section(1.0));
}

// Straight line of n elements along x, all Aluminium.
Mesh line_mesh(int n, double length, double t)
{
    Mesh m;
    for (int i = 0; i <= n; ++i)
        m.nodes.push_back({length * i / n, 0.0});
    for (int i = 0; i < n; ++i)
        m.elements.push_back({i, i + 1, MaterialId::Aluminium, 0});
    m.section = rectangular_section(t);
    m.edge_length = length;
    return m;
}

Mesh rve_mesh(const RveParams& p)
{
    return mesh_rve(build_rve(p));
}

const RveParams kDesign{60, 30, 25, 1};

}  // namespace

TEST(ElementStiffness, AxialTerm)
{
    const Matrix6 k = element_stiffness_local(unit_bar());
    EXPECT_NEAR(k(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(k(0, 3), -1.0, 1e-15);
}

TEST(ElementStiffness, SymmetricAndRigidBodyFree)
{
    for (double ang : {0.0, 17.0, 45.0, 90.0, 133.0, 250.0}) {
        const ElementState e = unit_bar(ang);
        const Matrix6 k = element_stiffness(e);
        EXPECT_LT((k - k.transpose()).norm(), 1e-12 * k.norm());
        Vector6 tx, ty, rz;
        tx << 1, 0, 0, 1, 0, 0;
        ty << 0, 1, 0, 0, 1, 0;
        // Small rotation about node 0.
        const double bx = std::cos(ang * std::numbers::pi / 180), by = std::sin(ang * std::numbers::pi / 180);
        rz << 0, 0, 1, -by, bx, 1;
        EXPECT_LT((k * tx).norm(), 1e-12);
        EXPECT_LT((k * ty).norm(), 1e-12);
        EXPECT_LT((k * rz).norm(), 1e-12);
    }
}

TEST(ElementStiffness, EulerBernoulliLimit)
{
    ElementState e = unit_bar();
    e.section.area = 1e-2;
    e.section.inertia = 1e-12;  // slender: shear parameter -> 0
    const Matrix6 k = element_stiffness_local(e);
    const double EI = e.E * e.section.inertia, L = e.length;
    EXPECT_NEAR(k(1, 1) / (12 * EI / (L * L * L)), 1.0, 1e-6);
    EXPECT_NEAR(k(2, 2) / (4 * EI / L), 1.0, 1e-6);
    EXPECT_NEAR(k(2, 5) / (2 * EI / L), 1.0, 1e-6);
}

TEST(ElementStiffness, ZeroShearFactorIsHardError)
{
    ElementState e = unit_bar();
    e.section.shear_factor = 0.0;
    EXPECT_THROW(element_stiffness_local(e), DomainError);
}

TEST(ElementState, ShearModulusFromPoisson)
{
    const ElementState e = make_element_state({0, 0}, {2, 0}, plain(2.6e9, 1e-6, 0.3), 20, rectangular_section(1));
    EXPECT_NEAR(e.G, 1e9, 1e-3);
    EXPECT_DOUBLE_EQ(e.length, 2.0);
}

TEST(ElementState, RejectsZeroLength)
{
    EXPECT_THROW(make_element_state({1, 1}, {1, 1}, plain(1, 1), 20, rectangular_section(1)), DomainError);
}

TEST(ThermalLoad, AxialPairNoBending)
{
    const ElementState e = make_element_state({0, 0}, {0, 3}, plain(2e9, 1e-5), 20, rectangular_section(0.5));
    const Vector6 f = element_thermal_load(e, 100.0);
    const double N = 2e9 * 0.5 * 1e-5 * 100.0;
    EXPECT_NEAR(f(1), -N, 1e-9 * N);
    EXPECT_NEAR(f(4), N, 1e-9 * N);
    EXPECT_NEAR(f(0), 0.0, 1e-9 * N);
    EXPECT_NEAR(f(3), 0.0, 1e-9 * N);
    EXPECT_EQ(f(2), 0.0);
    EXPECT_EQ(f(5), 0.0);
}

TEST(Cantilever, MatchesTimoshenkoWithinHalfPercent)
{
    const auto r = cantilever_tip_deflection(5.0 / 6.0, 16);
    EXPECT_LT(std::abs(r.fem - r.analytic) / r.analytic, 5e-3);
}

TEST(FreeBar, ThermalExpansionExact)
{
    EXPECT_LT(free_bar_thermal_error(), 1e-10);
}

TEST(Assemble, SpringsInSeries)
{
    const Mesh m = line_mesh(2, 4.0, 0.1);
    const auto mats = MaterialTable::defaults();
    GlobalSystem sys = assemble(m, mats, 20.0, 0.0);
    sys.F(Mesh::dof(2, 0)) = 1.0;
    const Eigen::VectorXd u = solve_supported(sys, {0, 1, 2, Mesh::dof(1, 1), Mesh::dof(2, 1)});
    const double EA = mats[MaterialId::Aluminium].youngs(20) * 0.1;
    EXPECT_NEAR(u(Mesh::dof(2, 0)) * EA / 4.0, 1.0, 1e-9);
}

TEST(Assemble, Errors)
{
    const auto mats = MaterialTable::defaults();
    Mesh empty;
    empty.section = rectangular_section(1);
    empty.nodes = {{0, 0}};
    EXPECT_THROW(assemble(empty, mats, 20, 0), DomainError);

    Mesh loop = line_mesh(1, 1.0, 1.0);
    loop.elements[0].n1 = 0;
    EXPECT_THROW(assemble(loop, mats, 20, 0), DomainError);

    Mesh dup = line_mesh(1, 1.0, 1.0);
    dup.elements.push_back({1, 0, MaterialId::Aluminium, 0});
    EXPECT_THROW(assemble(dup, mats, 20, 0), DomainError);
}

TEST(Assemble, SymmetricWithNullityThree)
{
    const Mesh m = rve_mesh(kDesign);
    // One stiff material so the rigid-body null space is well separated numerically.
    const auto mats = single_material(MaterialTable::defaults(), MaterialId::Invar);
    const GlobalSystem sys = assemble(m, mats, 20.0, 0.0);
    const Eigen::MatrixXd k(sys.K);
    EXPECT_LT((k - k.transpose()).norm(), 1e-10 * k.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    const auto& ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    int zero = 0;
    for (int i = 0; i < ev.size(); ++i) {
        EXPECT_GT(ev(i), -1e-9 * top);
        zero += std::abs(ev(i)) < 1e-9 * top;
    }
    EXPECT_EQ(zero, 3);
}

TEST(Pbc, RelationCounts)
{
    const Mesh m = rve_mesh({100, 13.34, 23.85, 0.5});
    const PbcConstraintSet c = build_pbc_constraints(m);
    EXPECT_EQ(c.lr_pairs, 3);
    EXPECT_EQ(c.bt_pairs, 3);
    EXPECT_EQ(c.relations.size(), 27u);
    EXPECT_EQ(c.anchored.size(), 2u);
    bool dx = false, dy = false;
    for (const auto& r : c.relations) {
        dx = dx || r.cx != 0.0;
        dy = dy || r.cy != 0.0;
    }
    EXPECT_TRUE(dx);
    EXPECT_TRUE(dy);
}

TEST(Pbc, EveryBoundaryNodeConstrained)
{
    const Mesh m = rve_mesh(kDesign);
    const PbcConstraintSet c = build_pbc_constraints(m);
    std::vector<int> seen(m.nodes.size(), 0);
    for (const auto& r : c.relations) {
        seen[r.slave / 3] = 1;
        seen[r.master / 3] = 1;
    }
    const auto& b = m.boundary;
    for (const auto* set : {&b.left, &b.right, &b.bottom, &b.top})
        for (int n : *set)
            EXPECT_TRUE(seen[n]);
    for (int n : b.corners)
        EXPECT_TRUE(seen[n]);
}

TEST(Pbc, MissingCornerIsError)
{
    Mesh m = rve_mesh(kDesign);
    m.boundary.corners[2] = -1;
    EXPECT_THROW(build_pbc_constraints(m), DomainError);
}

TEST(Pbc, UnpairableNodeIsError)
{
    Mesh m = rve_mesh(kDesign);
    m.nodes[m.boundary.right[0]].y += 0.01 * m.edge_length;
    EXPECT_THROW(build_pbc_constraints(m), DomainError);
}

TEST(Pbc, AffineFieldSatisfiesRelations)
{
    const Mesh m = rve_mesh(kDesign);
    const PbcConstraintSet c = build_pbc_constraints(m);
    const double ex = 3e-3, ey = -1e-3, L = m.edge_length;
    const Vec2 o = m.nodes[c.anchor_node];
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m.ndof());
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        u(Mesh::dof(i, 0)) = ex * (m.nodes[i].x - o.x);
        u(Mesh::dof(i, 1)) = ey * (m.nodes[i].y - o.y);
    }
    EXPECT_LT(max_constraint_violation(c, u, ex * L, ey * L), 1e-14);
    EXPECT_GT(max_constraint_violation(c, u, 2 * ex * L, ey * L), 1e-3);
}

TEST(Solve, SingleMaterialThermalIsStressFree)
{
    const Mesh m = rve_mesh(kDesign);
    const auto mats = single_material(MaterialTable::defaults(), MaterialId::Aluminium);
    const GlobalSystem sys = assemble(m, mats, 200.0, 180.0);
    const PbcConstraintSet c = build_pbc_constraints(m);
    const SolutionField f = solve_constrained(sys, c);
    const double alpha = mats[MaterialId::Aluminium].alpha(200);
    EXPECT_NEAR(f.dx / (m.edge_length * 180.0), alpha, 1e-6 * alpha);
    EXPECT_NEAR(f.dy, f.dx, 1e-9 * f.dx);
    double worst = 0.0;
    for (int e = 0; e < static_cast<int>(m.elements.size()); ++e)
        worst = std::max(worst, element_end_forces(m, mats, 200.0, 180.0, f.u, e).cwiseAbs().maxCoeff());
    const double N = mats[MaterialId::Aluminium].youngs(200) * m.section.area * alpha * 180.0;
    EXPECT_LT(worst, 1e-6 * N);
}

TEST(Solve, ResidualAndConstraintTolerances)
{
    const Mesh m = rve_mesh({100, 25.01, 40, 0.5});
    const auto mats = MaterialTable::defaults();
    const PbcConstraintSet c = build_pbc_constraints(m);
    const GlobalSystem th = assemble(m, mats, 200.0, 180.0);
    const SolutionField f = solve_constrained(th, c);
    EXPECT_LE(f.residual_norm, 1e-8 * f.load_norm);
    const double scale = std::max(std::abs(f.dx), 23e-6 * 180.0 * m.edge_length);
    EXPECT_LE(max_constraint_violation(c, f.u, f.dx, f.dy), 1e-9 * scale);
    for (int d : c.anchored)
        EXPECT_EQ(f.u(d), 0.0);
}

TEST(Solve, ZeroPrescribedExtensionGivesZeroField)
{
    const Mesh m = rve_mesh(kDesign);
    const GlobalSystem sys = assemble(m, MaterialTable::defaults(), 20.0, 0.0);
    const SolutionField f = solve_constrained(sys, build_pbc_constraints(m), 0.0);
    EXPECT_EQ(f.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.dy, 0.0);
}

TEST(Solve, LinearInPrescribedExtension)
{
    const Mesh m = rve_mesh(kDesign);
    const GlobalSystem sys = assemble(m, MaterialTable::defaults(), 20.0, 0.0);
    const PbcConstraintSet c = build_pbc_constraints(m);
    const SolutionField a = solve_constrained(sys, c, 0.1);
    const SolutionField b = solve_constrained(sys, c, 0.3);
    EXPECT_NEAR(b.dy, 3.0 * a.dy, 1e-9 * std::abs(b.dy));
    EXPECT_LT((b.u - 3.0 * a.u).norm(), 1e-9 * b.u.norm());
}

TEST(Solve, AuxeticSignForMinPrDesign)
{
    const Mesh m = rve_mesh({100, 13.34, 23.85, 0.5});
    const GlobalSystem sys = assemble(m, MaterialTable::defaults(), 20.0, 0.0);
    const SolutionField f = solve_constrained(sys, build_pbc_constraints(m), 1e-3 * m.edge_length);
    EXPECT_GT(f.dy, 0.0);
}

TEST(Solve, PrescribedExtensionWithThermalLoadRejected)
{
    const Mesh m = rve_mesh(kDesign);
    const GlobalSystem sys = assemble(m, MaterialTable::defaults(), 200.0, 180.0);
    EXPECT_THROW(solve_constrained(sys, build_pbc_constraints(m), 1.0), DomainError);
}

TEST(Solve, RandomDesignsMeetTolerances)
{
    std::mt19937_64 rng(17);
    const auto b = default_bounds();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        RveParams p;
        auto arr = p.as_array();
        for (int k = 0; k < 4; ++k)
            arr[k] = b[k].lo + (b[k].hi - b[k].lo) * u(rng);
        p = RveParams::from_array(arr);
        const Mesh m = rve_mesh(p);
        const PbcConstraintSet c = build_pbc_constraints(m);
        const SolutionField f = solve_constrained(assemble(m, MaterialTable::defaults(), 200.0, 180.0), c);
        EXPECT_LE(f.residual_norm, 1e-8 * f.load_norm);
        EXPECT_NEAR(f.dx, f.dy, 1e-6 * std::abs(f.dx));
    }
}
