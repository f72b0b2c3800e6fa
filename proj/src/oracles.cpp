#include "starlat/oracles.hpp"

#include <cmath>
#include <sstream>

namespace starlat {

namespace {

std::string fmt(const char* name, double v)
{
    std::ostringstream s;
    s << name << '=' << v;
    return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Material linear_material(double E, double nu, double alpha)
{
    return {"test", {{20.0, E}}, {{20.0, alpha}}, nu};
}

Mesh straight_bar(double length, int elements, double t, double shear_factor)
{
    Mesh m;
    m.edge_length = length;
    m.section = rectangular_section(t, shear_factor);
    for (int i = 0; i <= elements; ++i)
        m.nodes.push_back({length * i / elements, 0.0});
    for (int i = 0; i < elements; ++i)
        m.elements.push_back({i, i + 1, MaterialId::Aluminium, 0});
    return m;
}

template <class F>
Check guarded(const std::string& name, F&& body)
{
    try {
        return body();
    } catch (const std::exception& e) {
        return {name, false, std::string("error: ") + e.what()};
    }
}

}  // namespace

CantileverResult cantilever_tip_deflection(double shear_factor, int elements)
{
    const double L = 10.0, E = 1e9, nu = 0.3, P = 1.0;
    MaterialTable mats = MaterialTable::defaults();
    mats[MaterialId::Aluminium] = linear_material(E, nu, 0.0);
    const Mesh mesh = straight_bar(L, elements, 1.0, shear_factor);
    GlobalSystem sys = assemble(mesh, mats, 20.0, 0.0);
    sys.F[Mesh::dof(elements, 1)] = P;
    const Eigen::VectorXd u = solve_supported(sys, {0, 1, 2});

    const Section sec = mesh.section;
    const double G = E / (2.0 * (1.0 + nu));
    CantileverResult r;
    r.fem = u[Mesh::dof(elements, 1)];
    r.analytic = P * L * L * L / (3.0 * E * sec.inertia) + P * L / (shear_factor * G * sec.area);
    return r;
}

double free_bar_thermal_error()
{
    const double L = 1.0, alpha = 1e-5, dT = 180.0;
    MaterialTable mats = MaterialTable::defaults();
    mats[MaterialId::Aluminium] = linear_material(1.0, 0.3, alpha);
    const Mesh mesh = straight_bar(L, 1, 1.0, 5.0 / 6.0);
    const GlobalSystem sys = assemble(mesh, mats, 20.0, dT);
    const Eigen::VectorXd u = solve_supported(sys, {0, 1, 2});
    return rel(u[Mesh::dof(1, 0)], alpha * dT * L);
}

MaterialTable single_material(const MaterialTable& base, MaterialId keep)
{
    MaterialTable m = base;
    for (auto id : {MaterialId::Aluminium, MaterialId::Invar, MaterialId::Weak})
        m[id] = base[keep];
    return m;
}

MaterialTable scale_weak(const MaterialTable& base, double factor)
{
    MaterialTable m = base;
    for (auto& [t, e] : m[MaterialId::Weak].e_points)
        e *= factor;
    return m;
}

Check check_cantilever(const HomogenizationSettings& s)
{
    const std::string name = "timoshenko cantilever";
    return guarded(name, [&] {
        const auto r = cantilever_tip_deflection(s.shear_factor);
        const double e = rel(r.fem, r.analytic);
        return Check{name, std::isfinite(e) && e < 5e-3, fmt("rel_error", e)};
    });
}

Check check_free_thermal_bar()
{
    const std::string name = "free thermal bar";
    return guarded(name, [&] {
        const double e = free_bar_thermal_error();
        return Check{name, e < 1e-10, fmt("rel_error", e)};
    });
}

Check check_single_material(const HomogenizationSettings& s, const RveParams& p)
{
    const std::string name = "single-material rve";
    return guarded(name, [&] {
        HomogenizationSettings al = s;
        al.materials = single_material(s.materials, MaterialId::Aluminium);
        const auto h = evaluate_design(p, al);
        const double want = al.materials[MaterialId::Aluminium].alpha(s.t_ref + s.delta_t);
        const double e = rel(h.alpha, want);
        return Check{name, e < 1e-6, fmt("rel_error", e)};
    });
}

Check check_thermal_symmetry(const HomogenizationSettings& s, const RveParams& p)
{
    const std::string name = "thermal square symmetry";
    return guarded(name, [&] {
        const auto h = evaluate_design(p, s);
        const double e = std::abs(h.diag.thermal_dx - h.diag.thermal_dy) / std::abs(h.diag.thermal_dx);
        return Check{name, e <= 1e-6, fmt("rel_gap", e)};
    });
}

Check check_strain_invariance(const HomogenizationSettings& s, const RveParams& p)
{
    const std::string name = "prescribed strain invariance";
    return guarded(name, [&] {
        double worst = 0.0, ref = 0.0;
        for (double strain : {1e-3, 1e-4, 1e-2}) {
            HomogenizationSettings t = s;
            t.strain = strain;
            const double nu = evaluate_design(p, t).nu;
            if (strain == 1e-3)
                ref = nu;
            else
                worst = std::max(worst, std::abs(nu - ref));
        }
        return Check{name, worst <= 1e-9, fmt("max_nu_change", worst)};
    });
}

Check check_scale_invariance(const HomogenizationSettings& s, const RveParams& p, double scale)
{
    const std::string name = "geometric scale invariance";
    return guarded(name, [&] {
        const auto a = evaluate_design(p, s);
        const auto b = evaluate_design({p.h1 * scale, p.h2 * scale, p.theta_deg, p.t * scale}, s);
        const double e = std::max(rel(b.nu, a.nu), rel(b.alpha, a.alpha));
        return Check{name, e <= 1e-9, fmt("rel_change", e)};
    });
}

Check check_weak_sensitivity(const HomogenizationSettings& s, const RveParams& p, double factor)
{
    const std::string name = "weak material insensitivity";
    return guarded(name, [&] {
        HomogenizationSettings t = s;
        t.materials = scale_weak(s.materials, factor);
        const auto a = evaluate_design(p, s);
        const auto b = evaluate_design(p, t);
        const double e = std::max(rel(b.nu, a.nu), rel(b.alpha, a.alpha));
        return Check{name, e < 1e-3, fmt("rel_change", e)};
    });
}

Check check_mesh_convergence(const HomogenizationSettings& s, const RveParams& p)
{
    const std::string name = "mesh convergence";
    return guarded(name, [&] {
        HomogenizationSettings fine = s;
        fine.seed_factor = s.seed_factor / 2.0;
        const auto a = evaluate_design(p, s);
        const auto b = evaluate_design(p, fine);
        const double e = std::max(rel(b.nu, a.nu), rel(b.alpha, a.alpha));
        return Check{name, e < 1e-2, fmt("rel_change", e)};
    });
}

OptimizationProblem constrained_sphere()
{
    OptimizationProblem p;
    p.label = "constrained sphere";
    p.bounds = {{-5.0, 5.0}, {-5.0, 5.0}};
    p.constraint_count = 1;
    p.evaluate = [](std::span<const double> x) {
        return PointValue{x[0] * x[0] + x[1] * x[1], {1.0 - x[0] - x[1]}, true};
    };
    return p;
}

OptimizationProblem rosenbrock()
{
    OptimizationProblem p;
    p.label = "rosenbrock";
    p.bounds = {{-2.0, 2.0}, {-2.0, 2.0}};
    p.evaluate = [](std::span<const double> x) {
        const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        return PointValue{a * a + 100.0 * b * b, {}, true};
    };
    return p;
}

Check check_sphere(Optimizer which, const OptConfig& c, std::uint64_t seed)
{
    const std::string name = optimizer_name(which) + " constrained sphere";
    return guarded(name, [&] {
        OptConfig cfg = c;
        cfg.max_evaluations = 5000;
        const auto r = run_optimizer(which, constrained_sphere(), cfg, seed);
        const bool ok = r.feasible && std::abs(r.f - 0.5) <= 1e-3 && std::abs(r.x[0] - 0.5) <= 1e-2 &&
                        std::abs(r.x[1] - 0.5) <= 1e-2 && r.evaluations <= 5000;
        std::ostringstream d;
        d << "f=" << r.f << " x=(" << r.x[0] << ", " << r.x[1] << ") evaluations=" << r.evaluations;
        return Check{name, ok, d.str()};
    });
}

Check check_rosenbrock(const OptConfig& c, std::uint64_t seed)
{
    const std::string name = "alpso rosenbrock";
    return guarded(name, [&] {
        OptConfig cfg = c;
        cfg.max_evaluations = 5000;
        const auto r = alpso_minimize(rosenbrock(), cfg, seed);
        std::ostringstream d;
        d << "f=" << r.f << " evaluations=" << r.evaluations;
        return Check{name, r.f <= 1e-4 && r.evaluations <= 5000, d.str()};
    });
}

Check report_stiffness_temperature(const HomogenizationSettings& s, const RveParams& p)
{
    const std::string name = "thermal stiffness temperature (info)";
    return guarded(name, [&] {
        const Mesh mesh = mesh_rve(build_rve(p), s.seed_factor, s.shear_factor);
        const PbcConstraintSet c = build_pbc_constraints(mesh);
        GlobalSystem hot = assemble(mesh, s.materials, s.t_ref + s.delta_t, s.delta_t);
        GlobalSystem cold = assemble(mesh, s.materials, s.t_ref, 0.0);
        cold.F = hot.F;
        cold.delta_t = s.delta_t;
        const double a_hot = solve_constrained(hot, c).dx;
        const double a_cold = solve_constrained(cold, c).dx;
        return Check{name, true, fmt("rel_change_in_cte", rel(a_cold, a_hot))};
    });
}

std::vector<Check> validation_battery(const HomogenizationSettings& s, const OptConfig& c)
{
    std::vector<Check> out;
    out.push_back(check_cantilever(s));
    out.push_back(check_free_thermal_bar());
    out.push_back(check_single_material(s, kMinPrDesign));
    out.push_back(check_thermal_symmetry(s, kMinNcteDesign));
    out.push_back(check_strain_invariance(s, kMinPrDesign));
    out.push_back(check_scale_invariance(s, kMinPrDesign, 3.7));
    out.push_back(check_weak_sensitivity(s, kMinPrDesign, 10.0));
    out.push_back(check_mesh_convergence(s, kMinNcteDesign));
    out.push_back(check_sphere(Optimizer::Alpso, c, 1));
    out.push_back(check_sphere(Optimizer::Alhso, c, 1));
    out.push_back(check_rosenbrock(c, 1));
    out.push_back(report_stiffness_temperature(s, kMinNcteDesign));
    return out;
}

}  // namespace starlat
