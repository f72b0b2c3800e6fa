#include "starlat/homogenization.hpp"

#include <bit>
#include <cmath>

namespace starlat {

double poissons_ratio(double dx, double dy)
{
    if (!(std::abs(dx) >= 1e-15))
        throw DomainError("prescribed extension too small for a Poisson's ratio");
    return -dy / dx;
}

double cte_from_extension(double extension, double edge_length, double delta_t)
{
    return extension / (edge_length * delta_t);
}

double ncte(double alpha, double norm) { return alpha / norm; }

PoissonResult poissons_ratio(const Mesh& mesh, const HomogenizationSettings& s)
{
    const GlobalSystem sys = assemble(mesh, s.materials, s.t_ref, 0.0);
    const PbcConstraintSet c = build_pbc_constraints(mesh);
    PoissonResult r;
    r.field = solve_constrained(sys, c, s.strain * mesh.edge_length);
    r.nu = poissons_ratio(r.field.dx, r.field.dy);
    return r;
}

CteResult cte(const Mesh& mesh, const HomogenizationSettings& s)
{
    const GlobalSystem sys = assemble(mesh, s.materials, s.t_ref + s.delta_t, s.delta_t);
    const PbcConstraintSet c = build_pbc_constraints(mesh);
    CteResult r;
    r.field = solve_constrained(sys, c);
    const double dx = r.field.dx, dy = r.field.dy;
    if (std::abs(dx - dy) > 1e-6 * std::abs(dx))
        throw DomainError("thermal extensions differ in x and y; square symmetry is broken");
    r.alpha = cte_from_extension(dx, mesh.edge_length, s.delta_t);
    return r;
}

HomogenizedProps evaluate_design(const RveParams& p, const HomogenizationSettings& s)
{
    const RveModel model = build_rve(p);
    const Mesh mesh = mesh_rve(model, s.seed_factor, s.shear_factor);
    const PoissonResult pr = poissons_ratio(mesh, s);
    const CteResult cr = cte(mesh, s);

    HomogenizedProps out;
    out.nu = pr.nu;
    out.alpha = cr.alpha;
    out.ncte = ncte(cr.alpha, s.alpha_norm);
    out.diag.element_count = static_cast<int>(mesh.elements.size());
    out.diag.node_count = static_cast<int>(mesh.nodes.size());
    out.diag.edge_length = mesh.edge_length;
    out.diag.residual_mech = pr.field.residual_norm;
    out.diag.residual_thermal = cr.field.residual_norm;
    out.diag.mech_dx = pr.field.dx;
    out.diag.mech_dy = pr.field.dy;
    out.diag.thermal_dx = cr.field.dx;
    out.diag.thermal_dy = cr.field.dy;
    return out;
}

std::size_t DesignEvaluator::KeyHash::operator()(const Key& k) const
{
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : k.bits) {
        h ^= b;
        h *= 1099511628211ull;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

DesignEvaluator::Outcome DesignEvaluator::evaluate(const RveParams& p)
{
    const Key key{{std::bit_cast<std::uint64_t>(p.h1), std::bit_cast<std::uint64_t>(p.h2),
                   std::bit_cast<std::uint64_t>(p.theta_deg), std::bit_cast<std::uint64_t>(p.t)}};
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
    }
    Outcome out;
    try {
        out.props = evaluate_design(p, settings_);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    std::lock_guard lock(mutex_);
    // Two workers may race on the same key; both results are identical.
    if (memo_.emplace(key, out).second)
        ++computed_;
    return out;
}

std::uint64_t DesignEvaluator::calls() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

std::uint64_t DesignEvaluator::computed() const
{
    std::lock_guard lock(mutex_);
    return computed_;
}

}  // namespace starlat
