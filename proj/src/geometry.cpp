#include "starlat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

namespace starlat {

ParamBounds default_bounds()
{
    return {{{5.0, 100.0}, {5.0, 100.0}, {5.0, 40.0}, {0.5, 5.0}}};
}

std::vector<BoundViolation> validate_params(const RveParams& p, const ParamBounds& bounds)
{
    std::vector<BoundViolation> out;
    const auto v = p.as_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= bounds[i].lo))
            out.push_back({kParamNames[i], v[i], bounds[i].lo, true});
        else if (!(v[i] <= bounds[i].hi))
            out.push_back({kParamNames[i], v[i], bounds[i].hi, false});
    }
    return out;
}

void check_positive(const RveParams& p)
{
    const auto v = p.as_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] <= 0.0) {
            std::ostringstream msg;
            msg << kParamNames[i] << " must be finite and > 0 (got " << v[i] << ")";
            throw DomainError(msg.str());
        }
    }
}

const char* material_name(MaterialId id)
{
    switch (id) {
    case MaterialId::Aluminium: return "aluminium";
    case MaterialId::Invar: return "invar";
    case MaterialId::Weak: return "weak";
    }
    return "?";
}

namespace {

double interp(const std::vector<std::pair<double, double>>& pts, double temperature)
{
    if (pts.empty())
        throw DomainError("material property table is empty");
    if (temperature <= pts.front().first)
        return pts.front().second;
    if (temperature >= pts.back().first)
        return pts.back().second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (temperature <= pts[i].first) {
            const auto& [t0, v0] = pts[i - 1];
            const auto& [t1, v1] = pts[i];
            return v0 + (v1 - v0) * (temperature - t0) / (t1 - t0);
        }
    }
    return pts.back().second;
}

void check_table(const std::string& name, const char* what, const std::vector<std::pair<double, double>>& pts)
{
    if (pts.empty())
        throw DomainError(name + ": " + what + " table is empty");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].first > pts[i - 1].first))
            throw DomainError(name + ": " + what + " temperatures must be strictly increasing");
}

}  // namespace

double Material::youngs(double temperature) const { return interp(e_points, temperature); }
double Material::alpha(double temperature) const { return interp(alpha_points, temperature); }

void Material::check() const
{
    check_table(name, "E", e_points);
    check_table(name, "alpha", alpha_points);
    for (const auto& [t, e] : e_points)
        if (!(e > 0.0) || !std::isfinite(e))
            throw DomainError(name + ": E must be > 0");
    if (!(nu > -1.0 && nu < 0.5))
        throw DomainError(name + ": nu must lie in (-1, 0.5)");
}

MaterialTable MaterialTable::defaults()
{
    MaterialTable m;
    m[MaterialId::Aluminium] = {"aluminium", {{20.0, 71e9}, {200.0, 66e9}}, {{20.0, 23.0e-6}, {200.0, 24.3e-6}}, 0.33};
    m[MaterialId::Invar] = {"invar", {{20.0, 144e9}, {200.0, 135e9}}, {{20.0, 1.1e-6}, {200.0, 2.5e-6}}, 0.29};
    m[MaterialId::Weak] = {"weak", {{20.0, 1e3}}, {{20.0, 1e-6}}, 0.3};
    return m;
}

double rve_edge_length(const RveParams& p)
{
    for (double v : p.as_array())
        if (!std::isfinite(v))
            throw DomainError("edge length needs finite parameters");
    const double th = p.theta_deg * std::numbers::pi / 180.0;
    return 2.0 * (p.h1 + p.h2 * std::cos(th));
}

LatticeTemplate star_template(const RveParams& p)
{
    const double th = p.theta_deg * std::numbers::pi / 180.0;
    const double c = p.h2 * (std::cos(th) - std::sin(th));  // notch on the x axis
    const double d = p.h2 * std::cos(th);                   // tip at (d, d)
    const double m = p.h1 + d;                              // half edge

    LatticeTemplate tpl;
    tpl.edge_length = 2.0 * m;
    tpl.segments = {
        {{c, 0.0}, {m, 0.0}, MaterialId::Aluminium},
        {{c, 0.0}, {d, d}, MaterialId::Invar},
        {{d, d}, {m, d}, MaterialId::Invar},
        {{d, d}, {m, m}, MaterialId::Weak},
    };
    return tpl;
}

namespace {

// The eight symmetries of the square.
Vec2 apply_d4(int k, Vec2 v)
{
    if (k & 4)
        std::swap(v.x, v.y);
    if (k & 1)
        v.x = -v.x;
    if (k & 2)
        v.y = -v.y;
    return v;
}

int find_or_add(std::vector<Vec2>& nodes, Vec2 v, double tol)
{
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (std::abs(nodes[i].x - v.x) <= tol && std::abs(nodes[i].y - v.y) <= tol)
            return static_cast<int>(i);
    nodes.push_back(v);
    return static_cast<int>(nodes.size()) - 1;
}

void check_connected(std::size_t n, const std::vector<Member>& members)
{
    std::vector<std::vector<int>> adj(n);
    for (const auto& mb : members) {
        adj[mb.a].push_back(mb.b);
        adj[mb.b].push_back(mb.a);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        int i = q.front();
        q.pop();
        for (int j : adj[i])
            if (!seen[j]) {
                seen[j] = 1;
                ++count;
                q.push(j);
            }
    }
    if (count != n)
        throw DomainError("lattice member graph is disconnected");
}

}  // namespace

RveModel build_rve(const RveParams& p)
{
    check_positive(p);
    if (p.theta_deg >= 45.0)
        throw DomainError("theta must be < 45 degrees (star notch would cross the centre)");

    const LatticeTemplate tpl = star_template(p);
    const double L = tpl.edge_length;
    const double tol = 1e-9 * L;
    const double half = 0.5 * L;

    RveModel model;
    model.params = p;
    model.edge_length = L;

    for (const auto& seg : tpl.segments) {
        const double len = std::hypot(seg.q.x - seg.p.x, seg.q.y - seg.p.y);
        if (!(len >= tol)) {
            std::ostringstream msg;
            msg << "degenerate geometry: " << material_name(seg.material) << " member of length " << len;
            throw DomainError(msg.str());
        }
        for (int k = 0; k < 8; ++k) {
            int a = find_or_add(model.nodes, apply_d4(k, seg.p), tol);
            int b = find_or_add(model.nodes, apply_d4(k, seg.q), tol);
            if (a > b)
                std::swap(a, b);
            const bool dup = std::any_of(model.members.begin(), model.members.end(),
                                         [&](const Member& mb) { return mb.a == a && mb.b == b; });
            if (!dup)
                model.members.push_back({a, b, seg.material, p.t});
        }
    }
    check_connected(model.nodes.size(), model.members);

    auto& bs = model.boundary;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const Vec2 v = model.nodes[i];
        const bool on_l = std::abs(v.x + half) <= tol, on_r = std::abs(v.x - half) <= tol;
        const bool on_b = std::abs(v.y + half) <= tol, on_t = std::abs(v.y - half) <= tol;
        const int id = static_cast<int>(i);
        if ((on_l || on_r) && (on_b || on_t))
            bs.corners[on_l ? (on_b ? 0 : 3) : (on_b ? 1 : 2)] = id;
        else if (on_l)
            bs.left.push_back(id);
        else if (on_r)
            bs.right.push_back(id);
        else if (on_b)
            bs.bottom.push_back(id);
        else if (on_t)
            bs.top.push_back(id);
    }
    auto by_y = [&](int a, int b) { return model.nodes[a].y < model.nodes[b].y; };
    auto by_x = [&](int a, int b) { return model.nodes[a].x < model.nodes[b].x; };
    std::sort(bs.left.begin(), bs.left.end(), by_y);
    std::sort(bs.right.begin(), bs.right.end(), by_y);
    std::sort(bs.bottom.begin(), bs.bottom.end(), by_x);
    std::sort(bs.top.begin(), bs.top.end(), by_x);
    return model;
}

Section rectangular_section(double t, double shear_factor)
{
    return {t, t * t * t / 12.0, shear_factor};
}

int member_divisions(double length, double edge_length, double seed_factor)
{
    const double ratio = length / (seed_factor * edge_length);
    // Guard against ratios such as 2.0000000000000004 from rounding.
    return std::max(1, static_cast<int>(std::ceil(ratio * (1.0 - 1e-12))));
}

Mesh mesh_rve(const RveModel& model, double seed_factor, double shear_factor)
{
    if (!(seed_factor > 0.0 && seed_factor <= 1.0))
        throw DomainError("seed factor must lie in (0, 1]");
    if (model.members.empty())
        throw DomainError("model has no members");

    Mesh mesh;
    mesh.nodes = model.nodes;
    mesh.edge_length = model.edge_length;
    mesh.boundary = model.boundary;
    mesh.section = rectangular_section(model.params.t, shear_factor);

    for (std::size_t mi = 0; mi < model.members.size(); ++mi) {
        const Member& mb = model.members[mi];
        const Vec2 a = model.nodes[mb.a], b = model.nodes[mb.b];
        const int n = member_divisions(std::hypot(b.x - a.x, b.y - a.y), model.edge_length, seed_factor);
        int prev = mb.a;
        for (int k = 1; k <= n; ++k) {
            int next = mb.b;
            if (k < n) {
                const double s = static_cast<double>(k) / n;
                mesh.nodes.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
                next = static_cast<int>(mesh.nodes.size()) - 1;
            }
            mesh.elements.push_back({prev, next, mb.material, static_cast<int>(mi)});
            prev = next;
        }
    }
    return mesh;
}

}  // namespace starlat
