#include "starlat/frame_fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace starlat {

ElementState make_element_state(const Vec2& a, const Vec2& b, const Material& mat, double temperature,
                                 const Section& section)
{
    ElementState e;
    const double dx = b.x - a.x, dy = b.y - a.y;
    e.length = std::hypot(dx, dy);
    if (!(e.length > 0.0))
        throw DomainError("element of zero length");
    e.cos = dx / e.length;
    e.sin = dy / e.length;
    e.E = mat.youngs(temperature);
    e.G = mat.shear(temperature);
    e.alpha = mat.alpha(temperature);
    e.section = section;
    return e;
}

Matrix6 element_stiffness_local(const ElementState& e)
{
    const double L = e.length, E = e.E, A = e.section.area, I = e.section.inertia;
    const double phi = 12.0 * E * I / (e.section.shear_factor * e.G * A * L * L);
    const double c = E * I / ((1.0 + phi) * L * L * L);
    const double ka = E * A / L;

    Matrix6 k = Matrix6::Zero();
    k(0, 0) = k(3, 3) = ka;
    k(0, 3) = k(3, 0) = -ka;

    const int idx[4] = {1, 2, 4, 5};
    const double b[4][4] = {
        {12.0, 6.0 * L, -12.0, 6.0 * L},
        {6.0 * L, (4.0 + phi) * L * L, -6.0 * L, (2.0 - phi) * L * L},
        {-12.0, -6.0 * L, 12.0, -6.0 * L},
        {6.0 * L, (2.0 - phi) * L * L, -6.0 * L, (4.0 + phi) * L * L},
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            k(idx[i], idx[j]) = c * b[i][j];

    if (!k.allFinite())
        throw DomainError("element stiffness has non-finite entries (check E, G, section and shear factor)");
    return k;
}

Matrix6 element_rotation(const ElementState& e)
{
    Matrix6 r = Matrix6::Zero();
    for (int n = 0; n < 2; ++n) {
        const int o = 3 * n;
        r(o, o) = e.cos;
        r(o, o + 1) = e.sin;
        r(o + 1, o) = -e.sin;
        r(o + 1, o + 1) = e.cos;
        r(o + 2, o + 2) = 1.0;
    }
    return r;
}

Matrix6 element_stiffness(const ElementState& e)
{
    const Matrix6 r = element_rotation(e);
    return r.transpose() * element_stiffness_local(e) * r;
}

Vector6 element_thermal_load(const ElementState& e, double delta_t)
{
    const double n = e.E * e.section.area * e.alpha * delta_t;
    Vector6 f;
    f << -n * e.cos, -n * e.sin, 0.0, n * e.cos, n * e.sin, 0.0;
    return f;
}

GlobalSystem assemble(const Mesh& mesh, const MaterialTable& materials, double temperature, double delta_t)
{
    if (mesh.elements.empty())
        throw DomainError("mesh has no elements");

    const int n = mesh.ndof();
    GlobalSystem sys;
    sys.temperature = temperature;
    sys.delta_t = delta_t;
    sys.F = Eigen::VectorXd::Zero(n);

    std::set<std::pair<int, int>> seen;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.elements.size() * 36);
    for (const Element& el : mesh.elements) {
        if (el.n0 == el.n1)
            throw DomainError("singular element connectivity at node " + std::to_string(el.n0));
        if (!seen.insert(std::minmax(el.n0, el.n1)).second)
            throw DomainError("duplicate element between nodes " + std::to_string(el.n0) + " and " +
                              std::to_string(el.n1));
        const ElementState st =
            make_element_state(mesh.nodes[el.n0], mesh.nodes[el.n1], materials[el.material], temperature, mesh.section);
        const Matrix6 k = element_stiffness(st);
        const int map[6] = {3 * el.n0, 3 * el.n0 + 1, 3 * el.n0 + 2, 3 * el.n1, 3 * el.n1 + 1, 3 * el.n1 + 2};
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                trip.emplace_back(map[i], map[j], k(i, j));
        if (delta_t != 0.0) {
            const Vector6 f = element_thermal_load(st, delta_t);
            for (int i = 0; i < 6; ++i)
                sys.F[map[i]] += f[i];
        }
    }
    sys.K.resize(n, n);
    sys.K.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

namespace {

std::string describe(const Mesh& mesh, int node)
{
    std::ostringstream s;
    s << "node " << node << " at (" << mesh.nodes[node].x << ", " << mesh.nodes[node].y << ")";
    return s.str();
}

// Pairs each node of `from` with the node of `to` sharing coordinate `axis`.
std::vector<std::pair<int, int>> pair_nodes(const Mesh& mesh, const std::vector<int>& from, const std::vector<int>& to,
                                            bool along_y, const char* side)
{
    const double tol = 1e-9 * mesh.edge_length;
    auto coord = [&](int i) { return along_y ? mesh.nodes[i].y : mesh.nodes[i].x; };
    std::vector<std::pair<int, int>> pairs;
    std::vector<char> used(to.size(), 0);
    for (int a : from) {
        int match = -1;
        for (std::size_t j = 0; j < to.size(); ++j)
            if (!used[j] && std::abs(coord(to[j]) - coord(a)) <= tol) {
                match = static_cast<int>(j);
                break;
            }
        if (match < 0)
            throw DomainError(std::string("unpairable ") + side + " boundary " + describe(mesh, a));
        used[match] = 1;
        pairs.emplace_back(a, to[match]);
    }
    for (std::size_t j = 0; j < to.size(); ++j)
        if (!used[j])
            throw DomainError(std::string("unpairable ") + side + " boundary " + describe(mesh, to[j]));
    return pairs;
}

}  // namespace

PbcConstraintSet build_pbc_constraints(const Mesh& mesh)
{
    const auto& bs = mesh.boundary;
    static const char* corner_names[4] = {"bottom-left", "bottom-right", "top-right", "top-left"};
    for (int k = 0; k < 4; ++k)
        if (bs.corners[k] < 0 || bs.corners[k] >= static_cast<int>(mesh.nodes.size()))
            throw DomainError(std::string("missing ") + corner_names[k] + " corner node");
    if (bs.bottom.empty())
        throw DomainError("bottom boundary has no nodes to anchor");

    PbcConstraintSet c;
    const auto lr = pair_nodes(mesh, bs.left, bs.right, true, "left/right");
    const auto bt = pair_nodes(mesh, bs.bottom, bs.top, false, "bottom/top");
    c.lr_pairs = static_cast<int>(lr.size());
    c.bt_pairs = static_cast<int>(bt.size());

    auto tie = [&](int slave, int master, double jx, double jy) {
        c.relations.push_back({Mesh::dof(slave, 0), Mesh::dof(master, 0), jx, 0.0});
        c.relations.push_back({Mesh::dof(slave, 1), Mesh::dof(master, 1), 0.0, jy});
        c.relations.push_back({Mesh::dof(slave, 2), Mesh::dof(master, 2), 0.0, 0.0});
    };
    for (const auto& [l, r] : lr)
        tie(r, l, 1.0, 0.0);
    for (const auto& [b, t] : bt)
        tie(t, b, 0.0, 1.0);
    const int bl = bs.corners[0];
    tie(bs.corners[1], bl, 1.0, 0.0);
    tie(bs.corners[2], bl, 1.0, 1.0);
    tie(bs.corners[3], bl, 0.0, 1.0);

    c.anchor_node = *std::min_element(bs.bottom.begin(), bs.bottom.end(), [&](int a, int b) {
        return std::abs(mesh.nodes[a].x) < std::abs(mesh.nodes[b].x);
    });
    c.anchored = {Mesh::dof(c.anchor_node, 0), Mesh::dof(c.anchor_node, 1)};
    return c;
}

SolutionField solve_constrained(const GlobalSystem& sys, const PbcConstraintSet& c,
                                std::optional<double> prescribed_dx)
{
    if (prescribed_dx && sys.delta_t != 0.0)
        throw DomainError("a prescribed extension needs a system without thermal load");
    if (prescribed_dx && !std::isfinite(*prescribed_dx))
        throw DomainError("prescribed extension must be finite");

    const int n = sys.ndof();
    enum Role : char { Free, Slave, Fixed };
    std::vector<char> role(n, Free);
    std::vector<int> master_of(n, -1);
    std::vector<double> cx(n, 0.0), cy(n, 0.0);
    for (int d : c.anchored)
        role[d] = Fixed;
    for (const auto& r : c.relations) {
        if (role[r.slave] != Free)
            throw DomainError("DOF " + std::to_string(r.slave) + " is constrained twice");
        role[r.slave] = Slave;
        master_of[r.slave] = r.master;
        cx[r.slave] = r.cx;
        cy[r.slave] = r.cy;
    }

    std::vector<int> qidx(n, -1);
    int nq = 0;
    for (int i = 0; i < n; ++i)
        if (role[i] == Free)
            qidx[i] = nq++;
    const int q_dx = prescribed_dx ? -1 : nq++;
    const int q_dy = nq++;

    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        if (role[i] == Free) {
            trip.emplace_back(i, qidx[i], 1.0);
        } else if (role[i] == Slave) {
            const int m = master_of[i];
            if (role[m] == Slave)
                throw DomainError("DOF " + std::to_string(m) + " is both master and slave");
            if (role[m] == Free)
                trip.emplace_back(i, qidx[m], 1.0);
            if (cx[i] != 0.0) {
                if (q_dx >= 0)
                    trip.emplace_back(i, q_dx, cx[i]);
                else
                    u0[i] += cx[i] * *prescribed_dx;
            }
            if (cy[i] != 0.0)
                trip.emplace_back(i, q_dy, cy[i]);
        }
    }
    Eigen::SparseMatrix<double> T(n, nq);
    T.setFromTriplets(trip.begin(), trip.end());

    const Eigen::SparseMatrix<double> Tt = T.transpose();
    const Eigen::SparseMatrix<double> Kr = Tt * sys.K * T;
    const Eigen::VectorXd fr = Tt * (sys.F - sys.K * u0);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kr);
    if (ldlt.info() != Eigen::Success)
        throw DomainError("constrained stiffness matrix is singular");
    Eigen::VectorXd q = ldlt.solve(fr);
    if (ldlt.info() != Eigen::Success || !q.allFinite())
        throw DomainError("constrained linear solve failed");
    Eigen::VectorXd res = fr - Kr * q;
    q += ldlt.solve(res);  // one refinement step
    res = fr - Kr * q;

    SolutionField sol;
    sol.load_norm = fr.norm();
    sol.residual_norm = res.norm();
    if (sol.residual_norm > 1e-8 * sol.load_norm)
        throw DomainError("constrained linear solve did not converge");
    sol.u = T * q + u0;
    sol.dx = prescribed_dx ? *prescribed_dx : q[q_dx];
    sol.dy = q[q_dy];
    return sol;
}

Eigen::VectorXd solve_supported(const GlobalSystem& sys, const std::vector<int>& fixed)
{
    const int n = sys.ndof();
    std::vector<int> idx(n, 0);
    for (int d : fixed)
        idx.at(d) = -1;
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (idx[i] == 0)
            idx[i] = m++;
        else
            idx[i] = -1;
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i)
        if (idx[i] >= 0)
            trip.emplace_back(i, idx[i], 1.0);
    Eigen::SparseMatrix<double> T(n, m);
    T.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SparseMatrix<double> Tt = T.transpose();
    const Eigen::SparseMatrix<double> Kr = Tt * sys.K * T;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kr);
    if (ldlt.info() != Eigen::Success)
        throw DomainError("supported stiffness matrix is singular");
    const Eigen::VectorXd q = ldlt.solve(Tt * sys.F);
    if (!q.allFinite())
        throw DomainError("supported linear solve failed");
    return T * q;
}

double max_constraint_violation(const PbcConstraintSet& c, const Eigen::VectorXd& u, double dx, double dy)
{
    double worst = 0.0;
    for (const auto& r : c.relations)
        worst = std::max(worst, std::abs(u[r.slave] - u[r.master] - r.cx * dx - r.cy * dy));
    for (int d : c.anchored)
        worst = std::max(worst, std::abs(u[d]));
    return worst;
}

Vector6 element_end_forces(const Mesh& mesh, const MaterialTable& materials, double temperature, double delta_t,
                           const Eigen::VectorXd& u, int element)
{
    const Element& el = mesh.elements.at(element);
    const ElementState st =
        make_element_state(mesh.nodes[el.n0], mesh.nodes[el.n1], materials[el.material], temperature, mesh.section);
    Vector6 ue;
    for (int k = 0; k < 3; ++k) {
        ue[k] = u[Mesh::dof(el.n0, k)];
        ue[3 + k] = u[Mesh::dof(el.n1, k)];
    }
    const Matrix6 r = element_rotation(st);
    return element_stiffness_local(st) * (r * ue) - r * element_thermal_load(st, delta_t);
}

}  // namespace starlat
