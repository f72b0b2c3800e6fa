#pragma once

#include "starlat/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <vector>

namespace starlat {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

struct ElementState {
    double length = 0.0;
    double cos = 1.0;
    double sin = 0.0;
    double E = 0.0;
    double G = 0.0;
    double alpha = 0.0;
    Section section;
};

ElementState make_element_state(const Vec2& a, const Vec2& b, const Material& mat, double temperature,
                                 const Section& section);

// Local-axis stiffness, DOF order (u1, v1, th1, u2, v2, th2).
Matrix6 element_stiffness_local(const ElementState& e);
// Same in global axes.
Matrix6 element_stiffness(const ElementState& e);
Vector6 element_thermal_load(const ElementState& e, double delta_t);
// Rotation taking global element DOFs to local ones.
Matrix6 element_rotation(const ElementState& e);

struct GlobalSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd F;
    double temperature = 20.0;
    double delta_t = 0.0;

    int ndof() const { return static_cast<int>(F.size()); }
};

GlobalSystem assemble(const Mesh& mesh, const MaterialTable& materials, double temperature, double delta_t);

// u[slave] - u[master] = cx * dx + cy * dy
struct PbcRelation {
    int slave = 0;
    int master = 0;
    double cx = 0.0;
    double cy = 0.0;
};

struct PbcConstraintSet {
    std::vector<PbcRelation> relations;
    std::vector<int> anchored;  // DOFs fixed to zero
    int anchor_node = -1;
    int lr_pairs = 0;
    int bt_pairs = 0;
};

PbcConstraintSet build_pbc_constraints(const Mesh& mesh);

struct SolutionField {
    Eigen::VectorXd u;
    double dx = 0.0;
    double dy = 0.0;
    double residual_norm = 0.0;
    double load_norm = 0.0;
};

SolutionField solve_constrained(const GlobalSystem& sys, const PbcConstraintSet& c,
                                std::optional<double> prescribed_dx = std::nullopt);

// Plain Dirichlet solve with the listed DOFs fixed to zero.
Eigen::VectorXd solve_supported(const GlobalSystem& sys, const std::vector<int>& fixed);

double max_constraint_violation(const PbcConstraintSet& c, const Eigen::VectorXd& u, double dx, double dy);

// Local end forces (k_local * u_local - thermal) of one element.
Vector6 element_end_forces(const Mesh& mesh, const MaterialTable& materials, double temperature, double delta_t,
                           const Eigen::VectorXd& u, int element);

}  // namespace starlat
