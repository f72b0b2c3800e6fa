#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace starlat {

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RveParams {
    double h1 = 0.0;
    double h2 = 0.0;
    double theta_deg = 0.0;
    double t = 0.0;

    std::array<double, 4> as_array() const { return {h1, h2, theta_deg, t}; }
    static RveParams from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
    bool operator==(const RveParams&) const = default;
};

inline constexpr std::array<const char*, 4> kParamNames = {"h1", "h2", "theta", "t"};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

using ParamBounds = std::array<Interval, 4>;

// Default design box.
ParamBounds default_bounds();

struct BoundViolation {
    std::string variable;
    double value = 0.0;
    double bound = 0.0;
    bool lower = true;
};

std::vector<BoundViolation> validate_params(const RveParams& p, const ParamBounds& bounds);

// Throws DomainError naming the first non-finite or non-positive field.
void check_positive(const RveParams& p);

enum class MaterialId { Aluminium = 0, Invar = 1, Weak = 2 };

const char* material_name(MaterialId id);

struct Material {
    std::string name;
    std::vector<std::pair<double, double>> e_points;      // (deg C, Pa)
    std::vector<std::pair<double, double>> alpha_points;  // (deg C, 1/K), secant from 20 C
    double nu = 0.3;

    double youngs(double temperature) const;
    double alpha(double temperature) const;
    double shear(double temperature) const { return youngs(temperature) / (2.0 * (1.0 + nu)); }
    void check() const;
};

struct MaterialTable {
    std::array<Material, 3> items;

    const Material& operator[](MaterialId id) const { return items[static_cast<std::size_t>(id)]; }
    Material& operator[](MaterialId id) { return items[static_cast<std::size_t>(id)]; }

    // Aluminium 7075, Invar 36 and the 1 kPa corner material.
    static MaterialTable defaults();
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Member {
    int a = 0;
    int b = 0;
    MaterialId material = MaterialId::Invar;
    double thickness = 0.0;
};

struct BoundarySets {
    std::vector<int> left;
    std::vector<int> right;
    std::vector<int> bottom;
    std::vector<int> top;
    std::array<int, 4> corners{-1, -1, -1, -1};  // BL, BR, TR, TL
};

struct RveModel {
    RveParams params;
    std::vector<Vec2> nodes;
    std::vector<Member> members;
    double edge_length = 0.0;
    BoundarySets boundary;
    Vec2 center;
};

// One member of the fundamental octant, endpoints in absolute coordinates.
struct TemplateSegment {
    Vec2 p;
    Vec2 q;
    MaterialId material;
};

struct LatticeTemplate {
    double edge_length = 0.0;
    std::vector<TemplateSegment> segments;
};

// Inverted bi-material star: Al rods on the axes, Invar legs and ribs,
// weak beams to the corners.
LatticeTemplate star_template(const RveParams& p);

double rve_edge_length(const RveParams& p);

RveModel build_rve(const RveParams& p);

struct Section {
    double area = 0.0;
    double inertia = 0.0;
    double shear_factor = 5.0 / 6.0;
};

Section rectangular_section(double t, double shear_factor = 5.0 / 6.0);

struct Element {
    int n0 = 0;
    int n1 = 0;
    MaterialId material = MaterialId::Invar;
    int member = 0;
};

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Element> elements;
    Section section;
    double edge_length = 0.0;
    BoundarySets boundary;

    int ndof() const { return 3 * static_cast<int>(nodes.size()); }
    static int dof(int node, int k) { return 3 * node + k; }
};

int member_divisions(double length, double edge_length, double seed_factor);

Mesh mesh_rve(const RveModel& model, double seed_factor = 0.085, double shear_factor = 5.0 / 6.0);

}  // namespace starlat
