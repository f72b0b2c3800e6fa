#pragma once

#include "starlat/homogenization.hpp"
#include "starlat/optimize.hpp"

#include <string>
#include <vector>

namespace starlat {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Named designs from the reference study.
inline constexpr RveParams kMinPrDesign{100.0, 13.34, 23.85, 0.5};
inline constexpr RveParams kMinNcteDesign{100.0, 25.01, 40.0, 0.5};

struct CantileverResult {
    double fem = 0.0;
    double analytic = 0.0;
};

CantileverResult cantilever_tip_deflection(double shear_factor, int elements = 16);
// Relative error of the free-bar tip displacement against alpha * dT * L.
double free_bar_thermal_error();

MaterialTable single_material(const MaterialTable& base, MaterialId keep);
MaterialTable scale_weak(const MaterialTable& base, double factor);

Check check_cantilever(const HomogenizationSettings& s);
Check check_free_thermal_bar();
Check check_single_material(const HomogenizationSettings& s, const RveParams& p);
Check check_thermal_symmetry(const HomogenizationSettings& s, const RveParams& p);
Check check_strain_invariance(const HomogenizationSettings& s, const RveParams& p);
Check check_scale_invariance(const HomogenizationSettings& s, const RveParams& p, double scale);
Check check_weak_sensitivity(const HomogenizationSettings& s, const RveParams& p, double factor);
Check check_mesh_convergence(const HomogenizationSettings& s, const RveParams& p);
Check check_sphere(Optimizer which, const OptConfig& c, std::uint64_t seed);
Check check_rosenbrock(const OptConfig& c, std::uint64_t seed);
// Informational: CTE with thermal-case stiffness at 20 C instead of 200 C.
Check report_stiffness_temperature(const HomogenizationSettings& s, const RveParams& p);

OptimizationProblem constrained_sphere();
OptimizationProblem rosenbrock();

std::vector<Check> validation_battery(const HomogenizationSettings& s, const OptConfig& c);

}  // namespace starlat
