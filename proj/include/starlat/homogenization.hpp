#pragma once

#include "starlat/frame_fem.hpp"
#include "starlat/geometry.hpp"

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace starlat {

inline constexpr double kAlphaAluminium = 23e-6;

struct HomogenizationSettings {
    MaterialTable materials = MaterialTable::defaults();
    double seed_factor = 0.085;
    double shear_factor = 5.0 / 6.0;
    double t_ref = 20.0;
    double delta_t = 180.0;
    double alpha_norm = kAlphaAluminium;
    double strain = 1e-3;  // prescribed dx / L for the Poisson case
};

struct Diagnostics {
    int element_count = 0;
    int node_count = 0;
    double edge_length = 0.0;
    double residual_mech = 0.0;
    double residual_thermal = 0.0;
    double mech_dx = 0.0;
    double mech_dy = 0.0;
    double thermal_dx = 0.0;
    double thermal_dy = 0.0;
};

struct HomogenizedProps {
    double nu = 0.0;
    double alpha = 0.0;
    double ncte = 0.0;
    Diagnostics diag;
};

double poissons_ratio(double dx, double dy);
double cte_from_extension(double extension, double edge_length, double delta_t);
double ncte(double alpha, double norm = kAlphaAluminium);

struct PoissonResult {
    double nu = 0.0;
    SolutionField field;
};
struct CteResult {
    double alpha = 0.0;
    SolutionField field;
};

PoissonResult poissons_ratio(const Mesh& mesh, const HomogenizationSettings& s);
CteResult cte(const Mesh& mesh, const HomogenizationSettings& s);

HomogenizedProps evaluate_design(const RveParams& p, const HomogenizationSettings& s = {});

// Thread-safe memo keyed on the exact bits of the four parameters.
class DesignEvaluator {
public:
    struct Outcome {
        std::optional<HomogenizedProps> props;
        std::string error;
    };

    explicit DesignEvaluator(HomogenizationSettings s = {}) : settings_(std::move(s)) {}

    Outcome evaluate(const RveParams& p);
    const HomogenizationSettings& settings() const { return settings_; }
    std::uint64_t calls() const;
    std::uint64_t computed() const;

private:
    struct Key {
        std::array<std::uint64_t, 4> bits;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };

    HomogenizationSettings settings_;
    mutable std::mutex mutex_;
    std::unordered_map<Key, Outcome, KeyHash> memo_;
    std::uint64_t calls_ = 0;
    std::uint64_t computed_ = 0;
};

}  // namespace starlat
