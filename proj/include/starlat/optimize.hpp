#pragma once

#include "starlat/geometry.hpp"
#include "starlat/homogenization.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace starlat {

// Value of the objective and all g(x) <= 0 constraints at one point.
struct PointValue {
    double f = 0.0;
    std::vector<double> g;
    bool ok = true;
};

struct OptimizationProblem {
    std::string label;
    std::vector<Interval> bounds;
    int constraint_count = 0;
    // Must be pure and thread-safe. May throw; the optimizer treats that as infeasible.
    std::function<PointValue(std::span<const double>)> evaluate;
};

struct OptConfig {
    int swarm_size = 40;
    int max_outer = 50;
    int inner_iterations = 10;
    double inertia_start = 0.9;
    double inertia_end = 0.4;
    double cognitive = 1.5;
    double social = 1.5;
    double velocity_clamp = 0.25;  // fraction of (hi - lo)
    double penalty_growth = 2.0;
    double initial_penalty = 1.0;
    double max_penalty = 1e6;
    double max_multiplier = 1e6;
    double constraint_tol = 1e-4;
    double stall_tol = 1e-4;
    int stall_iterations = 3;
    long max_evaluations = 0;  // 0 = no budget

    int hs_memory = 20;
    double hs_hmcr = 0.9;
    double hs_par = 0.35;
    double hs_bandwidth = 0.05;  // fraction of (hi - lo), at the start
    double hs_bandwidth_min = 1e-4;  // reached at the end of the run
    int hs_improvisations = 400;  // per outer iteration

    int workers = 1;
    // Warm start: each point seeds one particle exactly; the rest of
    // warm_fraction of the swarm is scattered around the first point.
    std::vector<std::vector<double>> warm_points;
    double warm_fraction = 0.2;

    void check() const;
};

struct OuterRecord {
    int outer = 0;
    long evaluations = 0;
    double best_lagrangian = 0.0;
    double best_feasible_f = 0.0;  // +inf until one is found
    double max_violation = 0.0;
};

struct OptResult {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> g;
    long evaluations = 0;
    bool feasible = false;
    std::vector<OuterRecord> history;
    std::uint64_t seed = 0;
};

double augmented_lagrangian(double f, std::span<const double> g, std::span<const double> lambda,
                            std::span<const double> r);

OptResult alpso_minimize(const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed);
OptResult alhso_minimize(const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t hash_label(std::uint64_t seed, const std::string& label);

// Design-space objectives.
enum class Objective { MinPr, MaxPr, MinNcte, MaxNcte, NearZeroNcte };
enum class Quantity { Pr, Ncte };

struct DesignConstraint {
    Quantity quantity = Quantity::Ncte;
    bool at_least = true;  // q >= value, else q <= value
    double value = 0.0;

    std::string str() const;
};

Objective parse_objective(const std::string& s);
std::string objective_name(Objective o);
DesignConstraint parse_constraint(const std::string& s);

double objective_value(Objective o, const HomogenizedProps& h);
double constraint_value(const DesignConstraint& c, const HomogenizedProps& h);

OptimizationProblem design_problem(const std::string& label, Objective o, const std::vector<DesignConstraint>& cons,
                                   const ParamBounds& bounds, std::shared_ptr<DesignEvaluator> evaluator);

enum class Optimizer { Alpso, Alhso };
Optimizer parse_optimizer(const std::string& s);
std::string optimizer_name(Optimizer o);
OptResult run_optimizer(Optimizer which, const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed);

struct ComparisonRow {
    Objective objective;
    Optimizer optimizer;
    std::uint64_t seed = 0;
    RveParams design;
    long evaluations = 0;
    long fea_runs = 0;
    long memo_calls = 0;
    bool feasible = false;
    double nu = 0.0;
    double ncte = 0.0;
    double alpha = 0.0;
};

std::vector<ComparisonRow> compare_optimizers(const std::vector<Objective>& objectives,
                                              const std::vector<std::uint64_t>& seeds, const OptConfig& c,
                                              const HomogenizationSettings& s, const ParamBounds& bounds);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace starlat
