#include "starlat/optimize.hpp"
#include "starlat/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

using namespace starlat;

namespace {

OptConfig budget(long n, int workers = 1)
{
    OptConfig c;
    c.max_evaluations = n;
    c.workers = workers;
    return c;
}

void expect_same(const OptResult& a, const OptResult& b)
{
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.g, b.g);
    EXPECT_EQ(a.evaluations, b.evaluations);
    EXPECT_EQ(a.feasible, b.feasible);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
        EXPECT_EQ(a.history[i].best_lagrangian, b.history[i].best_lagrangian);
}

}  // namespace

TEST(AugmentedLagrangian, HandExamples)
{
    EXPECT_DOUBLE_EQ(augmented_lagrangian(1.0, {}, {}, {}), 1.0);
    const double g1[] = {1.0}, l0[] = {0.0}, r1[] = {1.0};
    EXPECT_DOUBLE_EQ(augmented_lagrangian(0.0, g1, l0, r1), 1.0);
    const double gm[] = {-1.0}, l2[] = {2.0};
    EXPECT_DOUBLE_EQ(augmented_lagrangian(0.0, gm, l2, r1), -1.0);
}

TEST(AugmentedLagrangian, InactiveConstraintWithZeroMultiplierIgnored)
{
    const double g[] = {-5.0}, l[] = {0.0}, r[] = {10.0};
    EXPECT_DOUBLE_EQ(augmented_lagrangian(3.0, g, l, r), 3.0);
}

TEST(Alpso, ConstrainedSphere)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const OptResult r = alpso_minimize(constrained_sphere(), budget(5000), seed);
        EXPECT_TRUE(r.feasible);
        EXPECT_NEAR(r.f, 0.5, 1e-3);
        EXPECT_NEAR(r.x[0], 0.5, 1e-2);
        EXPECT_NEAR(r.x[1], 0.5, 1e-2);
        EXPECT_LE(r.evaluations, 5000);
    }
}

TEST(Alhso, ConstrainedSphere)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const OptResult r = alhso_minimize(constrained_sphere(), budget(5000), seed);
        EXPECT_TRUE(r.feasible);
        EXPECT_NEAR(r.f, 0.5, 1e-3);
        EXPECT_NEAR(r.x[0], 0.5, 1e-2);
        EXPECT_NEAR(r.x[1], 0.5, 1e-2);
        EXPECT_LE(r.evaluations, 5000);
    }
}

TEST(Alpso, Rosenbrock)
{
    const OptResult r = alpso_minimize(rosenbrock(), budget(5000), 1);
    EXPECT_LE(r.f, 1e-4);
    EXPECT_NEAR(r.x[0], 1.0, 0.05);
    EXPECT_LE(r.evaluations, 5000);
}

TEST(Optimizers, FeasibilityFlagMatchesReEvaluation)
{
    const auto prob = constrained_sphere();
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso}) {
        const OptResult r = run_optimizer(w, prob, budget(2000), 5);
        const PointValue v = prob.evaluate(r.x);
        EXPECT_EQ(v.f, r.f);
        EXPECT_EQ(v.g, r.g);
        bool ok = true;
        for (double g : v.g)
            ok = ok && g <= OptConfig{}.constraint_tol;
        EXPECT_EQ(ok, r.feasible);
    }
}

TEST(Optimizers, DeterministicPerSeed)
{
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso})
        expect_same(run_optimizer(w, constrained_sphere(), budget(1500), 9),
                    run_optimizer(w, constrained_sphere(), budget(1500), 9));
}

TEST(Optimizers, WorkerCountIndependent)
{
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso})
        for (int workers : {2, 3, 8})
            expect_same(run_optimizer(w, rosenbrock(), budget(1500, 1), 4),
                        run_optimizer(w, rosenbrock(), budget(1500, workers), 4));
}

TEST(Optimizers, DifferentSeedsDiffer)
{
    EXPECT_NE(alpso_minimize(rosenbrock(), budget(600), 1).x, alpso_minimize(rosenbrock(), budget(600), 2).x);
}

TEST(Optimizers, SamplesStayInsideBox)
{
    OptimizationProblem p = rosenbrock();
    p.bounds = {{0.3, 0.6}, {-0.2, 0.1}};
    std::atomic<int> outside{0};
    auto inner = p.evaluate;
    p.evaluate = [&, inner](std::span<const double> x) {
        if (x[0] < 0.3 || x[0] > 0.6 || x[1] < -0.2 || x[1] > 0.1)
            ++outside;
        return inner(x);
    };
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso}) {
        const OptResult r = run_optimizer(w, p, budget(2000, 2), 3);
        EXPECT_GE(r.x[0], 0.3);
        EXPECT_LE(r.x[1], 0.1);
    }
    EXPECT_EQ(outside.load(), 0);
}

TEST(Optimizers, BestFeasibleHistoryNonIncreasing)
{
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso}) {
        const OptResult r = run_optimizer(w, constrained_sphere(), budget(5000), 11);
        ASSERT_FALSE(r.history.empty());
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            EXPECT_LE(r.history[i].best_feasible_f, r.history[i - 1].best_feasible_f);
            EXPECT_GE(r.history[i].evaluations, r.history[i - 1].evaluations);
        }
    }
}

TEST(Optimizers, BudgetRespected)
{
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso})
        for (long n : {50L, 333L, 1000L})
            EXPECT_LE(run_optimizer(w, rosenbrock(), budget(n), 1).evaluations, n);
}

TEST(Optimizers, ThrowingRegionDoesNotCrash)
{
    OptimizationProblem p = constrained_sphere();
    auto inner = p.evaluate;
    p.evaluate = [inner](std::span<const double> x) {
        if (x[0] < 0.0)
            throw DomainError("left half is invalid");
        return inner(x);
    };
    for (Optimizer w : {Optimizer::Alpso, Optimizer::Alhso}) {
        const OptResult r = run_optimizer(w, p, budget(3000, 2), 2);
        EXPECT_TRUE(r.feasible);
        EXPECT_GE(r.x[0], 0.0);
        EXPECT_NEAR(r.f, 0.5, 1e-2);
    }
}

TEST(Optimizers, NoFeasiblePointFlagged)
{
    OptimizationProblem p = constrained_sphere();
    p.bounds = {{-1, 0}, {-1, 0}};  // x1 + x2 >= 1 unreachable
    const OptResult r = alpso_minimize(p, budget(800), 1);
    EXPECT_FALSE(r.feasible);
    EXPECT_NEAR(r.x[0], 0.0, 1e-2);
    EXPECT_NEAR(r.x[1], 0.0, 1e-2);
}

TEST(Optimizers, ConfigValidation)
{
    OptConfig c;
    c.swarm_size = 0;
    EXPECT_THROW(c.check(), DomainError);
    c = {};
    c.hs_hmcr = 1.5;
    EXPECT_THROW(c.check(), DomainError);
    EXPECT_NO_THROW(OptConfig{}.check());
}

TEST(Seeds, MixingIsStableAndSpread)
{
    EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
    EXPECT_NE(mix_seed(7, 3), mix_seed(7, 4));
    EXPECT_NE(hash_label(7, "PR MAX"), hash_label(7, "PR MIN"));
    EXPECT_EQ(hash_label(7, "PR MAX"), hash_label(7, "PR MAX"));
}

TEST(DesignProblem, ParseObjectivesAndConstraints)
{
    EXPECT_EQ(parse_objective("min-pr"), Objective::MinPr);
    EXPECT_EQ(parse_objective("near-zero-ncte"), Objective::NearZeroNcte);
    EXPECT_THROW(parse_objective("min-foo"), DomainError);

    const auto c = parse_constraint("ncte>=-0.1");
    EXPECT_EQ(c.quantity, Quantity::Ncte);
    EXPECT_TRUE(c.at_least);
    EXPECT_DOUBLE_EQ(c.value, -0.1);
    const auto d = parse_constraint("pr<=0");
    EXPECT_EQ(d.quantity, Quantity::Pr);
    EXPECT_FALSE(d.at_least);
    EXPECT_EQ(parse_constraint(d.str()).value, d.value);
    EXPECT_THROW(parse_constraint("ncte=0"), DomainError);
    EXPECT_THROW(parse_constraint("ncte>=abc"), DomainError);
}

TEST(DesignProblem, ObjectiveAndConstraintSigns)
{
    HomogenizedProps h;
    h.nu = -0.2;
    h.ncte = 0.3;
    EXPECT_DOUBLE_EQ(objective_value(Objective::MinPr, h), -0.2);
    EXPECT_DOUBLE_EQ(objective_value(Objective::MaxPr, h), 0.2);
    EXPECT_DOUBLE_EQ(objective_value(Objective::MaxNcte, h), -0.3);
    EXPECT_DOUBLE_EQ(objective_value(Objective::NearZeroNcte, h), 0.09);
    EXPECT_NEAR(constraint_value(parse_constraint("ncte>=0.25"), h), -0.05, 1e-15);
    EXPECT_NEAR(constraint_value(parse_constraint("pr<=-0.3"), h), 0.1, 1e-15);
}

TEST(DesignProblem, InvalidDesignGivesFailedPoint)
{
    auto ev = std::make_shared<DesignEvaluator>();
    ParamBounds b = default_bounds();
    b[1] = {0.0, 1e-14};  // legs too short to mesh
    const auto p = design_problem("bad", Objective::MinPr, {parse_constraint("ncte>=0")}, b, ev);
    const double x[] = {50, 0, 20, 1};
    EXPECT_FALSE(p.evaluate(x).ok);
    const OptResult r = alpso_minimize(p, budget(200), 1);
    EXPECT_FALSE(r.feasible);
}

TEST(Compare, RowShapeAndBookkeeping)
{
    OptConfig c = budget(240, 2);
    const auto rows = compare_optimizers({Objective::MinPr, Objective::MinNcte, Objective::NearZeroNcte}, {1}, c,
                                         HomogenizationSettings{}, default_bounds());
    ASSERT_EQ(rows.size(), 6u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.evaluations, r.memo_calls);
        EXPECT_LE(r.fea_runs, r.memo_calls);
        EXPECT_LE(r.evaluations, 240);
        EXPECT_TRUE(validate_params(r.design, default_bounds()).empty());
    }
    const std::string csv = comparison_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "objective,optimizer,seed,h1,h2,theta_deg,t,evaluations,fea_runs,feasible,nu,ncte,cte");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}
