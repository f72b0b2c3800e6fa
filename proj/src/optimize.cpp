#include "starlat/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace starlat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }
    int below(int n) { return static_cast<int>(uniform() * n) % n; }

private:
    std::uint64_t state_;
};

PointValue call_safely(const OptimizationProblem& p, std::span<const double> x)
{
    try {
        PointValue v = p.evaluate(x);
        if (!v.ok || !std::isfinite(v.f) || static_cast<int>(v.g.size()) != p.constraint_count)
            return {0.0, {}, false};
        for (double gi : v.g)
            if (!std::isfinite(gi))
                return {0.0, {}, false};
        return v;
    } catch (const std::exception&) {
        return {0.0, {}, false};
    }
}

std::vector<PointValue> evaluate_batch(const OptimizationProblem& p, const std::vector<std::vector<double>>& xs,
                                       int workers)
{
    std::vector<PointValue> out(xs.size());
    const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(xs.size())));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = call_safely(p, xs[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < xs.size(); i = next++)
                out[i] = call_safely(p, xs[i]);
        });
    for (auto& th : pool)
        th.join();
    return out;
}

double max_violation(const std::vector<double>& g)
{
    double v = 0.0;
    for (double gi : g)
        v = std::max(v, gi);
    return v;
}

// Bookkeeping shared by both optimizers: failure substitution in fixed
// order, best-feasible and least-violation tracking, evaluation count.
class Tracker {
public:
    Tracker(const OptimizationProblem& p, const OptConfig& c) : p_(p), c_(c) {}

    void absorb(const std::vector<double>& x, PointValue& v)
    {
        ++evaluations;
        if (!v.ok) {
            const double span = seen_ ? std::max(1.0, worst_f_ - best_f_) : 1.0;
            v.f = (seen_ ? worst_f_ : 0.0) + 10.0 * span;
            v.g.assign(p_.constraint_count, 1.0);
        } else {
            worst_f_ = seen_ ? std::max(worst_f_, v.f) : v.f;
            best_f_ = seen_ ? std::min(best_f_, v.f) : v.f;
            seen_ = true;
        }
        const double viol = v.ok ? max_violation(v.g) : kInf;
        if (v.ok && viol <= c_.constraint_tol) {
            if (v.f < best_feasible_f) {
                best_feasible_f = v.f;
                best_feasible_x = x;
            }
        }
        if (best_feasible_x.empty() && (viol < least_violation_ || (viol == least_violation_ && v.f < least_f_))) {
            least_violation_ = viol;
            least_f_ = v.f;
            least_x_ = x;
        }
    }

    bool budget_allows(long more) const
    {
        // One evaluation is kept back for certifying the result.
        return c_.max_evaluations <= 0 || evaluations + more <= c_.max_evaluations - 1;
    }

    OptResult finish(std::uint64_t seed, std::vector<OuterRecord> history)
    {
        OptResult r;
        r.seed = seed;
        r.history = std::move(history);
        r.x = best_feasible_x.empty() ? least_x_ : best_feasible_x;
        PointValue v = call_safely(p_, r.x);
        ++evaluations;
        r.evaluations = evaluations;
        r.f = v.ok ? v.f : kInf;
        r.g = v.g;
        r.feasible = v.ok && max_violation(v.g) <= c_.constraint_tol;
        return r;
    }

    long evaluations = 0;
    double best_feasible_f = kInf;
    std::vector<double> best_feasible_x;

private:
    const OptimizationProblem& p_;
    const OptConfig& c_;
    bool seen_ = false;
    double worst_f_ = 0.0;
    double best_f_ = 0.0;
    double least_violation_ = kInf;
    double least_f_ = kInf;
    std::vector<double> least_x_;
};

struct Multipliers {
    std::vector<double> lambda;
    std::vector<double> r;
    std::vector<double> g_prev;

    Multipliers(int m, double r0) : lambda(m, 0.0), r(m, r0), g_prev(m, kInf) {}

    double lagrangian(const PointValue& v) const { return augmented_lagrangian(v.f, v.g, lambda, r); }

    void update(const std::vector<double>& g, const OptConfig& c)
    {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double theta = std::max(g[i], -lambda[i] / (2.0 * r[i]));
            lambda[i] = std::clamp(lambda[i] + 2.0 * r[i] * theta, 0.0, c.max_multiplier);
            if (g[i] > c.constraint_tol && std::abs(g[i]) >= std::abs(g_prev[i]))
                r[i] = std::min(r[i] * c.penalty_growth, c.max_penalty);
            g_prev[i] = g[i];
        }
    }
};

void check_problem(const OptimizationProblem& p)
{
    if (p.bounds.empty())
        throw DomainError("optimization problem has no variables");
    for (const auto& b : p.bounds)
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
            throw DomainError("every bound needs finite lo < hi");
    if (!p.evaluate)
        throw DomainError("optimization problem has no evaluation function");
}

std::vector<double> clip(std::vector<double> x, const std::vector<Interval>& b)
{
    for (std::size_t d = 0; d < x.size(); ++d)
        x[d] = std::clamp(x[d], b[d].lo, b[d].hi);
    return x;
}

void warm_point(std::vector<double>& x, const OptConfig& c, const std::vector<Interval>& b, Rng& rng, int slot)
{
    const bool exact = slot < static_cast<int>(c.warm_points.size());
    const auto& src = c.warm_points[exact ? slot : 0];
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double range = b[d].hi - b[d].lo;
        x[d] = src[d] + (exact ? 0.0 : 0.05 * range * rng.symmetric());
    }
    x = clip(std::move(x), b);
}

int warm_count(const OptConfig& c, int population, std::size_t dims)
{
    if (c.warm_points.empty())
        return 0;
    for (const auto& w : c.warm_points)
        if (w.size() != dims)
            throw DomainError("warm-start point has the wrong dimension");
    const int n = std::max<int>(c.warm_points.size(), static_cast<int>(std::ceil(c.warm_fraction * population)));
    return std::min(n, population);
}

}  // namespace

void OptConfig::check() const
{
    if (swarm_size < 1 || max_outer < 1 || inner_iterations < 1 || hs_memory < 2 || hs_improvisations < 1)
        throw DomainError("optimizer sizes and iteration counts must be positive");
    if (!(constraint_tol > 0.0) || !(stall_tol > 0.0) || !(initial_penalty > 0.0) || !(penalty_growth >= 1.0))
        throw DomainError("optimizer tolerances and penalties must be positive");
    if (!(velocity_clamp > 0.0) || !(hs_bandwidth > 0.0) || !(hs_bandwidth_min > 0.0) || !(cognitive >= 0.0) || !(social >= 0.0))
        throw DomainError("optimizer coefficients must be positive");
    if (!(hs_hmcr >= 0.0 && hs_hmcr <= 1.0) || !(hs_par >= 0.0 && hs_par <= 1.0))
        throw DomainError("harmony search rates must lie in [0, 1]");
    if (!(warm_fraction >= 0.0 && warm_fraction <= 1.0))
        throw DomainError("warm fraction must lie in [0, 1]");
}

double augmented_lagrangian(double f, std::span<const double> g, std::span<const double> lambda,
                            std::span<const double> r)
{
    double L = f;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double theta = std::max(g[i], -lambda[i] / (2.0 * r[i]));
        L += lambda[i] * theta + r[i] * theta * theta;
    }
    return L;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t s = seed ^ (0x632be59bd9b4e019ull * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

std::uint64_t hash_label(std::uint64_t seed, const std::string& label)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return mix_seed(seed, h);
}

OptResult alpso_minimize(const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed)
{
    check_problem(p);
    c.check();
    const std::size_t n = p.bounds.size();
    const int S = c.swarm_size;
    const auto& b = p.bounds;

    Tracker tr(p, c);
    Multipliers mult(p.constraint_count, c.initial_penalty);

    std::vector<Rng> rngs;
    for (int i = 0; i < S; ++i)
        rngs.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(i)));

    std::vector<std::vector<double>> x(S, std::vector<double>(n)), v = x;
    const int nwarm = warm_count(c, S, n);
    for (int i = 0; i < S; ++i) {
        for (std::size_t d = 0; d < n; ++d) {
            const double range = b[d].hi - b[d].lo;
            x[i][d] = b[d].lo + range * rngs[i].uniform();
            v[i][d] = c.velocity_clamp * range * rngs[i].symmetric();
        }
        if (i < nwarm)
            warm_point(x[i], c, b, rngs[i], i);
    }

    std::vector<OuterRecord> history;
    if (!tr.budget_allows(S))
        return tr.finish(seed, history);

    std::vector<PointValue> val = evaluate_batch(p, x, c.workers);
    for (int i = 0; i < S; ++i)
        tr.absorb(x[i], val[i]);
    std::vector<std::vector<double>> pbest_x = x;
    std::vector<PointValue> pbest = val;

    long horizon = static_cast<long>(c.max_outer) * c.inner_iterations;
    if (c.max_evaluations > 0)
        horizon = std::min(horizon, std::max(1L, (c.max_evaluations - 1 - S) / S));
    long step = 0;

    auto best_index = [&] {
        int gi = 0;
        double gl = mult.lagrangian(pbest[0]);
        for (int i = 1; i < S; ++i) {
            const double li = mult.lagrangian(pbest[i]);
            if (li < gl) {
                gl = li;
                gi = i;
            }
        }
        return gi;
    };

    double prev_best = kInf;
    int stall = 0;
    bool out_of_budget = false;
    for (int outer = 0; outer < c.max_outer && !out_of_budget; ++outer) {
        int g = best_index();
        for (int inner = 0; inner < c.inner_iterations; ++inner) {
            if (!tr.budget_allows(S)) {
                out_of_budget = true;
                break;
            }
            const double frac = horizon > 1 ? std::min(1.0, static_cast<double>(step) / (horizon - 1)) : 1.0;
            const double w = c.inertia_start + (c.inertia_end - c.inertia_start) * frac;
            ++step;
            for (int i = 0; i < S; ++i) {
                for (std::size_t d = 0; d < n; ++d) {
                    const double range = b[d].hi - b[d].lo;
                    const double vmax = c.velocity_clamp * range;
                    const double r1 = rngs[i].uniform(), r2 = rngs[i].uniform();
                    double vd = w * v[i][d] + c.cognitive * r1 * (pbest_x[i][d] - x[i][d]) +
                                c.social * r2 * (pbest_x[g][d] - x[i][d]);
                    vd = std::clamp(vd, -vmax, vmax);
                    double xd = x[i][d] + vd;
                    if (xd < b[d].lo || xd > b[d].hi) {
                        xd = std::clamp(xd, b[d].lo, b[d].hi);
                        vd = 0.0;
                    }
                    x[i][d] = xd;
                    v[i][d] = vd;
                }
            }
            val = evaluate_batch(p, x, c.workers);
            for (int i = 0; i < S; ++i) {
                tr.absorb(x[i], val[i]);
                if (mult.lagrangian(val[i]) < mult.lagrangian(pbest[i])) {
                    pbest[i] = val[i];
                    pbest_x[i] = x[i];
                }
            }
            g = best_index();
        }

        const double best_l = mult.lagrangian(pbest[g]);
        const double viol = max_violation(pbest[g].g);
        history.push_back({outer, tr.evaluations, best_l, tr.best_feasible_f, viol});
        mult.update(pbest[g].g, c);

        if (std::abs(best_l - prev_best) < c.stall_tol && viol <= c.constraint_tol)
            ++stall;
        else
            stall = 0;
        prev_best = best_l;
        if (stall >= c.stall_iterations)
            break;
    }
    return tr.finish(seed, std::move(history));
}

OptResult alhso_minimize(const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed)
{
    check_problem(p);
    c.check();
    const std::size_t n = p.bounds.size();
    const int M = c.hs_memory;
    const auto& b = p.bounds;

    Tracker tr(p, c);
    Multipliers mult(p.constraint_count, c.initial_penalty);
    Rng rng(mix_seed(seed, 0xa15011));

    std::vector<std::vector<double>> hm(M, std::vector<double>(n));
    const int nwarm = warm_count(c, M, n);
    for (int i = 0; i < M; ++i) {
        for (std::size_t d = 0; d < n; ++d)
            hm[i][d] = b[d].lo + (b[d].hi - b[d].lo) * rng.uniform();
        if (i < nwarm)
            warm_point(hm[i], c, b, rng, i);
    }

    std::vector<OuterRecord> history;
    if (!tr.budget_allows(M))
        return tr.finish(seed, history);
    std::vector<PointValue> val = evaluate_batch(p, hm, c.workers);
    for (int i = 0; i < M; ++i)
        tr.absorb(hm[i], val[i]);

    auto extreme = [&](bool worst) {
        int k = 0;
        double lk = mult.lagrangian(val[0]);
        for (int i = 1; i < M; ++i) {
            const double li = mult.lagrangian(val[i]);
            if (worst ? li > lk : li < lk) {
                lk = li;
                k = i;
            }
        }
        return k;
    };

    long horizon = static_cast<long>(c.max_outer) * c.hs_improvisations;
    if (c.max_evaluations > 0)
        horizon = std::min(horizon, std::max(1L, c.max_evaluations - 1 - M));
    const double bw_ratio = std::min(1.0, c.hs_bandwidth_min / c.hs_bandwidth);
    long step = 0;

    double prev_best = kInf;
    int stall = 0;
    bool out_of_budget = false;
    std::vector<double> trial(n);
    for (int outer = 0; outer < c.max_outer && !out_of_budget; ++outer) {
        for (int it = 0; it < c.hs_improvisations; ++it) {
            if (!tr.budget_allows(1)) {
                out_of_budget = true;
                break;
            }
            const double bw = c.hs_bandwidth * std::pow(bw_ratio, std::min(1.0, static_cast<double>(step++) / horizon));
            for (std::size_t d = 0; d < n; ++d) {
                const double range = b[d].hi - b[d].lo;
                if (rng.uniform() < c.hs_hmcr) {
                    trial[d] = hm[rng.below(M)][d];
                    if (rng.uniform() < c.hs_par)
                        trial[d] += bw * range * rng.symmetric();
                } else {
                    trial[d] = b[d].lo + range * rng.uniform();
                }
                trial[d] = std::clamp(trial[d], b[d].lo, b[d].hi);
            }
            PointValue tv = call_safely(p, trial);
            tr.absorb(trial, tv);
            const int w = extreme(true);
            if (mult.lagrangian(tv) < mult.lagrangian(val[w])) {
                hm[w] = trial;
                val[w] = tv;
            }
        }

        const int best = extreme(false);
        const double best_l = mult.lagrangian(val[best]);
        const double viol = max_violation(val[best].g);
        history.push_back({outer, tr.evaluations, best_l, tr.best_feasible_f, viol});
        mult.update(val[best].g, c);

        if (std::abs(best_l - prev_best) < c.stall_tol && viol <= c.constraint_tol)
            ++stall;
        else
            stall = 0;
        prev_best = best_l;
        if (stall >= c.stall_iterations)
            break;
    }
    return tr.finish(seed, std::move(history));
}

Objective parse_objective(const std::string& s)
{
    if (s == "min-pr") return Objective::MinPr;
    if (s == "max-pr") return Objective::MaxPr;
    if (s == "min-ncte") return Objective::MinNcte;
    if (s == "max-ncte") return Objective::MaxNcte;
    if (s == "near-zero-ncte") return Objective::NearZeroNcte;
    throw DomainError("unknown objective '" + s + "'");
}

std::string objective_name(Objective o)
{
    switch (o) {
    case Objective::MinPr: return "min-pr";
    case Objective::MaxPr: return "max-pr";
    case Objective::MinNcte: return "min-ncte";
    case Objective::MaxNcte: return "max-ncte";
    case Objective::NearZeroNcte: return "near-zero-ncte";
    }
    return "?";
}

std::string DesignConstraint::str() const
{
    std::ostringstream s;
    s << (quantity == Quantity::Pr ? "pr" : "ncte") << (at_least ? ">=" : "<=") << value;
    return s.str();
}

DesignConstraint parse_constraint(const std::string& s)
{
    DesignConstraint c;
    std::size_t pos = s.find(">=");
    c.at_least = true;
    if (pos == std::string::npos) {
        pos = s.find("<=");
        c.at_least = false;
    }
    if (pos == std::string::npos)
        throw DomainError("constraint '" + s + "' needs >= or <=");
    const std::string lhs = s.substr(0, pos);
    if (lhs == "ncte")
        c.quantity = Quantity::Ncte;
    else if (lhs == "pr" || lhs == "nu")
        c.quantity = Quantity::Pr;
    else
        throw DomainError("constraint '" + s + "' must constrain pr or ncte");
    try {
        std::size_t used = 0;
        const std::string rhs = s.substr(pos + 2);
        c.value = std::stod(rhs, &used);
        if (used != rhs.size())
            throw std::invalid_argument(rhs);
    } catch (const std::logic_error&) {
        throw DomainError("constraint '" + s + "' has no numeric threshold");
    }
    return c;
}

double objective_value(Objective o, const HomogenizedProps& h)
{
    switch (o) {
    case Objective::MinPr: return h.nu;
    case Objective::MaxPr: return -h.nu;
    case Objective::MinNcte: return h.ncte;
    case Objective::MaxNcte: return -h.ncte;
    case Objective::NearZeroNcte: return h.ncte * h.ncte;
    }
    return 0.0;
}

double constraint_value(const DesignConstraint& c, const HomogenizedProps& h)
{
    const double q = c.quantity == Quantity::Pr ? h.nu : h.ncte;
    return c.at_least ? c.value - q : q - c.value;
}

OptimizationProblem design_problem(const std::string& label, Objective o, const std::vector<DesignConstraint>& cons,
                                   const ParamBounds& bounds, std::shared_ptr<DesignEvaluator> evaluator)
{
    OptimizationProblem p;
    p.label = label;
    p.bounds.assign(bounds.begin(), bounds.end());
    p.constraint_count = static_cast<int>(cons.size());
    p.evaluate = [o, cons, evaluator](std::span<const double> x) {
        const auto out = evaluator->evaluate({x[0], x[1], x[2], x[3]});
        PointValue v;
        if (!out.props) {
            v.ok = false;
            return v;
        }
        v.f = objective_value(o, *out.props);
        for (const auto& c : cons)
            v.g.push_back(constraint_value(c, *out.props));
        return v;
    };
    return p;
}

Optimizer parse_optimizer(const std::string& s)
{
    if (s == "alpso") return Optimizer::Alpso;
    if (s == "alhso") return Optimizer::Alhso;
    throw DomainError("unknown optimizer '" + s + "'");
}

std::string optimizer_name(Optimizer o) { return o == Optimizer::Alpso ? "alpso" : "alhso"; }

OptResult run_optimizer(Optimizer which, const OptimizationProblem& p, const OptConfig& c, std::uint64_t seed)
{
    return which == Optimizer::Alpso ? alpso_minimize(p, c, seed) : alhso_minimize(p, c, seed);
}

std::vector<ComparisonRow> compare_optimizers(const std::vector<Objective>& objectives,
                                              const std::vector<std::uint64_t>& seeds, const OptConfig& c,
                                              const HomogenizationSettings& s, const ParamBounds& bounds)
{
    std::vector<ComparisonRow> rows;
    for (Objective o : objectives)
        for (Optimizer which : {Optimizer::Alpso, Optimizer::Alhso})
            for (std::uint64_t seed : seeds) {
                auto ev = std::make_shared<DesignEvaluator>(s);
                const auto prob = design_problem(objective_name(o), o, {}, bounds, ev);
                const OptResult r = run_optimizer(which, prob, c, seed);
                ComparisonRow row{o, which, seed, {}};
                row.design = {r.x[0], r.x[1], r.x[2], r.x[3]};
                row.evaluations = r.evaluations;
                row.fea_runs = static_cast<long>(ev->computed());
                row.memo_calls = static_cast<long>(ev->calls());
                row.feasible = r.feasible;
                const auto props = ev->evaluate(row.design).props;
                if (props) {
                    row.nu = props->nu;
                    row.ncte = props->ncte;
                    row.alpha = props->alpha;
                }
                rows.push_back(row);
            }
    return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows)
{
    std::ostringstream s;
    s << std::setprecision(12);
    s << "objective,optimizer,seed,h1,h2,theta_deg,t,evaluations,fea_runs,feasible,nu,ncte,cte\n";
    for (const auto& r : rows)
        s << objective_name(r.objective) << ',' << optimizer_name(r.optimizer) << ',' << r.seed << ','
          << r.design.h1 << ',' << r.design.h2 << ',' << r.design.theta_deg << ',' << r.design.t << ','
          << r.evaluations << ',' << r.fea_runs << ',' << (r.feasible ? "true" : "false") << ',' << r.nu << ','
          << r.ncte << ',' << r.alpha << '\n';
    return s.str();
}

}  // namespace starlat
