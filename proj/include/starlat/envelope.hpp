#pragma once

#include "starlat/optimize.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace starlat {

struct ScheduledProblem {
    std::string label;
    Objective objective = Objective::MinPr;
    std::vector<DesignConstraint> constraints;
    // Problems this one relaxes; their best points warm-start this run.
    std::vector<std::string> warm_from;
};

using EnvelopeSchedule = std::vector<ScheduledProblem>;

EnvelopeSchedule default_problem_schedule();
void check_schedule(const EnvelopeSchedule& s);
EnvelopeSchedule schedule_from_json(const std::string& text);
std::string schedule_to_json(const EnvelopeSchedule& s);

struct EnvelopePoint {
    std::string label;
    double h1 = 0.0;
    double h2 = 0.0;
    double theta_deg = 0.0;
    double t = 0.0;
    double nu = 0.0;
    double ncte = 0.0;
    long evaluations = 0;
    bool feasible = false;
    std::uint64_t seed = 0;

    bool operator==(const EnvelopePoint&) const = default;
};

struct EnvelopeOptions {
    OptConfig optimizer;
    Optimizer method = Optimizer::Alpso;
    HomogenizationSettings settings;
    ParamBounds bounds = default_bounds();
    bool warm_start = true;
};

struct FrontierIssue {
    std::string label;
    std::string relaxes;
    double objective = 0.0;
    double previous = 0.0;
};

struct EnvelopeRun {
    std::vector<EnvelopePoint> points;  // schedule order
    std::vector<FrontierIssue> frontier_issues;
    std::vector<std::string> inactive;  // thresholds met with slack
    double nu_min = 0.0, nu_max = 0.0, ncte_min = 0.0, ncte_max = 0.0;
};

EnvelopeRun build_envelope(const EnvelopeSchedule& s, const EnvelopeOptions& o, std::uint64_t seed);

// Relaxing a constraint may not worsen the optimum.
std::vector<FrontierIssue> check_frontier(const EnvelopeSchedule& s, const std::vector<EnvelopePoint>& points,
                                          double tol);

std::string points_to_csv(const std::vector<EnvelopePoint>& points);
std::vector<EnvelopePoint> points_from_csv(const std::string& text);
std::string points_to_json(const std::vector<EnvelopePoint>& points);
std::vector<EnvelopePoint> points_from_json(const std::string& text);

std::string render_svg(const std::vector<EnvelopePoint>& points);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace starlat
