#include "starlat/cli.hpp"

#include "starlat/config.hpp"
#include "starlat/envelope.hpp"
#include "starlat/oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace starlat {

using nlohmann::json;

json geometry_document(const RveModel& model)
{
    const auto tpl = star_template(model.params);
    json segs = json::array();
    for (const auto& s : tpl.segments)
        segs.push_back({{"from", {s.p.x, s.p.y}}, {"to", {s.q.x, s.q.y}}, {"material", material_name(s.material)}});
    json nodes = json::array();
    for (const auto& n : model.nodes)
        nodes.push_back({n.x, n.y});
    json members = json::array();
    for (const auto& m : model.members) {
        const auto a = model.nodes[m.a], b = model.nodes[m.b];
        members.push_back({{"a", m.a},
                           {"b", m.b},
                           {"material", material_name(m.material)},
                           {"thickness", m.thickness},
                           {"length", std::hypot(b.x - a.x, b.y - a.y)}});
    }
    const auto& bs = model.boundary;
    return {{"params",
             {{"h1", model.params.h1},
              {"h2", model.params.h2},
              {"theta", model.params.theta_deg},
              {"t", model.params.t}}},
            {"edge_length", model.edge_length},
            {"center", {model.center.x, model.center.y}},
            {"octant_segments", segs},
            {"nodes", nodes},
            {"members", members},
            {"boundary",
             {{"left", bs.left},
              {"right", bs.right},
              {"bottom", bs.bottom},
              {"top", bs.top},
              {"corners", bs.corners}}}};
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json params_json(const RveParams& p)
{
    return {{"h1", p.h1}, {"h2", p.h2}, {"theta", p.theta_deg}, {"t", p.t}};
}

json violations_json(const std::vector<BoundViolation>& v)
{
    json out = json::array();
    for (const auto& b : v)
        out.push_back({{"variable", b.variable}, {"value", b.value}, {"bound", b.bound}, {"lower", b.lower}});
    return out;
}

json system_json(const GlobalSystem& sys, const SolutionField& sol)
{
    json k = json::array();
    for (int col = 0; col < sys.K.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it)
            if (it.value() != 0.0)
                k.push_back({it.row(), it.col(), it.value()});
    return {{"temperature", sys.temperature},
            {"delta_t", sys.delta_t},
            {"ndof", sys.ndof()},
            {"K", k},
            {"F", std::vector<double>(sys.F.data(), sys.F.data() + sys.F.size())},
            {"U", std::vector<double>(sol.u.data(), sol.u.data() + sol.u.size())},
            {"dx", sol.dx},
            {"dy", sol.dy},
            {"residual_norm", sol.residual_norm}};
}

json dump_system(const RveParams& p, const HomogenizationSettings& s)
{
    const Mesh mesh = mesh_rve(build_rve(p), s.seed_factor, s.shear_factor);
    const PbcConstraintSet c = build_pbc_constraints(mesh);
    const GlobalSystem mech = assemble(mesh, s.materials, s.t_ref, 0.0);
    const GlobalSystem therm = assemble(mesh, s.materials, s.t_ref + s.delta_t, s.delta_t);
    json rel = json::array();
    for (const auto& r : c.relations)
        rel.push_back({{"slave", r.slave}, {"master", r.master}, {"dx", r.cx}, {"dy", r.cy}});
    return {{"design", params_json(p)},
            {"edge_length", mesh.edge_length},
            {"constraints", {{"relations", rel}, {"anchored", c.anchored}, {"anchor_node", c.anchor_node}}},
            {"mechanical", system_json(mech, solve_constrained(mech, c, s.strain * mesh.edge_length))},
            {"thermal", system_json(therm, solve_constrained(therm, c))}};
}

std::string out_path(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

struct Options {
    std::string config_path;
    bool print_config = false;
    bool json_out = false;
    int workers = 0;

    RveParams design;
    std::string dump_path;

    std::string objective = "min-pr";
    std::vector<std::string> constraints;
    std::string optimizer = "alpso";
    std::uint64_t seed = 1;
    long max_evals = -1;

    std::vector<std::uint64_t> seeds{1};

    std::string schedule_path;
    std::string out_dir;
    bool svg = false;
    bool no_warm_start = false;

    bool geometry = false;
    std::string input_path;
    std::string output_file;
};

void add_design_options(CLI::App* sub, Options& o)
{
    sub->add_option("--h1", o.design.h1, "Rib half-length H1")->required();
    sub->add_option("--h2", o.design.h2, "Star leg length H2")->required();
    sub->add_option("--theta", o.design.theta_deg, "Leg angle theta in degrees")->required();
    sub->add_option("--t", o.design.t, "Member thickness t")->required();
}

int cmd_evaluate(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto violations = validate_params(o.design, cfg.bounds);
    const HomogenizedProps h = evaluate_design(o.design, cfg.settings);
    if (!o.dump_path.empty())
        write_text(o.dump_path, dump_system(o.design, cfg.settings).dump(1) + "\n");
    if (o.json_out) {
        json j = {{"design", params_json(o.design)},
                  {"nu", h.nu},
                  {"alpha", h.alpha},
                  {"ncte", h.ncte},
                  {"edge_length", h.diag.edge_length},
                  {"elements", h.diag.element_count},
                  {"nodes", h.diag.node_count},
                  {"residual_mechanical", h.diag.residual_mech},
                  {"residual_thermal", h.diag.residual_thermal},
                  {"bound_violations", violations_json(violations)}};
        out << std::setw(2) << j << '\n';
        return 0;
    }
    for (const auto& v : violations)
        err << "warning: " << v.variable << " = " << v.value << " is outside the box (" << (v.lower ? "lower" : "upper")
            << " bound " << v.bound << ")\n";
    out << std::setprecision(6);
    out << "design     h1=" << o.design.h1 << " h2=" << o.design.h2 << " theta=" << o.design.theta_deg
        << " t=" << o.design.t << '\n'
        << "L          " << h.diag.edge_length << '\n'
        << "elements   " << h.diag.element_count << '\n'
        << "nu         " << h.nu << '\n'
        << "alpha      " << h.alpha << " 1/K\n"
        << "ncte       " << h.ncte << '\n';
    return 0;
}

json result_json(const OptResult& r, const std::optional<HomogenizedProps>& h, const std::string& label,
                 const std::string& optimizer, long fea_runs)
{
    json j = {{"label", label},
              {"optimizer", optimizer},
              {"seed", r.seed},
              {"design", params_json({r.x[0], r.x[1], r.x[2], r.x[3]})},
              {"objective", r.f},
              {"constraints", r.g},
              {"feasible", r.feasible},
              {"evaluations", r.evaluations},
              {"fea_runs", fea_runs}};
    if (h) {
        j["nu"] = h->nu;
        j["alpha"] = h->alpha;
        j["ncte"] = h->ncte;
    }
    json hist = json::array();
    for (const auto& rec : r.history)
        hist.push_back({{"outer", rec.outer},
                        {"evaluations", rec.evaluations},
                        {"best_lagrangian", rec.best_lagrangian},
                        {"best_feasible", std::isfinite(rec.best_feasible_f) ? json(rec.best_feasible_f) : json()},
                        {"max_violation", rec.max_violation}});
    j["history"] = hist;
    return j;
}

int cmd_optimize(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const Objective obj = parse_objective(o.objective);
    std::vector<DesignConstraint> cons;
    for (const auto& c : o.constraints)
        cons.push_back(parse_constraint(c));
    const Optimizer which = parse_optimizer(o.optimizer);
    OptConfig oc = cfg.optimizer;
    if (o.max_evals >= 0)
        oc.max_evaluations = o.max_evals;

    std::string label = o.objective;
    for (const auto& c : cons)
        label += " " + c.str();
    auto ev = std::make_shared<DesignEvaluator>(cfg.settings);
    const OptResult r = run_optimizer(which, design_problem(label, obj, cons, cfg.bounds, ev), oc, o.seed);
    const long fea = static_cast<long>(ev->computed());
    const auto h = ev->evaluate({r.x[0], r.x[1], r.x[2], r.x[3]}).props;

    if (o.json_out) {
        out << std::setw(2) << result_json(r, h, label, o.optimizer, fea) << '\n';
        return 0;
    }
    out << std::setprecision(6);
    out << "problem      " << label << " (" << o.optimizer << ", seed " << o.seed << ")\n"
        << "design       h1=" << r.x[0] << " h2=" << r.x[1] << " theta=" << r.x[2] << " t=" << r.x[3] << '\n'
        << "objective    " << r.f << '\n';
    if (h)
        out << "nu           " << h->nu << '\n' << "ncte         " << h->ncte << '\n';
    out << "feasible     " << (r.feasible ? "yes" : "no") << '\n'
        << "evaluations  " << r.evaluations << " (" << fea << " FE solves)\n";
    return 0;
}

int cmd_compare(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const auto rows = compare_optimizers({Objective::MinPr, Objective::MinNcte, Objective::NearZeroNcte}, o.seeds,
                                         cfg.optimizer, cfg.settings, cfg.bounds);
    if (o.json_out) {
        json list = json::array();
        for (const auto& r : rows)
            list.push_back({{"objective", objective_name(r.objective)},
                            {"optimizer", optimizer_name(r.optimizer)},
                            {"seed", r.seed},
                            {"design", params_json(r.design)},
                            {"evaluations", r.evaluations},
                            {"fea_runs", r.fea_runs},
                            {"feasible", r.feasible},
                            {"nu", r.nu},
                            {"ncte", r.ncte},
                            {"cte", r.alpha}});
        out << std::setw(2) << json{{"rows", list}} << '\n';
    } else {
        out << comparison_csv(rows);
    }
    if (!o.output_file.empty())
        write_text(o.output_file, comparison_csv(rows));
    return 0;
}

int cmd_envelope(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const EnvelopeSchedule sched =
        o.schedule_path.empty() ? default_problem_schedule() : schedule_from_json(read_text(o.schedule_path));
    EnvelopeOptions eo;
    eo.optimizer = cfg.optimizer;
    eo.settings = cfg.settings;
    eo.bounds = cfg.bounds;
    eo.warm_start = !o.no_warm_start;
    eo.method = parse_optimizer(o.optimizer);

    const std::string dir = o.out_dir.empty() ? cfg.output_dir : o.out_dir;
    std::filesystem::create_directories(dir);
    const auto t0 = std::chrono::steady_clock::now();
    const EnvelopeRun run = build_envelope(sched, eo, o.seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_text(out_path(dir, "envelope.csv"), points_to_csv(run.points));
    write_text(out_path(dir, "envelope.json"), points_to_json(run.points));
    write_text(out_path(dir, "envelope.svg"), render_svg(run.points));

    for (const auto& f : run.frontier_issues)
        err << "warning: '" << f.label << "' relaxes '" << f.relaxes << "' but reached " << f.objective << " > "
            << f.previous << '\n';
    if (o.json_out) {
        json issues = json::array();
        for (const auto& f : run.frontier_issues)
            issues.push_back({{"label", f.label}, {"relaxes", f.relaxes}});
        out << std::setw(2)
            << json{{"problems", run.points.size()},
                    {"nu_range", {run.nu_min, run.nu_max}},
                    {"ncte_range", {run.ncte_min, run.ncte_max}},
                    {"frontier_issues", issues},
                    {"inactive_constraints", run.inactive},
                    {"output_dir", dir}}
            << '\n';
        return 0;
    }
    out << std::setprecision(4);
    for (const auto& p : run.points)
        out << std::left << std::setw(28) << p.label << std::right << " nu=" << std::setw(9) << p.nu
            << " ncte=" << std::setw(9) << p.ncte << " evals=" << p.evaluations << (p.feasible ? "" : "  INFEASIBLE")
            << '\n';
    out << "nu range    [" << run.nu_min << ", " << run.nu_max << "]\n"
        << "ncte range  [" << run.ncte_min << ", " << run.ncte_max << "]\n"
        << "frontier    " << (run.frontier_issues.empty() ? "monotone" : "NOT monotone") << '\n'
        << "written to  " << dir << " (" << std::setprecision(3) << secs << " s)\n";
    return 0;
}

int cmd_validate(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const auto checks = validation_battery(cfg.settings, cfg.optimizer);
    bool all = true;
    json list = json::array();
    for (const auto& c : checks) {
        all = all && c.passed;
        list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        if (!o.json_out)
            out << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    }
    if (o.json_out)
        out << std::setw(2) << json{{"checks", list}, {"passed", all}} << '\n';
    return all ? 0 : 1;
}

int cmd_render(const Options& o, std::ostream& out)
{
    std::string text;
    if (o.geometry) {
        if (o.design.h1 == 0.0 && o.design.h2 == 0.0)
            throw UsageError("render --geometry needs --h1 --h2 --theta --t");
        text = geometry_document(build_rve(o.design)).dump(2) + "\n";
    } else {
        if (o.input_path.empty())
            throw UsageError("render needs --geometry or --input <envelope.csv|envelope.json>");
        const std::string data = read_text(o.input_path);
        const bool is_json = std::filesystem::path(o.input_path).extension() == ".json";
        text = render_svg(is_json ? points_from_json(data) : points_from_csv(data));
    }
    if (o.output_file.empty())
        out << text;
    else
        write_text(o.output_file, text);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bi-material star lattice homogenization and design optimization"};
    app.name("starlat");
    Options o;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");
    app.add_flag("--json", o.json_out, "Machine-readable output");
    app.add_option("--workers", o.workers, "Evaluator threads (default: available cores)")
        ->check(CLI::PositiveNumber);
    app.fallthrough();

    auto* evaluate = app.add_subcommand("evaluate", "Homogenized nu, alpha and NCTE of one design");
    add_design_options(evaluate, o);
    evaluate->add_option("--dump-system", o.dump_path, "Write K, F, constraints and U as JSON");

    auto* optimize = app.add_subcommand("optimize", "Optimize one objective");
    optimize->add_option("--objective", o.objective, "min-pr|max-pr|min-ncte|max-ncte|near-zero-ncte");
    optimize->add_option("--constraint", o.constraints, "e.g. ncte>=-0.1 or pr<=0 (repeatable)");
    optimize->add_option("--optimizer", o.optimizer, "alpso|alhso");
    optimize->add_option("--seed", o.seed, "Random seed");
    optimize->add_option("--max-evals", o.max_evals, "Evaluation budget (0 = none)");

    auto* compare = app.add_subcommand("compare", "ALPSO vs ALHSO on the three headline objectives");
    compare->add_option("--seeds", o.seeds, "Seeds")->delimiter(',');
    compare->add_option("--out", o.output_file, "Also write the CSV report here");

    auto* envelope = app.add_subcommand("envelope", "Trace the (nu, NCTE) design envelope");
    envelope->add_option("--schedule", o.schedule_path, "JSON schedule file")->check(CLI::ExistingFile);
    envelope->add_option("--seed", o.seed, "Master seed");
    envelope->add_option("--out", o.out_dir, "Output directory");
    envelope->add_flag("--svg", o.svg, "Write envelope.svg (always on)");
    envelope->add_flag("--no-warm-start", o.no_warm_start, "Start every problem from a fresh swarm");
    envelope->add_option("--optimizer", o.optimizer, "alpso|alhso");

    auto* validate = app.add_subcommand("validate", "Run the analytic oracle battery");

    auto* render = app.add_subcommand("render", "Geometry document or envelope SVG");
    render->add_flag("--geometry", o.geometry, "Emit the resolved RVE geometry as JSON");
    render->add_option("--h1", o.design.h1);
    render->add_option("--h2", o.design.h2);
    render->add_option("--theta", o.design.theta_deg);
    render->add_option("--t", o.design.t);
    render->add_option("--input", o.input_path, "Envelope CSV or JSON");
    render->add_option("--out", o.output_file, "Output file (default stdout)");

    app.require_subcommand(0, 1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        RunConfig cfg = default_run_config();
        cfg.optimizer.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (!o.config_path.empty())
            load_config_file(cfg, o.config_path);
        if (o.workers > 0)
            cfg.optimizer.workers = o.workers;

        if (o.print_config) {
            out << std::setw(2) << config_to_json(cfg) << '\n';
            return 0;
        }
        if (*evaluate) return cmd_evaluate(o, cfg, out, err);
        if (*optimize) return cmd_optimize(o, cfg, out);
        if (*compare) return cmd_compare(o, cfg, out);
        if (*envelope) return cmd_envelope(o, cfg, out, err);
        if (*validate) return cmd_validate(o, cfg, out);
        if (*render) return cmd_render(o, out);
        err << "error: a subcommand is required\n\n" << app.help();
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace starlat
