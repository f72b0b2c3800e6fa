#include "starlat/envelope.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace starlat {

namespace {

std::string num(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

ScheduledProblem constrained(const std::string& head, Objective o, Quantity q, bool at_least, double c,
                             std::vector<std::string> warm)
{
    DesignConstraint dc{q, at_least, c};
    const std::string label = head + " (" + (q == Quantity::Pr ? "PR" : "NCTE") + (at_least ? " >= " : " <= ") +
                              num(c) + ")";
    return {label, o, {dc}, std::move(warm)};
}

}  // namespace

EnvelopeSchedule default_problem_schedule()
{
    EnvelopeSchedule s;
    s.push_back({"PR MAX", Objective::MaxPr, {}, {"PR MAX (negative NCTE)"}});
    s.push_back({"NCTE MAX", Objective::MaxNcte, {}, {}});

    std::vector<std::string> prev;
    for (double c : {0.25, 0.2, 0.1, -0.01, -0.025, -0.05, -0.1, -0.2}) {
        s.push_back(constrained("PR MIN", Objective::MinPr, Quantity::Ncte, true, c, prev));
        prev = {s.back().label};
    }
    const std::string last_upper = s.back().label;
    s.push_back({"PR MIN", Objective::MinPr, {}, {last_upper, "PR MIN (NCTE <= -0.3)"}});

    // NCTE <= c tightens as c falls, so warm starts run from -0.6 upward.
    const double lower[] = {-0.3, -0.4, -0.5, -0.6};
    for (int i = 0; i < 4; ++i) {
        std::vector<std::string> warm;
        if (i < 3)
            warm = {"PR MIN (NCTE <= " + num(lower[i + 1]) + ")"};
        s.push_back(constrained("PR MIN", Objective::MinPr, Quantity::Ncte, false, lower[i], warm));
    }

    s.push_back({"NCTE MIN", Objective::MinNcte, {}, {"NCTE MIN (PR >= -0.25)"}});
    const double pr[] = {-0.25, -0.2, -0.15, -0.1, -0.05};
    for (int i = 0; i < 5; ++i) {
        std::vector<std::string> warm;
        if (i < 4)
            warm = {"NCTE MIN (PR >= " + num(pr[i + 1]) + ")"};
        s.push_back(constrained("NCTE MIN", Objective::MinNcte, Quantity::Pr, true, pr[i], warm));
    }

    DesignConstraint neg{Quantity::Ncte, false, 0.0};
    s.push_back({"PR MAX (negative NCTE)", Objective::MaxPr, {neg}, {}});
    return s;
}

void check_schedule(const EnvelopeSchedule& s)
{
    std::set<std::string> labels;
    for (const auto& p : s)
        if (!labels.insert(p.label).second)
            throw DomainError("duplicate schedule label '" + p.label + "'");
    for (const auto& p : s)
        for (const auto& w : p.warm_from) {
            if (w == p.label)
                throw DomainError("problem '" + p.label + "' warm-starts from itself");
            if (!labels.count(w))
                throw DomainError("problem '" + p.label + "' warm-starts from unknown '" + w + "'");
        }

    // Thresholds of single-constraint problems sharing objective and
    // constraint kind must be strictly ordered in schedule order.
    std::map<std::tuple<int, int, bool>, std::vector<double>> families;
    for (const auto& p : s)
        if (p.constraints.size() == 1) {
            const auto& c = p.constraints[0];
            families[{static_cast<int>(p.objective), static_cast<int>(c.quantity), c.at_least}].push_back(c.value);
        }
    for (const auto& [key, v] : families) {
        bool up = true, down = true;
        for (std::size_t i = 1; i < v.size(); ++i) {
            up = up && v[i] > v[i - 1];
            down = down && v[i] < v[i - 1];
        }
        if (!up && !down)
            throw DomainError("thresholds within a schedule family must be strictly ordered");
    }
}

EnvelopeSchedule schedule_from_json(const std::string& text)
{
    EnvelopeSchedule s;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& list = j.is_object() ? j.at("problems") : j;
        for (const auto& e : list) {
            ScheduledProblem p;
            p.label = e.at("label").get<std::string>();
            p.objective = parse_objective(e.at("objective").get<std::string>());
            for (const auto& c : e.value("constraints", nlohmann::json::array()))
                p.constraints.push_back(parse_constraint(c.get<std::string>()));
            p.warm_from = e.value("warm_from", std::vector<std::string>{});
            s.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed schedule: ") + e.what());
    }
    check_schedule(s);
    return s;
}

std::string schedule_to_json(const EnvelopeSchedule& s)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : s) {
        nlohmann::json cons = nlohmann::json::array();
        for (const auto& c : p.constraints)
            cons.push_back(c.str());
        list.push_back({{"label", p.label},
                        {"objective", objective_name(p.objective)},
                        {"constraints", cons},
                        {"warm_from", p.warm_from}});
    }
    return nlohmann::json{{"problems", list}}.dump(2) + "\n";
}

namespace {

bool implied_by(const DesignConstraint& weak, const DesignConstraint& strong)
{
    if (weak.quantity != strong.quantity || weak.at_least != strong.at_least)
        return false;
    return weak.at_least ? strong.value >= weak.value : strong.value <= weak.value;
}

// True when every constraint of p follows from some constraint of q.
bool relaxes(const ScheduledProblem& p, const ScheduledProblem& q)
{
    if (p.objective != q.objective)
        return false;
    for (const auto& c : p.constraints)
        if (std::none_of(q.constraints.begin(), q.constraints.end(),
                         [&](const DesignConstraint& d) { return implied_by(c, d); }))
            return false;
    return true;
}

HomogenizedProps props_of(const EnvelopePoint& pt)
{
    HomogenizedProps h;
    h.nu = pt.nu;
    h.ncte = pt.ncte;
    return h;
}

}  // namespace

std::vector<FrontierIssue> check_frontier(const EnvelopeSchedule& s, const std::vector<EnvelopePoint>& points,
                                          double tol)
{
    std::vector<FrontierIssue> issues;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (i == k || !points[i].feasible || !points[k].feasible || !relaxes(s[i], s[k]))
                continue;
            const double fi = objective_value(s[i].objective, props_of(points[i]));
            const double fk = objective_value(s[k].objective, props_of(points[k]));
            if (fi > fk + tol)
                issues.push_back({s[i].label, s[k].label, fi, fk});
        }
    return issues;
}

EnvelopeRun build_envelope(const EnvelopeSchedule& s, const EnvelopeOptions& o, std::uint64_t seed)
{
    check_schedule(s);
    EnvelopeRun run;
    run.points.resize(s.size());
    if (s.empty())
        return run;

    auto evaluator = std::make_shared<DesignEvaluator>(o.settings);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < s.size(); ++i)
        index[s[i].label] = i;

    std::vector<char> done(s.size(), 0);
    std::vector<std::vector<double>> best(s.size());
    std::size_t finished = 0;
    while (finished < s.size()) {
        bool progressed = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (done[i])
                continue;
            const auto& prob = s[i];
            if (o.warm_start && std::any_of(prob.warm_from.begin(), prob.warm_from.end(),
                                            [&](const std::string& w) { return !done[index[w]]; }))
                continue;

            OptConfig cfg = o.optimizer;
            cfg.warm_points.clear();
            if (o.warm_start)
                for (const auto& w : prob.warm_from) {
                    const std::size_t k = index[w];
                    if (run.points[k].feasible)
                        cfg.warm_points.push_back(best[k]);
                }

            const std::uint64_t pseed = hash_label(seed, prob.label);
            const auto problem = design_problem(prob.label, prob.objective, prob.constraints, o.bounds, evaluator);
            const OptResult r = run_optimizer(o.method, problem, cfg, pseed);

            EnvelopePoint pt;
            pt.label = prob.label;
            pt.h1 = r.x[0];
            pt.h2 = r.x[1];
            pt.theta_deg = r.x[2];
            pt.t = r.x[3];
            pt.evaluations = r.evaluations;
            pt.seed = pseed;
            pt.feasible = r.feasible;
            try {
                const HomogenizedProps h = evaluate_design({pt.h1, pt.h2, pt.theta_deg, pt.t}, o.settings);
                pt.nu = h.nu;
                pt.ncte = h.ncte;
                for (const auto& c : prob.constraints) {
                    const double g = constraint_value(c, h);
                    if (g > o.optimizer.constraint_tol)
                        pt.feasible = false;
                    else if (g < -o.optimizer.constraint_tol)
                        run.inactive.push_back(prob.label);
                }
            } catch (const std::exception&) {
                pt.nu = pt.ncte = std::numeric_limits<double>::quiet_NaN();
                pt.feasible = false;
            }
            run.points[i] = pt;
            best[i] = r.x;
            done[i] = 1;
            ++finished;
            progressed = true;
        }
        if (!progressed)
            throw DomainError("warm-start references form a cycle");
    }

    run.frontier_issues = check_frontier(s, run.points, o.optimizer.constraint_tol);
    bool any = false;
    for (const auto& p : run.points) {
        if (!p.feasible)
            continue;
        run.nu_min = any ? std::min(run.nu_min, p.nu) : p.nu;
        run.nu_max = any ? std::max(run.nu_max, p.nu) : p.nu;
        run.ncte_min = any ? std::min(run.ncte_min, p.ncte) : p.ncte;
        run.ncte_max = any ? std::max(run.ncte_max, p.ncte) : p.ncte;
        any = true;
    }
    return run;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s)
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string xml_escape(const std::string& in)
{
    std::string out;
    for (char ch : in) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

const char* kCsvHeader = "label,h1,h2,theta_deg,t,nu,ncte,evaluations,feasible,seed";

}  // namespace

std::string points_to_csv(const std::vector<EnvelopePoint>& points)
{
    std::ostringstream s;
    s << std::setprecision(17);
    s << kCsvHeader << '\n';
    for (const auto& p : points)
        s << csv_field(p.label) << ',' << p.h1 << ',' << p.h2 << ',' << p.theta_deg << ',' << p.t << ',' << p.nu
          << ',' << p.ncte << ',' << p.evaluations << ',' << (p.feasible ? "true" : "false") << ',' << p.seed << '\n';
    return s.str();
}

std::vector<EnvelopePoint> points_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw DomainError("envelope CSV must start with the header '" + std::string(kCsvHeader) + "'");
    std::vector<EnvelopePoint> points;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10)
            throw DomainError("envelope CSV row has " + std::to_string(f.size()) + " fields, expected 10");
        try {
            EnvelopePoint p;
            p.label = f[0];
            p.h1 = std::stod(f[1]);
            p.h2 = std::stod(f[2]);
            p.theta_deg = std::stod(f[3]);
            p.t = std::stod(f[4]);
            p.nu = std::stod(f[5]);
            p.ncte = std::stod(f[6]);
            p.evaluations = std::stol(f[7]);
            p.feasible = f[8] == "true";
            p.seed = std::stoull(f[9]);
            points.push_back(p);
        } catch (const std::logic_error&) {
            throw DomainError("envelope CSV row has a malformed number: " + line);
        }
    }
    return points;
}

std::string points_to_json(const std::vector<EnvelopePoint>& points)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : points)
        list.push_back({{"label", p.label},
                        {"h1", p.h1},
                        {"h2", p.h2},
                        {"theta_deg", p.theta_deg},
                        {"t", p.t},
                        {"nu", p.nu},
                        {"ncte", p.ncte},
                        {"evaluations", p.evaluations},
                        {"feasible", p.feasible},
                        {"seed", p.seed}});
    return nlohmann::json{{"points", list}}.dump(2) + "\n";
}

std::vector<EnvelopePoint> points_from_json(const std::string& text)
{
    std::vector<EnvelopePoint> points;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& e : j.at("points")) {
            EnvelopePoint p;
            p.label = e.at("label").get<std::string>();
            p.h1 = e.at("h1").get<double>();
            p.h2 = e.at("h2").get<double>();
            p.theta_deg = e.at("theta_deg").get<double>();
            p.t = e.at("t").get<double>();
            p.nu = e.at("nu").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("nu").get<double>();
            p.ncte = e.at("ncte").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("ncte").get<double>();
            p.evaluations = e.at("evaluations").get<long>();
            p.feasible = e.at("feasible").get<bool>();
            p.seed = e.at("seed").get<std::uint64_t>();
            points.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed envelope JSON: ") + e.what());
    }
    return points;
}

std::string render_svg(const std::vector<EnvelopePoint>& points)
{
    constexpr double W = 720, H = 540, ml = 80, mr = 30, mt = 40, mb = 70;
    std::vector<const EnvelopePoint*> ok;
    for (const auto& p : points)
        if (p.feasible && std::isfinite(p.nu) && std::isfinite(p.ncte))
            ok.push_back(&p);

    // Ranges always include the origin so both reference lines are drawn.
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    for (const auto* p : ok) {
        x0 = std::min(x0, p->nu);
        x1 = std::max(x1, p->nu);
        y0 = std::min(y0, p->ncte);
        y1 = std::max(y1, p->ncte);
    }
    const double px = std::max(0.05, 0.08 * (x1 - x0)), py = std::max(0.05, 0.08 * (y1 - y0));
    x0 -= px;
    x1 += px;
    y0 -= py;
    y1 += py;
    auto sx = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
    auto sy = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream s;
    s << std::fixed << std::setprecision(2);
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">Design envelope</text>\n";

    s << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\"/>\n</g>\n";
    s << "<g class=\"ticks\" font-size=\"11\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
        s << "<line x1=\"" << sx(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << sx(xv) << "\" y2=\"" << H - mb + 5
          << "\" stroke=\"black\"/>"
          << "<text x=\"" << sx(xv) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << std::setprecision(3)
          << xv << "</text>\n";
        s << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml << "\" y2=\"" << sy(yv)
          << "\" stroke=\"black\"/>"
          << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n"
          << std::setprecision(2);
    }
    s << "</g>\n";
    s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 25
      << "\" text-anchor=\"middle\" font-size=\"14\">Poisson's ratio, &#957;</text>\n"
      << "<text x=\"20\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << (mt + H - mb) / 2 << ")\">NCTE</text>\n";

    s << "<g class=\"reference\" stroke=\"gray\" stroke-dasharray=\"4 3\">\n"
      << "<line x1=\"" << sx(0.0) << "\" y1=\"" << mt << "\" x2=\"" << sx(0.0) << "\" y2=\"" << H - mb << "\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << sy(0.0) << "\" x2=\"" << W - mr << "\" y2=\"" << sy(0.0) << "\"/>\n"
      << "</g>\n";

    if (ok.size() >= 2) {
        auto sorted = ok;
        std::stable_sort(sorted.begin(), sorted.end(), [](const EnvelopePoint* a, const EnvelopePoint* b) {
            return a->nu < b->nu || (a->nu == b->nu && a->ncte < b->ncte);
        });
        s << "<polyline class=\"frontier\" fill=\"none\" stroke=\"steelblue\" points=\"";
        for (std::size_t i = 0; i < sorted.size(); ++i)
            s << (i ? " " : "") << sx(sorted[i]->nu) << ',' << sy(sorted[i]->ncte);
        s << "\"/>\n";
    }
    for (const auto* p : ok)
        s << "<circle class=\"point\" cx=\"" << sx(p->nu) << "\" cy=\"" << sy(p->ncte)
          << "\" r=\"4\" fill=\"firebrick\"><title>" << xml_escape(p->label) << "</title></circle>\n";
    if (ok.empty())
        s << "<text class=\"note\" x=\"" << W / 2 << "\" y=\"" << H / 2
          << "\" text-anchor=\"middle\" font-size=\"14\">no feasible designs</text>\n";
    s << "</svg>\n";
    return s.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DomainError("cannot write " + path);
    out << text;
    if (!out)
        throw DomainError("failed writing " + path);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DomainError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace starlat
