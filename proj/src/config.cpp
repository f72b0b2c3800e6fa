#include "starlat/config.hpp"

#include "starlat/envelope.hpp"

#include <cstdlib>
#include <initializer_list>

namespace starlat {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* where, std::initializer_list<const char*> known)
{
    if (!j.is_object())
        throw DomainError(std::string("config section '") + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known)
            found = found || key == k;
        if (!found)
            throw DomainError(std::string("unknown config key '") + key + "' in '" + where + "'");
    }
}

template <class T>
void take(const json& j, const char* key, T& dst)
{
    if (j.contains(key))
        dst = j.at(key).get<T>();
}

json material_json(const Material& m)
{
    return {{"E", m.e_points}, {"alpha", m.alpha_points}, {"nu", m.nu}};
}

void apply_material(Material& m, const json& j, const char* where)
{
    reject_unknown(j, where, {"E", "alpha", "nu"});
    take(j, "E", m.e_points);
    take(j, "alpha", m.alpha_points);
    take(j, "nu", m.nu);
    m.check();
}

}  // namespace

RunConfig default_run_config()
{
    RunConfig c;
    if (const char* dir = std::getenv(kOutDirEnv); dir && *dir)
        c.output_dir = dir;
    return c;
}

json config_to_json(const RunConfig& c)
{
    const auto& s = c.settings;
    const auto& o = c.optimizer;
    json bounds;
    for (std::size_t i = 0; i < 4; ++i)
        bounds[kParamNames[i]] = {c.bounds[i].lo, c.bounds[i].hi};
    return {
        {"materials",
         {{"aluminium", material_json(s.materials[MaterialId::Aluminium])},
          {"invar", material_json(s.materials[MaterialId::Invar])},
          {"weak", material_json(s.materials[MaterialId::Weak])}}},
        {"alpha_norm", s.alpha_norm},
        {"t_ref", s.t_ref},
        {"delta_t", s.delta_t},
        {"seed_factor", s.seed_factor},
        {"shear_factor", s.shear_factor},
        {"strain", s.strain},
        {"bounds", bounds},
        {"optimizer",
         {{"swarm_size", o.swarm_size},
          {"max_outer", o.max_outer},
          {"inner_iterations", o.inner_iterations},
          {"inertia_start", o.inertia_start},
          {"inertia_end", o.inertia_end},
          {"cognitive", o.cognitive},
          {"social", o.social},
          {"velocity_clamp", o.velocity_clamp},
          {"penalty_growth", o.penalty_growth},
          {"initial_penalty", o.initial_penalty},
          {"max_penalty", o.max_penalty},
          {"max_multiplier", o.max_multiplier},
          {"constraint_tol", o.constraint_tol},
          {"stall_tol", o.stall_tol},
          {"stall_iterations", o.stall_iterations},
          {"max_evaluations", o.max_evaluations},
          {"hs_memory", o.hs_memory},
          {"hs_hmcr", o.hs_hmcr},
          {"hs_par", o.hs_par},
          {"hs_bandwidth", o.hs_bandwidth},
          {"hs_bandwidth_min", o.hs_bandwidth_min},
          {"hs_improvisations", o.hs_improvisations},
          {"warm_fraction", o.warm_fraction},
          {"workers", o.workers}}},
        {"output_dir", c.output_dir},
    };
}

void apply_config(RunConfig& c, const json& j)
{
    try {
        reject_unknown(j, "root",
                       {"materials", "alpha_norm", "t_ref", "delta_t", "seed_factor", "shear_factor", "strain",
                        "bounds", "optimizer", "output_dir"});
        auto& s = c.settings;
        if (j.contains("materials")) {
            const auto& m = j.at("materials");
            reject_unknown(m, "materials", {"aluminium", "invar", "weak"});
            if (m.contains("aluminium"))
                apply_material(s.materials[MaterialId::Aluminium], m.at("aluminium"), "aluminium");
            if (m.contains("invar"))
                apply_material(s.materials[MaterialId::Invar], m.at("invar"), "invar");
            if (m.contains("weak"))
                apply_material(s.materials[MaterialId::Weak], m.at("weak"), "weak");
        }
        take(j, "alpha_norm", s.alpha_norm);
        take(j, "t_ref", s.t_ref);
        take(j, "delta_t", s.delta_t);
        take(j, "seed_factor", s.seed_factor);
        take(j, "shear_factor", s.shear_factor);
        take(j, "strain", s.strain);
        take(j, "output_dir", c.output_dir);
        if (j.contains("bounds")) {
            const auto& b = j.at("bounds");
            reject_unknown(b, "bounds", {"h1", "h2", "theta", "t"});
            for (std::size_t i = 0; i < 4; ++i)
                if (b.contains(kParamNames[i])) {
                    const auto v = b.at(kParamNames[i]).get<std::vector<double>>();
                    if (v.size() != 2 || !(v[0] < v[1]))
                        throw DomainError(std::string("bound for ") + kParamNames[i] + " must be [lo, hi] with lo < hi");
                    c.bounds[i] = {v[0], v[1]};
                }
        }
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            auto& d = c.optimizer;
            reject_unknown(o, "optimizer",
                           {"swarm_size", "max_outer", "inner_iterations", "inertia_start", "inertia_end",
                            "cognitive", "social", "velocity_clamp", "penalty_growth", "initial_penalty",
                            "max_penalty", "max_multiplier", "constraint_tol", "stall_tol", "stall_iterations",
                            "max_evaluations", "hs_memory", "hs_hmcr", "hs_par", "hs_bandwidth", "hs_bandwidth_min",
                            "hs_improvisations", "warm_fraction", "workers"});
            take(o, "swarm_size", d.swarm_size);
            take(o, "max_outer", d.max_outer);
            take(o, "inner_iterations", d.inner_iterations);
            take(o, "inertia_start", d.inertia_start);
            take(o, "inertia_end", d.inertia_end);
            take(o, "cognitive", d.cognitive);
            take(o, "social", d.social);
            take(o, "velocity_clamp", d.velocity_clamp);
            take(o, "penalty_growth", d.penalty_growth);
            take(o, "initial_penalty", d.initial_penalty);
            take(o, "max_penalty", d.max_penalty);
            take(o, "max_multiplier", d.max_multiplier);
            take(o, "constraint_tol", d.constraint_tol);
            take(o, "stall_tol", d.stall_tol);
            take(o, "stall_iterations", d.stall_iterations);
            take(o, "max_evaluations", d.max_evaluations);
            take(o, "hs_memory", d.hs_memory);
            take(o, "hs_hmcr", d.hs_hmcr);
            take(o, "hs_par", d.hs_par);
            take(o, "hs_bandwidth", d.hs_bandwidth);
            take(o, "hs_bandwidth_min", d.hs_bandwidth_min);
            take(o, "hs_improvisations", d.hs_improvisations);
            take(o, "warm_fraction", d.warm_fraction);
            take(o, "workers", d.workers);
            d.check();
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("bad config value: ") + e.what());
    }
}

void load_config_file(RunConfig& c, const std::string& path)
{
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DomainError("config file " + path + " is not valid JSON: " + e.what());
    }
    apply_config(c, j);
}

}  // namespace starlat
