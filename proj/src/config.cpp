#include "dgtime/config.hpp"

#include "dgtime/errors.hpp"
#include "dgtime/polyquad.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace dgt {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!keys.contains(key))
            throw ConfigError(where + "." + key + ": unknown key");
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

double parse_exponent(const json& v, const std::string& where)
{
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity")
            return NormSpec::infinity;
        throw ConfigError(where + ": expected a number or \"inf\", got \"" + s + "\"");
    }
    if (!v.is_number())
        throw ConfigError(where + ": expected a number or \"inf\"");
    return v.get<double>();
}

template <class E>
E parse_enum(const json& obj, const char* key, const std::string& where, E fallback,
             std::initializer_list<std::pair<const char*, E>> names)
{
    if (!obj.contains(key))
        return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string())
        throw ConfigError(where + "." + key + ": expected a string");
    const auto s = v.get<std::string>();
    for (const auto& [name, value] : names)
        if (s == name)
            return value;
    throw ConfigError(where + "." + key + ": unrecognized value \"" + s + "\"");
}

} // namespace

const char* to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::heat1d: return "heat1d";
    case ProblemKind::nonnormal: return "nonnormal";
    case ProblemKind::scalar: return "scalar";
    case ProblemKind::nonautonomous_heat1d: return "nonautonomous-heat1d";
    case ProblemKind::matrix_file: return "matrix-file";
    }
    return "?";
}

RunConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    reject_unknown(doc, "config",
                   {"problem", "solver", "norm", "quadrature", "output", "oracle", "interp"});
    RunConfig cfg;

    if (doc.contains("problem")) {
        const auto& p = doc["problem"];
        const std::string w = "problem";
        reject_unknown(p, w,
                       {"kind", "dimension", "diffusion", "skew", "lambda", "modulation", "horizon",
                        "matrix_file", "solution", "forcing", "trig_terms"});
        auto& pc = cfg.problem;
        pc.kind = parse_enum(p, "kind", w, pc.kind,
                             {{"heat1d", ProblemKind::heat1d},
                              {"nonnormal", ProblemKind::nonnormal},
                              {"scalar", ProblemKind::scalar},
                              {"nonautonomous-heat1d", ProblemKind::nonautonomous_heat1d},
                              {"matrix-file", ProblemKind::matrix_file}});
        read(p, "dimension", w, pc.dimension);
        read(p, "diffusion", w, pc.diffusion);
        read(p, "skew", w, pc.skew);
        read(p, "lambda", w, pc.lambda);
        read(p, "horizon", w, pc.horizon);
        read(p, "matrix_file", w, pc.matrix_file);
        read(p, "trig_terms", w, pc.trig_terms);
        if (p.contains("modulation")) {
            const auto& m = p["modulation"];
            reject_unknown(m, w + ".modulation", {"offset", "slope"});
            read(m, "offset", w + ".modulation", pc.modulation_offset);
            read(m, "slope", w + ".modulation", pc.modulation_slope);
        }
        pc.solution = parse_enum(p, "solution", w, pc.solution,
                                 {{"sin-exp", SolutionShape::sin_exp}, {"exp", SolutionShape::exp}});
        pc.forcing = parse_enum(p, "forcing", w, pc.forcing,
                                {{"manufactured", ForcingKind::manufactured},
                                 {"random-trig", ForcingKind::random_trig},
                                 {"zero", ForcingKind::zero}});
    }
    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        reject_unknown(s, "solver", {"q_list", "N_list", "path"});
        read(s, "q_list", "solver", cfg.solver.q_list);
        read(s, "N_list", "solver", cfg.solver.n_list);
        cfg.solver.path = parse_enum(s, "path", "solver", cfg.solver.path,
                                     {{"galerkin", PathChoice::galerkin},
                                      {"radau-averaged", PathChoice::radau_averaged},
                                      {"both", PathChoice::both}});
    }
    if (doc.contains("norm")) {
        const auto& n = doc["norm"];
        reject_unknown(n, "norm", {"p_list", "x_norm"});
        if (n.contains("p_list")) {
            if (!n["p_list"].is_array())
                throw ConfigError("norm.p_list: expected an array");
            cfg.norm.p_list.clear();
            for (std::size_t i = 0; i < n["p_list"].size(); ++i)
                cfg.norm.p_list.push_back(
                    parse_exponent(n["p_list"][i], "norm.p_list[" + std::to_string(i) + "]"));
        }
        if (n.contains("x_norm")) {
            const auto& x = n["x_norm"];
            if (x.is_string()) {
                if (x.get<std::string>() != "euclidean")
                    throw ConfigError("norm.x_norm: expected \"euclidean\" or {\"weights\": [...]}");
            } else {
                reject_unknown(x, "norm.x_norm", {"weights"});
                read(x, "weights", "norm.x_norm", cfg.norm.x_norm.weights);
            }
        }
    }
    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        reject_unknown(q, "quadrature", {"panels", "points", "quad_A_points", "forcing_points"});
        read(q, "panels", "quadrature", cfg.quadrature.panels);
        read(q, "points", "quadrature", cfg.quadrature.points);
        read(q, "quad_A_points", "quadrature", cfg.quadrature.quad_a_points);
        read(q, "forcing_points", "quadrature", cfg.quadrature.forcing_points);
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        reject_unknown(o, "output", {"csv_path", "plotdata_path", "seed"});
        read(o, "csv_path", "output", cfg.output.csv_path);
        read(o, "plotdata_path", "output", cfg.output.plotdata_path);
        read(o, "seed", "output", cfg.output.seed);
    }
    if (doc.contains("oracle")) {
        const auto& o = doc["oracle"];
        reject_unknown(o, "oracle", {"trials", "max_dimension"});
        read(o, "trials", "oracle", cfg.oracle.trials);
        read(o, "max_dimension", "oracle", cfg.oracle.max_dimension);
    }
    if (doc.contains("interp")) {
        const auto& i = doc["interp"];
        reject_unknown(i, "interp", {"reproduction_trials", "norm_samples"});
        read(i, "reproduction_trials", "interp", cfg.interp.reproduction_trials);
        read(i, "norm_samples", "interp", cfg.interp.norm_samples);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void RunConfig::validate(bool solver_facing) const
{
    const auto& pc = problem;
    if (pc.dimension == 0)
        throw ConfigError("problem.dimension: must be positive");
    if (pc.kind == ProblemKind::nonnormal && pc.dimension < 2)
        throw ConfigError("problem.dimension: nonnormal model needs dimension >= 2");
    if (!(pc.diffusion > 0.0))
        throw ConfigError("problem.diffusion: must be positive");
    if (!(pc.lambda > 0.0))
        throw ConfigError("problem.lambda: must be positive");
    if (!(pc.horizon > 0.0) || !std::isfinite(pc.horizon))
        throw ConfigError("problem.horizon: must be positive and finite");
    if (pc.kind == ProblemKind::nonautonomous_heat1d) {
        const double lo = std::min(pc.modulation_offset,
                                   pc.modulation_offset + pc.modulation_slope * pc.horizon);
        if (!(lo > 0.0))
            throw ConfigError("problem.modulation: a(t) = offset + slope t must stay positive on [0, T]");
    }
    if (pc.kind == ProblemKind::matrix_file && pc.matrix_file.empty())
        throw ConfigError("problem.matrix_file: required for kind matrix-file");
    if (pc.trig_terms < 1)
        throw ConfigError("problem.trig_terms: must be at least 1");

    if (solver.q_list.empty())
        throw ConfigError("solver.q_list: must not be empty");
    for (int q : solver.q_list)
        if (q < 1 || q > max_radau_stages)
            throw ConfigError("solver.q_list: q = " + std::to_string(q) + " outside [1, " +
                              std::to_string(max_radau_stages) + "]");
    if (solver.n_list.empty())
        throw ConfigError("solver.N_list: must not be empty");
    for (std::size_t i = 0; i < solver.n_list.size(); ++i) {
        if (solver.n_list[i] == 0)
            throw ConfigError("solver.N_list: entries must be positive");
        if (i > 0 && solver.n_list[i] <= solver.n_list[i - 1])
            throw ConfigError("solver.N_list: must be strictly increasing");
    }
    if (pc.kind == ProblemKind::nonautonomous_heat1d && solver.path != PathChoice::galerkin)
        throw ConfigError("solver.path: nonautonomous problems support the galerkin path only");

    if (norm.p_list.empty())
        throw ConfigError("norm.p_list: must not be empty");
    for (double p : norm.p_list) {
        NormSpec spec{p, norm.x_norm};
        try {
            if (solver_facing)
                spec.validate_for_max_regularity();
            else
                spec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("norm.p_list: ") + e.what());
        }
    }
    if (!norm.x_norm.weights.empty() && pc.kind != ProblemKind::matrix_file &&
        norm.x_norm.weights.size() != (pc.kind == ProblemKind::scalar ? 1 : pc.dimension))
        throw ConfigError("norm.x_norm.weights: count must equal the problem dimension");

    if (quadrature.panels < 1)
        throw ConfigError("quadrature.panels: must be positive");
    if (quadrature.points < 1 || quadrature.points > GaussRule::max_points)
        throw ConfigError("quadrature.points: must lie in [1, 64]");
    if (quadrature.quad_a_points < 0 || quadrature.quad_a_points > GaussRule::max_points)
        throw ConfigError("quadrature.quad_A_points: must lie in [0, 64] (0 = 2q)");
    if (quadrature.forcing_points < 0 || quadrature.forcing_points > GaussRule::max_points)
        throw ConfigError("quadrature.forcing_points: must lie in [0, 64] (0 = q+3)");

    if (oracle.trials < 1)
        throw ConfigError("oracle.trials: must be positive");
    if (oracle.max_dimension < 1)
        throw ConfigError("oracle.max_dimension: must be positive");
    if (interp.reproduction_trials < 1)
        throw ConfigError("interp.reproduction_trials: must be positive");
    if (interp.norm_samples < 1)
        throw ConfigError("interp.norm_samples: must be positive");
}

} // namespace dgt
