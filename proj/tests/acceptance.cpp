// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "dgtime/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace dgt;

namespace {

const std::string configs = DGTIME_CONFIG_DIR;

RunConfig config(const char* name)
{
    return load_config(configs + "/" + name);
}

bool starts_with(const std::string& s, const std::string& prefix)
{
    return s.rfind(prefix, 0) == 0;
}

struct Verdict {
    bool passed = true;
    std::vector<std::string> detail;

    // Requires at least one property per prefix and all of them to pass.
    void require(const std::vector<PropertyResult>& props, std::initializer_list<const char*> prefixes)
    {
        for (const char* prefix : prefixes) {
            int seen = 0;
            for (const auto& p : props) {
                if (!starts_with(p.name, prefix))
                    continue;
                ++seen;
                if (!p.passed) {
                    passed = false;
                    detail.push_back(p.name + ": " + p.detail);
                }
            }
            if (seen == 0) {
                passed = false;
                detail.push_back(std::string("no property named '") + prefix + "'");
            }
        }
    }

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            passed = false;
            detail.push_back(what);
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string error_csv(const ErrorReport& r)
{
    std::ostringstream out;
    write_error_csv(out, r.rows);
    write_rates_csv(out, r.rates);
    return out.str();
}

std::string interp_csv(const InterpReport& r)
{
    std::ostringstream out;
    write_interp_csv(out, r.rows);
    write_rates_csv(out, r.rates);
    return out.str();
}

} // namespace

int main()
{
    int failures = 0;
    auto report = [&](int id, const char* title, const std::function<Verdict()>& body) {
        Verdict v;
        try {
            v = body();
        } catch (const std::exception& e) {
            v.passed = false;
            v.detail.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s  %2d  %s\n", v.passed ? "PASS" : "FAIL", id, title);
        for (const auto& d : v.detail)
            std::printf("          %s\n", d.c_str());
        std::fflush(stdout);
        failures += v.passed ? 0 : 1;
    };

    const auto heat_start = std::chrono::steady_clock::now();
    const auto heat = run_convergence(config("converge_heat.json"));
    const double heat_seconds = seconds_since(heat_start);

    report(1, "a priori order of A(u - U)", [&] {
        Verdict v;
        v.require(heat.properties, {"manufactured forcing consistency", "all slab solves succeeded", "rate err_AU "});
        v.check(heat_seconds < 60.0, "heat sweep took " + format_number(heat_seconds) + " s");
        return v;
    });
    report(2, "reconstruction order", [&] {
        Verdict v;
        v.require(heat.properties, {"rate err_dhatU ", "rate err_AhatU "});
        return v;
    });
    report(3, "a posteriori lower bound, estimator rate, effectivity", [&] {
        Verdict v;
        v.require(heat.properties, {"lower a posteriori bound on every prefix", "rate resid ", "effectivity spread"});
        return v;
    });

    const auto oracle_cfg = config("oracle.json");
    const auto oracle_start = std::chrono::steady_clock::now();
    const auto oracle = run_oracle_check(oracle_cfg);
    const double oracle_seconds = seconds_since(oracle_start);

    report(4, "Galerkin and averaged-Radau stage values agree", [&] {
        Verdict v;
        v.require(oracle.properties, {"galerkin vs averaged-radau stage values"});
        v.check(oracle_seconds < 10.0, "oracle check took " + format_number(oracle_seconds) + " s");
        return v;
    });
    report(5, "exactness cases", [&] {
        Verdict v;
        v.require(oracle.properties, {"polynomial exactness", "dG(0) recursion"});
        const auto scalar = run_convergence(config("scalar_exact.json"));
        v.require(scalar.properties, {"per-run exact checks", "all slab solves succeeded"});
        for (const auto& r : scalar.rows)
            v.check(r.note == "exact-recursion", "scalar row note: " + r.note);
        return v;
    });
    report(6, "collocation identity", [&] {
        Verdict v;
        v.require(oracle.properties, {"collocation identity at all stages"});
        return v;
    });

    const auto interp_cfg = config("interp.json");
    const auto interp = run_interp_check(interp_cfg);

    report(7, "reproduction and interpolation rates", [&] {
        Verdict v;
        v.require(interp.properties, {"reproduction hat(tilde v) = v", "interpolation rate "});
        return v;
    });
    report(8, "norm toolkit", [&] {
        Verdict v;
        v.require(interp.properties, {"norm ratio interval drift", "continuous norm dominated by discrete norm",
                                      "discrete norms of v and v_hat coincide",
                                      "backward difference commutes with reconstruction"});
        return v;
    });
    report(9, "nonautonomous rates and max-reg ratio", [&] {
        Verdict v;
        const auto na = run_convergence(config("converge_nonautonomous.json"));
        v.require(na.properties,
                  {"manufactured forcing consistency", "all slab solves succeeded", "rate err_AU ", "rate err_dhatU ",
                   "rate err_AhatU ", "rate resid ", "lower a posteriori bound on every prefix", "effectivity spread"});
        const auto mr = run_maxreg_sweep(config("maxreg_nonautonomous.json"));
        v.require(mr.properties, {"max-reg ratio finite", "max-reg ratio variation"});
        return v;
    });
    report(10, "bit-identical output for a fixed seed", [&] {
        Verdict v;
        v.check(error_csv(heat) == error_csv(run_convergence(config("converge_heat.json"))),
                "converge_heat differs between runs");
        const auto mr = config("maxreg_heat.json");
        v.check(error_csv(run_maxreg_sweep(mr)) == error_csv(run_maxreg_sweep(mr)), "maxreg_heat differs between runs");
        v.check(interp_csv(interp) == interp_csv(run_interp_check(interp_cfg)), "interp differs between runs");
        return v;
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
