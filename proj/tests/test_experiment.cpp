#include "dgtime/errors.hpp"
#include "dgtime/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dgt;

namespace {

std::string config_error(const std::string& text, bool validate = true)
{
    try {
        const auto cfg = parse_config(text);
        if (validate)
            cfg.validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

RunConfig small_config(const std::string& problem)
{
    return parse_config(R"({"problem": )" + problem + R"(,
        "solver": {"q_list": [1, 2], "N_list": [4, 8, 16, 32]},
        "norm": {"p_list": [2]},
        "quadrature": {"panels": 4, "points": 8}})");
}

std::string csv_of(const ErrorReport& r)
{
    std::ostringstream out;
    write_error_csv(out, r.rows);
    write_rates_csv(out, r.rates);
    return out.str();
}

} // namespace

TEST(Config, DefaultsAndParsedValues)
{
    const auto cfg = parse_config(R"({
        "problem": {"kind": "nonautonomous-heat1d", "dimension": 12, "modulation": {"offset": 2, "slope": -1}},
        "solver": {"q_list": [2], "N_list": [4, 8], "path": "galerkin"},
        "norm": {"p_list": [3, "inf"], "x_norm": {"weights": [1,1,1,1,1,1,1,1,1,1,1,1]}},
        "output": {"seed": 9}})");
    EXPECT_EQ(cfg.problem.kind, ProblemKind::nonautonomous_heat1d);
    EXPECT_EQ(cfg.problem.dimension, 12u);
    EXPECT_EQ(cfg.problem.modulation_slope, -1.0);
    EXPECT_EQ(cfg.solver.n_list, (std::vector<std::size_t>{4, 8}));
    EXPECT_EQ(cfg.norm.p_list[1], NormSpec::infinity);
    EXPECT_EQ(cfg.norm.x_norm.weights.size(), 12u);
    EXPECT_EQ(cfg.output.seed, 9u);
    EXPECT_EQ(cfg.quadrature.panels, 16);
    EXPECT_NO_THROW(cfg.validate(false));
    EXPECT_THROW(cfg.validate(true), ConfigError); // p = inf is not solver-facing
}

TEST(Config, FieldLevelErrors)
{
    EXPECT_NE(config_error(R"({"problem": {"bogus": 1}})", false).find("problem.bogus"), std::string::npos);
    EXPECT_NE(config_error(R"({"extra": {}})", false).find("config.extra"), std::string::npos);
    EXPECT_NE(config_error(R"({"solver": {"N_list": []}})").find("solver.N_list"), std::string::npos);
    EXPECT_NE(config_error(R"({"solver": {"N_list": [8, 8]}})").find("strictly increasing"), std::string::npos);
    EXPECT_NE(config_error(R"({"solver": {"q_list": [9]}})").find("solver.q_list"), std::string::npos);
    EXPECT_NE(config_error(R"({"norm": {"p_list": [1]}})").find("norm.p_list"), std::string::npos);
    EXPECT_NE(config_error(R"({"norm": {"p_list": ["two"]}})", false).find("norm.p_list[0]"), std::string::npos);
    EXPECT_NE(config_error(R"({"problem": {"kind": "wave"}})", false).find("problem.kind"), std::string::npos);
    EXPECT_NE(config_error(R"({"problem": {"dimension": "many"}})", false).find("problem.dimension"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"problem": {"kind": "nonautonomous-heat1d"}, "solver": {"path": "both"}})")
                  .find("solver.path"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"problem": {"kind": "nonautonomous-heat1d", "modulation": {"slope": -2}}})")
                  .find("problem.modulation"),
              std::string::npos);
    EXPECT_NE(config_error("{not json").find("malformed"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(FitRate, SyntheticData)
{
    std::vector<std::pair<double, double>> exact, perturbed, flat;
    for (double k : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        exact.emplace_back(k, k * k);
        perturbed.emplace_back(k, 3.0 * std::pow(k, 1.5) * (1.0 + 0.01 * std::sin(1.0 / k)));
        flat.emplace_back(k, 0.3);
    }
    EXPECT_NEAR(fit_rate(exact), 2.0, 1e-12);
    EXPECT_NEAR(fit_rate(perturbed), 1.5, 0.05);
    EXPECT_NEAR(fit_rate(flat), 0.0, 1e-12);
    // the coarsest level is ignored
    exact.front().second = 1e6;
    EXPECT_NEAR(fit_rate(exact), 2.0, 1e-12);
}

TEST(FitRate, NoFitWithFewerThanFourUsableLevels)
{
    std::vector<std::pair<double, double>> e{{0.1, 0.01}, {0.05, 0.0025}, {0.025, 0.0}, {0.0125, -1.0}};
    EXPECT_TRUE(std::isnan(fit_rate(e)));
    e.resize(3);
    EXPECT_TRUE(std::isnan(fit_rate(e)));
}

TEST(Random, DeterministicForFixedSeed)
{
    Random a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform(-1.0, 3.0);
        EXPECT_EQ(x, b.uniform(-1.0, 3.0));
        EXPECT_GE(x, -1.0);
        EXPECT_LT(x, 3.0);
        EXPECT_EQ(a.normal(), b.normal());
        EXPECT_LT(a.index(7), 7u);
        b.index(7);
    }
}

TEST(ManufacturedProblem, ForcingIsConsistent)
{
    for (const char* kind : {"heat1d", "nonnormal", "scalar", "nonautonomous-heat1d"}) {
        auto cfg = parse_config(std::string(R"({"problem": {"kind": ")") + kind +
                                R"(", "dimension": 9, "skew": 0.5}})");
        const auto mp = make_problem(cfg.problem, 1);
        EXPECT_TRUE(mp.has_exact());
        EXPECT_LE(forcing_consistency(mp, 3), forcing_check_tolerance) << kind;
        EXPECT_EQ(mp.problem.u0, mp.exact.value(0.0));
    }
    auto cfg = parse_config(R"({"problem": {"forcing": "random-trig", "dimension": 7}})");
    const auto a = make_problem(cfg.problem, 5), b = make_problem(cfg.problem, 5), c = make_problem(cfg.problem, 6);
    EXPECT_FALSE(a.has_exact());
    EXPECT_EQ(a.problem.u0, Vector::Zero(7));
    EXPECT_EQ(a.problem.f.eval(0.3), b.problem.f.eval(0.3));
    EXPECT_NE(a.problem.f.eval(0.3), c.problem.f.eval(0.3));
}

TEST(RunConvergence, ScalarDegreeZeroRowsAreExactRecursion)
{
    auto cfg = small_config(R"({"kind": "scalar", "lambda": 2.0})");
    cfg.solver.q_list = {1};
    cfg.solver.path = PathChoice::both;
    const auto report = run_convergence(cfg);
    ASSERT_EQ(report.rows.size(), 4u);
    for (const auto& r : report.rows)
        EXPECT_EQ(r.note, "exact-recursion");
    EXPECT_TRUE(all_passed(report.properties));
}

TEST(RunConvergence, HeatRunsAreDeterministicAndWellFormed)
{
    auto cfg = small_config(R"({"kind": "heat1d", "dimension": 10})");
    const auto a = run_convergence(cfg);
    const auto b = run_convergence(cfg);
    EXPECT_EQ(csv_of(a), csv_of(b));
    std::istringstream in(csv_of(a));
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "q,p,N,k,err_AU,err_dhatU,err_AhatU,resid,effectivity,maxreg_ratio,note");
    ASSERT_EQ(a.rows.size(), 8u);
    EXPECT_EQ(a.rows[0].q, 1);
    EXPECT_EQ(a.rows[4].q, 2);
    for (const auto& r : a.rows) {
        EXPECT_TRUE(r.lower_ok);
        EXPECT_TRUE(std::isnan(r.maxreg_ratio)); // u0 != 0
    }
    EXPECT_EQ(a.rates.size(), 8u);
}

TEST(RunConvergence, RejectsForcingWithoutExactSolution)
{
    auto cfg = small_config(R"({"kind": "heat1d", "dimension": 5, "forcing": "zero"})");
    EXPECT_THROW(run_convergence(cfg), ConfigError);
    cfg.solver.n_list.clear();
    EXPECT_THROW(run_convergence(cfg), ConfigError);
}

TEST(RunMaxreg, ZeroForcingIsDegenerate)
{
    auto cfg = small_config(R"({"kind": "heat1d", "dimension": 5, "forcing": "zero"})");
    const auto report = run_maxreg_sweep(cfg);
    for (const auto& r : report.rows) {
        EXPECT_EQ(r.note, "degenerate");
        EXPECT_TRUE(std::isnan(r.maxreg_ratio));
    }
    EXPECT_TRUE(all_passed(report.properties));
    EXPECT_THROW(run_maxreg_sweep(small_config(R"({"kind": "heat1d", "dimension": 5})")), ConfigError);
}

TEST(RunMaxreg, NonautonomousRowsRecordStepTimesLipschitz)
{
    auto cfg = small_config(R"({"kind": "nonautonomous-heat1d", "dimension": 8, "forcing": "random-trig"})");
    const auto report = run_maxreg_sweep(cfg);
    for (const auto& r : report.rows) {
        EXPECT_TRUE(std::isfinite(r.maxreg_ratio));
        EXPECT_NE(r.note.find("k*L=" + format_number(r.k * 0.5)), std::string::npos) << r.note;
    }
}

TEST(FormatNumber, RoundTripsAndSpellsSpecialValues)
{
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(-INFINITY), "-inf");
}
