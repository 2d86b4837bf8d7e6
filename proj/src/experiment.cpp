#include "dgtime/experiment.hpp"

#include "dgtime/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace dgt {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
// equality cases (q = 1) of the dominance bound hold only up to rounding
constexpr double dominance_slack = 1e-12;
// exact for |v|^p, v of degree <= 3 and even p <= 4
constexpr LpQuadrature toolkit_quadrature{2, 10};

// Runs body(i) for i in [0, count) on a small worker pool. Results must be
// written to slots indexed by i so that output order never depends on
// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::string sanitize(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::string p_label(double p) { return p == NormSpec::infinity ? "inf" : format_number(p); }

Vector grid_shape(std::size_t d, SolutionShape shape)
{
    Vector s(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        const double x = (static_cast<double>(j) + 1.0) / (static_cast<double>(d) + 1.0);
        s[static_cast<Eigen::Index>(j)] = shape == SolutionShape::sin_exp ? std::sin(std::numbers::pi * x) : 1.0;
    }
    return s;
}

double relative_max_difference(const std::vector<Matrix>& a, const std::vector<Matrix>& b)
{
    double diff = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        diff = std::max(diff, (a[n] - b[n]).cwiseAbs().maxCoeff());
        scale = std::max(scale, a[n].cwiseAbs().maxCoeff());
    }
    return scale == 0.0 ? diff : diff / scale;
}

// Sup-norm of each Lagrange basis function on [0,1], by dense sampling.
std::vector<double> basis_sup_norms(const LagrangeBasis& basis)
{
    constexpr int samples = 20000;
    std::vector<double> out(basis.size(), 0.0), phi(basis.size());
    for (int s = 0; s <= samples; ++s) {
        basis.values(static_cast<double>(s) / samples, phi);
        for (std::size_t i = 0; i < phi.size(); ++i)
            out[i] = std::max(out[i], std::abs(phi[i]));
    }
    return out;
}

struct RateSpec {
    const char* metric;
    double ErrorRow::*field;
};

constexpr RateSpec convergence_metrics[] = {
    {"err_AU", &ErrorRow::err_au},
    {"err_dhatU", &ErrorRow::err_dhat},
    {"err_AhatU", &ErrorRow::err_ahat},
    {"resid", &ErrorRow::resid},
};

std::string describe_rate(double rate, double required)
{
    return "rate " + format_number(rate) + " (required >= " + format_number(required) + ")";
}

std::vector<std::size_t> rows_for(const std::vector<ErrorRow>& rows, int q, double p)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].q == q && rows[i].p == p)
            idx.push_back(i);
    return idx;
}

std::string cell_label(int q, double p) { return "q=" + std::to_string(q) + " p=" + p_label(p); }

SolverQuadrature solver_quadrature(const RunConfig& config)
{
    return SolverQuadrature{config.quadrature.forcing_points, config.quadrature.quad_a_points};
}

LpQuadrature lp_quadrature(const RunConfig& config)
{
    return LpQuadrature{config.quadrature.panels, config.quadrature.points};
}

DGSolution solve_configured(const ProblemSpec& problem, const TimeMesh& mesh, int q,
                            SolverPath path, const RunConfig& config)
{
    const auto& tableau = radau_tableau(q);
    const auto sq = solver_quadrature(config);
    if (!problem.autonomous()) {
        const int points = sq.operator_points > 0 ? sq.operator_points : 2 * q;
        return solve_dg_nonautonomous(problem, mesh, tableau, gauss_rule(points), sq);
    }
    return solve_dg(problem, mesh, tableau, path, sq);
}

std::string smallness_note(const ProblemSpec& problem, double k)
{
    if (problem.autonomous())
        return {};
    const auto& op = *std::get<NonautonomousOperator>(problem.op);
    return "k*L=" + format_number(k * op.lipschitz_bound());
}

} // namespace

// ------------------------------------------------------------------- Random

double Random::uniform(double lo, double hi)
{
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double Random::normal()
{
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Random::index(std::size_t count)
{
    return static_cast<std::size_t>(uniform() * static_cast<double>(count)) % count;
}

Vector Random::vector(std::size_t d)
{
    Vector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = normal();
    return v;
}

// --------------------------------------------------------------- problems

ManufacturedProblem make_problem(const ProblemConfig& pc, std::uint64_t seed)
{
    std::variant<AutonomousOperator, NonautonomousOperator> op;
    std::size_t d = pc.dimension;
    switch (pc.kind) {
    case ProblemKind::heat1d:
        op = std::make_shared<const OperatorModel>(laplacian_1d(d, pc.diffusion));
        break;
    case ProblemKind::nonnormal:
        op = std::make_shared<const OperatorModel>(nonnormal_model(d, pc.skew));
        break;
    case ProblemKind::scalar:
        d = 1;
        op = std::make_shared<const OperatorModel>(Matrix::Constant(1, 1, pc.lambda), "scalar");
        break;
    case ProblemKind::matrix_file: {
        auto model = std::make_shared<const OperatorModel>(read_matrix_file(pc.matrix_file));
        d = model->dim();
        op = std::move(model);
        break;
    }
    case ProblemKind::nonautonomous_heat1d: {
        auto base = std::make_shared<const OperatorModel>(laplacian_1d(d, pc.diffusion));
        const double offset = pc.modulation_offset, slope = pc.modulation_slope;
        Modulation a{[offset, slope](double t) { return offset + slope * t; }, std::abs(slope)};
        op = std::make_shared<const TimeDependentOperatorModel>(
            nonautonomous_model(std::move(base), std::move(a), nullptr, pc.horizon));
        break;
    }
    }

    ManufacturedProblem mp;
    mp.problem.op = op;
    mp.problem.horizon = pc.horizon;

    if (pc.forcing == ForcingKind::manufactured) {
        const Vector s = pc.kind == ProblemKind::scalar ? Vector::Ones(1) : grid_shape(d, pc.solution);
        const double rate = pc.kind == ProblemKind::scalar ? pc.lambda : 1.0;
        mp.exact.value = [s, rate](double t) { return Vector(std::exp(-rate * t) * s); };
        mp.exact.derivative = [s, rate](double t) { return Vector(-rate * std::exp(-rate * t) * s); };
        auto value = mp.exact.value, deriv = mp.exact.derivative;
        if (pc.kind == ProblemKind::scalar) {
            // u = exp(-lambda t) solves the homogeneous equation
            mp.problem.f = Forcing{[](double) { return Vector(Vector::Zero(1)); }, 0};
        } else {
            ProblemSpec carrier;
            carrier.op = op;
            mp.problem.f = Forcing{[carrier, value, deriv](double t) {
                                       return Vector(deriv(t) + carrier.apply_at(t, value(t)));
                                   },
                                   std::nullopt};
        }
        mp.problem.u0 = value(0.0);
    } else if (pc.forcing == ForcingKind::random_trig) {
        Random rng(seed);
        const int terms = pc.trig_terms;
        std::vector<double> amp(terms), freq(terms), phase(terms);
        for (int m = 0; m < terms; ++m) {
            amp[m] = rng.uniform(-1.0, 1.0);
            freq[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            phase[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        std::vector<Vector> modes(terms);
        for (int m = 0; m < terms; ++m) {
            modes[m].resize(static_cast<Eigen::Index>(d));
            for (std::size_t j = 0; j < d; ++j) {
                const double x = (static_cast<double>(j) + 1.0) / (static_cast<double>(d) + 1.0);
                modes[m][static_cast<Eigen::Index>(j)] = std::sin((m + 1) * std::numbers::pi * x);
            }
        }
        mp.problem.f = Forcing{[=](double t) {
                                   Vector f = Vector::Zero(static_cast<Eigen::Index>(d));
                                   for (int m = 0; m < terms; ++m)
                                       f += amp[m] * std::cos(freq[m] * t + phase[m]) * modes[m];
                                   return f;
                               },
                               std::nullopt};
        mp.problem.u0 = Vector::Zero(static_cast<Eigen::Index>(d));
    } else {
        mp.problem.f = Forcing{[d](double) { return Vector(Vector::Zero(static_cast<Eigen::Index>(d))); }, 0};
        mp.problem.u0 = Vector::Zero(static_cast<Eigen::Index>(d));
    }
    mp.problem.validate();
    return mp;
}

double forcing_consistency(const ManufacturedProblem& mp, std::uint64_t seed, int samples)
{
    if (!mp.has_exact())
        return 0.0;
    Random rng(seed);
    const double h = 1e-4 * mp.problem.horizon;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double t = rng.uniform(h, mp.problem.horizon - h);
        const Vector du = (mp.exact.value(t + h) - mp.exact.value(t - h)) / (2.0 * h);
        const Vector au = mp.problem.apply_at(t, mp.exact.value(t));
        const Vector expected = du + au;
        const Vector f = mp.problem.f.eval(t);
        // relative to the size of the two terms, so that f = 0 is handled
        const double scale = std::max(1e-300, du.norm() + au.norm());
        worst = std::max(worst, (f - expected).norm() / scale);
    }
    return worst;
}

// -------------------------------------------------------------- rate fits

double fit_rate(std::span<const std::pair<double, double>> errors)
{
    std::vector<std::pair<double, double>> usable;
    for (const auto& [k, e] : errors) {
        if (e > 0.0 && k > 0.0 && std::isfinite(e))
            usable.emplace_back(k, e);
        else
            std::clog << "warning: fit_rate drops nonpositive or non-finite error " << e
                      << " at k = " << k << '\n';
    }
    if (usable.size() < static_cast<std::size_t>(rate_levels))
        return nan;
    std::sort(usable.begin(), usable.end());
    usable.resize(rate_levels);
    double sx = 0.0, sy = 0.0;
    for (const auto& [k, e] : usable) {
        sx += std::log(k);
        sy += std::log(e);
    }
    const double mx = sx / rate_levels, my = sy / rate_levels;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [k, e] : usable) {
        sxy += (std::log(k) - mx) * (std::log(e) - my);
        sxx += (std::log(k) - mx) * (std::log(k) - mx);
    }
    return sxy / sxx;
}

bool all_passed(const std::vector<PropertyResult>& props)
{
    return std::all_of(props.begin(), props.end(), [](const auto& p) { return p.passed; });
}

// ------------------------------------------------------------ convergence

namespace {

std::vector<ErrorRow> convergence_cell(const ManufacturedProblem& mp, const RunConfig& config, int q,
                                       std::size_t n_slabs)
{
    const auto& problem = mp.problem;
    const TimeMesh mesh(problem.horizon, n_slabs);
    const auto lq = lp_quadrature(config);
    std::vector<ErrorRow> rows;
    auto blank = [&](double p) {
        ErrorRow r;
        r.q = q;
        r.p = p;
        r.N = n_slabs;
        r.k = mesh.step();
        return r;
    };
    try {
        const SolverPath path = config.solver.path == PathChoice::radau_averaged
                                    ? SolverPath::radau_averaged
                                    : SolverPath::galerkin;
        const DGSolution sol = solve_configured(problem, mesh, q, path, config);
        std::string note = "ok";
        if (config.solver.path == PathChoice::both) {
            const auto other = solve_dg(problem, mesh, radau_tableau(q), SolverPath::radau_averaged,
                                        solver_quadrature(config));
            const double disc = relative_max_difference(sol.U.nodal(), other.U.nodal());
            note = disc <= equivalence_tolerance ? "paths-agree" : "paths-differ:" + format_number(disc);
        }
        if (config.problem.kind == ProblemKind::scalar && q == 1) {
            const double base = 1.0 / (1.0 + mesh.step() * config.problem.lambda);
            double worst = 0.0;
            for (std::size_t n = 0; n < n_slabs; ++n) {
                const double expected = std::pow(base, static_cast<double>(n + 1));
                worst = std::max(worst, std::abs(sol.stage_values(n)(0, 0) - expected) / expected);
            }
            note = worst <= recursion_tolerance ? "exact-recursion"
                                                : "exact-recursion-failed:" + format_number(worst);
        }
        if (const auto extra = smallness_note(problem, mesh.step()); !extra.empty())
            note += " " + extra;

        const auto recon = reconstruct(sol.U);
        const Residual resid(sol, recon, problem);
        const bool zero_start = problem.u0.lpNorm<Eigen::Infinity>() == 0.0;
        for (double p : config.norm.p_list) {
            const NormSpec spec{p, config.norm.x_norm};
            ErrorRow r = blank(p);
            r.err_au = lp_norm(
                [&](std::size_t n, double tau) {
                    const double t = mesh.time(n, tau);
                    return problem.apply_at(t, mp.exact.value(t) - sol.U.evaluate(n, tau));
                },
                mesh, spec, std::nullopt, lq);
            const auto bounds = aposteriori_prefixes(resid, mp.exact, spec, lq);
            r.lower_ok = std::all_of(bounds.begin(), bounds.end(), [](const auto& b) { return b.lower_ok; });
            r.err_dhat = bounds.back().err_deriv;
            r.err_ahat = bounds.back().err_A;
            r.resid = bounds.back().residual;
            r.effectivity = bounds.back().upper_ratio;
            r.maxreg_ratio = zero_start ? maxreg_report(sol, recon, problem, spec, lq).ratio.back() : nan;
            r.note = note;
            rows.push_back(std::move(r));
        }
    } catch (const StepFailure& e) {
        for (double p : config.norm.p_list) {
            ErrorRow r = blank(p);
            r.err_au = r.err_dhat = r.err_ahat = r.resid = r.effectivity = r.maxreg_ratio = nan;
            r.note = std::string("step-failure:") + e.what();
            r.lower_ok = false;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

void append_rates(ErrorReport& report, const RunConfig& config)
{
    for (int q : config.solver.q_list) {
        for (double p : config.norm.p_list) {
            const auto idx = rows_for(report.rows, q, p);
            for (const auto& m : convergence_metrics) {
                std::vector<std::pair<double, double>> pairs;
                for (auto i : idx)
                    pairs.emplace_back(report.rows[i].k, report.rows[i].*m.field);
                report.rates.push_back(RateRow{q, p, m.metric, fit_rate(pairs)});
            }
        }
    }
}

} // namespace

ErrorReport run_convergence(const RunConfig& config)
{
    config.validate(true);
    if (config.problem.forcing != ForcingKind::manufactured)
        throw ConfigError("problem.forcing: converge needs a manufactured solution");
    const auto mp = make_problem(config.problem, config.output.seed);

    std::vector<std::pair<int, std::size_t>> cells;
    for (int q : config.solver.q_list)
        for (std::size_t n : config.solver.n_list)
            cells.emplace_back(q, n);
    std::vector<std::vector<ErrorRow>> results(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        results[i] = convergence_cell(mp, config, cells[i].first, cells[i].second);
    });

    ErrorReport report;
    // Rows ordered q, p, N.
    for (int q : config.solver.q_list)
        for (double p : config.norm.p_list)
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i].first == q)
                    for (const auto& r : results[i])
                        if (r.p == p)
                            report.rows.push_back(r);
    append_rates(report, config);

    auto& props = report.properties;
    const double consistency = forcing_consistency(mp, config.output.seed);
    props.push_back({"manufactured forcing consistency", consistency <= forcing_check_tolerance,
                     "max relative defect " + format_number(consistency)});

    const bool fit_possible = config.solver.n_list.size() >= static_cast<std::size_t>(rate_levels);
    for (const auto& rr : report.rates) {
        PropertyResult pr{"rate " + rr.metric + " " + cell_label(rr.q, rr.p), true, ""};
        const double required = rr.q - rate_slack;
        if (!fit_possible) {
            pr.detail = "not asserted: fewer than 4 mesh levels";
        } else {
            pr.passed = std::isfinite(rr.rate) && rr.rate >= required;
            pr.detail = describe_rate(rr.rate, required);
        }
        props.push_back(std::move(pr));
    }
    for (int q : config.solver.q_list) {
        for (double p : config.norm.p_list) {
            const auto idx = rows_for(report.rows, q, p);
            bool lower = true;
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (auto i : idx) {
                const auto& r = report.rows[i];
                lower = lower && r.lower_ok;
                if (std::isfinite(r.effectivity)) {
                    lo = std::min(lo, r.effectivity);
                    hi = std::max(hi, r.effectivity);
                }
            }
            props.push_back({"lower a posteriori bound on every prefix " + cell_label(q, p), lower,
                             lower ? "holds" : "violated on at least one run"});
            const double spread = hi / lo;
            props.push_back({"effectivity spread " + cell_label(q, p),
                             std::isfinite(spread) && spread < effectivity_spread_limit,
                             "max/min = " + format_number(spread) + " (limit " +
                                 format_number(effectivity_spread_limit) + ")"});
        }
    }
    bool steps_ok = true, notes_ok = true;
    std::string bad;
    for (const auto& r : report.rows) {
        if (r.note.rfind("step-failure", 0) == 0)
            steps_ok = false;
        if (r.note.find("failed") != std::string::npos || r.note.find("paths-differ") != std::string::npos) {
            notes_ok = false;
            bad = r.note;
        }
    }
    props.push_back({"all slab solves succeeded", steps_ok, steps_ok ? "" : "see note column"});
    if (config.problem.kind == ProblemKind::scalar || config.solver.path == PathChoice::both)
        props.push_back({"per-run exact checks", notes_ok, notes_ok ? "all rows pass" : bad});
    return report;
}

// ------------------------------------------------------------ max-reg sweep

ErrorReport run_maxreg_sweep(const RunConfig& config)
{
    config.validate(true);
    if (config.problem.forcing == ForcingKind::manufactured)
        throw ConfigError("problem.forcing: maxreg needs u0 = 0; use random-trig or zero");
    const auto mp = make_problem(config.problem, config.output.seed);
    const auto lq = lp_quadrature(config);

    std::vector<std::pair<int, std::size_t>> cells;
    for (int q : config.solver.q_list)
        for (std::size_t n : config.solver.n_list)
            cells.emplace_back(q, n);
    std::vector<std::vector<ErrorRow>> results(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        const auto [q, n_slabs] = cells[i];
        const TimeMesh mesh(mp.problem.horizon, n_slabs);
        std::vector<ErrorRow> rows;
        std::string extra = smallness_note(mp.problem, mesh.step());
        auto blank = [&](double p) {
            ErrorRow r;
            r.q = q;
            r.p = p;
            r.N = n_slabs;
            r.k = mesh.step();
            r.err_au = r.err_dhat = r.err_ahat = r.resid = r.effectivity = nan;
            return r;
        };
        try {
            const SolverPath path = config.solver.path == PathChoice::radau_averaged
                                        ? SolverPath::radau_averaged
                                        : SolverPath::galerkin;
            const auto sol = solve_configured(mp.problem, mesh, q, path, config);
            const auto recon = reconstruct(sol.U);
            for (double p : config.norm.p_list) {
                ErrorRow r = blank(p);
                const auto rep = maxreg_report(sol, recon, mp.problem, NormSpec{p, config.norm.x_norm}, lq);
                r.maxreg_ratio = rep.ratio.back();
                r.note = std::isnan(r.maxreg_ratio) ? "degenerate" : "ok";
                if (!extra.empty())
                    r.note += " " + extra;
                rows.push_back(std::move(r));
            }
        } catch (const StepFailure& e) {
            for (double p : config.norm.p_list) {
                ErrorRow r = blank(p);
                r.maxreg_ratio = nan;
                r.note = std::string("step-failure:") + e.what();
                rows.push_back(std::move(r));
            }
        }
        results[i] = std::move(rows);
    });

    ErrorReport report;
    for (int q : config.solver.q_list)
        for (double p : config.norm.p_list)
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i].first == q)
                    for (const auto& r : results[i])
                        if (r.p == p)
                            report.rows.push_back(r);

    for (int q : config.solver.q_list) {
        for (double p : config.norm.p_list) {
            const auto idx = rows_for(report.rows, q, p);
            bool degenerate = true, finite = true;
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (auto i : idx) {
                const auto& r = report.rows[i];
                const bool is_degenerate = r.note.rfind("degenerate", 0) == 0;
                degenerate = degenerate && is_degenerate;
                if (is_degenerate)
                    continue;
                finite = finite && std::isfinite(r.maxreg_ratio);
                lo = std::min(lo, r.maxreg_ratio);
                hi = std::max(hi, r.maxreg_ratio);
            }
            if (degenerate) {
                report.properties.push_back({"max-reg ratio " + cell_label(q, p), true,
                                             "degenerate (f = 0): ratios reported as 0/0"});
                continue;
            }
            const double variation = hi / lo - 1.0;
            report.properties.push_back(
                {"max-reg ratio finite " + cell_label(q, p), finite,
                 "range [" + format_number(lo) + ", " + format_number(hi) + "]"});
            report.properties.push_back({"max-reg ratio variation " + cell_label(q, p),
                                         finite && variation < maxreg_variation_limit,
                                         "max/min - 1 = " + format_number(variation) + " (limit " +
                                             format_number(maxreg_variation_limit) + ")"});
        }
    }
    return report;
}

// ------------------------------------------------------------ oracle check

namespace {

Matrix random_spd(Random& rng, std::size_t d, double lo, double hi)
{
    const auto n = static_cast<Eigen::Index>(d);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = rng.normal();
    const Matrix qm = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector lambda(n);
    for (Eigen::Index i = 0; i < n; ++i)
        lambda[i] = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    return qm * lambda.asDiagonal() * qm.transpose();
}

Forcing random_forcing(Random& rng, std::size_t d)
{
    constexpr int terms = 3;
    std::vector<Vector> amp(terms);
    std::vector<double> freq(terms), phase(terms);
    for (int m = 0; m < terms; ++m) {
        amp[m] = rng.vector(d);
        freq[m] = rng.uniform(0.0, 6.0);
        phase[m] = rng.uniform(0.0, 6.0);
    }
    return Forcing{[=](double t) {
                       Vector f = Vector::Zero(static_cast<Eigen::Index>(d));
                       for (int m = 0; m < terms; ++m)
                           f += std::cos(freq[m] * t + phase[m]) * amp[m];
                       return f;
                   },
                   std::nullopt};
}

} // namespace

CheckReport run_oracle_check(const RunConfig& config)
{
    config.validate(false);
    Random rng(config.output.seed);
    CheckReport report;

    double worst_equiv = 0.0, worst_colloc = 0.0;
    for (int trial = 0; trial < config.oracle.trials; ++trial) {
        const int q = config.solver.q_list[static_cast<std::size_t>(trial) % config.solver.q_list.size()];
        const std::size_t d = 1 + rng.index(config.oracle.max_dimension);
        Matrix a = random_spd(rng, d, 0.5, 50.0);
        if (trial % 2 == 1) {
            Matrix b(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (Eigen::Index i = 0; i < b.size(); ++i)
                b.data()[i] = rng.normal();
            a += 5.0 * (b - b.transpose());
        }
        ProblemSpec problem;
        problem.op = std::make_shared<const OperatorModel>(std::move(a), "random");
        problem.f = random_forcing(rng, d);
        problem.u0 = rng.vector(d);
        problem.horizon = rng.uniform(0.5, 2.0);
        const TimeMesh mesh(problem.horizon, 3 + rng.index(10));
        const auto& tableau = radau_tableau(q);
        const auto g = solve_dg(problem, mesh, tableau, SolverPath::galerkin);
        const auto r = solve_dg(problem, mesh, tableau, SolverPath::radau_averaged);
        worst_equiv = std::max(worst_equiv, relative_max_difference(g.U.nodal(), r.U.nodal()));
        worst_colloc = std::max(worst_colloc, collocation_defect(g, reconstruct(g.U), problem));
    }
    report.properties.push_back({"galerkin vs averaged-radau stage values (" +
                                     std::to_string(config.oracle.trials) + " random problems)",
                                 worst_equiv <= equivalence_tolerance,
                                 "max relative discrepancy " + format_number(worst_equiv)});
    report.properties.push_back({"collocation identity at all stages", worst_colloc <= collocation_tolerance,
                                 "max scaled defect " + format_number(worst_colloc)});

    // Polynomial exactness: u of degree q-1 is reproduced and R vanishes.
    for (int q : config.solver.q_list) {
        const std::size_t d = 3;
        std::vector<Vector> coeffs;
        for (int j = 0; j < q; ++j)
            coeffs.push_back(rng.vector(d));
        auto model = std::make_shared<const OperatorModel>(random_spd(rng, d, 0.5, 20.0), "random");
        auto u = [coeffs](double t) {
            Vector v = Vector::Zero(coeffs.front().size());
            double power = 1.0;
            for (const auto& c : coeffs) {
                v += power * c;
                power *= t;
            }
            return v;
        };
        auto du = [coeffs](double t) {
            Vector v = Vector::Zero(coeffs.front().size());
            double power = 1.0;
            for (std::size_t j = 1; j < coeffs.size(); ++j) {
                v += static_cast<double>(j) * power * coeffs[j];
                power *= t;
            }
            return v;
        };
        ProblemSpec problem;
        problem.op = model;
        problem.f = Forcing{[model, u, du](double t) { return Vector(du(t) + model->apply(u(t))); }, q - 1};
        problem.u0 = u(0.0);
        problem.horizon = 1.0;
        const TimeMesh mesh(1.0, 5);
        const auto sol = solve_dg(problem, mesh, radau_tableau(q));
        double err = 0.0, scale = 0.0;
        for (std::size_t n = 0; n < mesh.slabs(); ++n) {
            for (int i = 0; i < q; ++i) {
                const Vector exact = u(mesh.time(n, radau_tableau(q).c[i]));
                err = std::max(err, (sol.stage_values(n).col(i) - exact).cwiseAbs().maxCoeff());
                scale = std::max(scale, exact.cwiseAbs().maxCoeff());
            }
        }
        const double rel = err / std::max(1.0, scale);
        const Residual resid(sol, reconstruct(sol.U), problem);
        const NormSpec spec{2.0, {}};
        const double rnorm = resid.norm(spec, mesh.slabs()) /
                             std::max(1.0, lp_norm(on_slabs(mesh, problem.f.eval), mesh, spec));
        report.properties.push_back({"polynomial exactness q=" + std::to_string(q),
                                     rel <= exactness_tolerance && rnorm <= exactness_tolerance,
                                     "stage error " + format_number(rel) + ", residual " +
                                         format_number(rnorm)});
    }

    // dG(0) on u' + lambda u = 0 is backward Euler.
    {
        const double lambda = 3.7;
        ProblemSpec problem;
        problem.op = std::make_shared<const OperatorModel>(Matrix::Constant(1, 1, lambda), "scalar");
        problem.f = Forcing{[](double) { return Vector(Vector::Zero(1)); }, 0};
        problem.u0 = Vector::Ones(1);
        problem.horizon = 1.0;
        const TimeMesh mesh(1.0, 20);
        const auto sol = solve_dg(problem, mesh, radau_tableau(1));
        double worst = 0.0;
        for (std::size_t n = 0; n < mesh.slabs(); ++n) {
            const double expected = std::pow(1.0 + mesh.step() * lambda, -static_cast<double>(n + 1));
            worst = std::max(worst, std::abs(sol.stage_values(n)(0, 0) - expected) / expected);
        }
        report.properties.push_back({"dG(0) recursion (1 + k lambda)^-n", worst <= recursion_tolerance,
                                     "max relative error " + format_number(worst)});
    }
    return report;
}

// ------------------------------------------------------------ interp check

Vector smooth_test_value(double t, int order)
{
    Vector v(2);
    v[0] = std::pow(3.0, order) * std::sin(3.0 * t + 0.5 + order * std::numbers::pi / 2.0);
    v[1] = std::pow(0.7, order) * std::exp(0.7 * t);
    return v;
}

namespace {

MeshFunction random_discontinuous(Random& rng, const TimeMesh& mesh, int q, std::size_t d)
{
    const auto& tableau = radau_tableau(q);
    std::vector<Matrix> nodal(mesh.slabs());
    for (auto& m : nodal) {
        m.resize(static_cast<Eigen::Index>(d), q);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = rng.normal();
    }
    return MeshFunction(mesh, std::make_shared<const LagrangeBasis>(tableau.stage_basis), std::move(nodal),
                        Vector::Zero(static_cast<Eigen::Index>(d)), Continuity::discontinuous);
}

MeshFunction random_continuous(Random& rng, const TimeMesh& mesh, int q, std::size_t d)
{
    const auto& tableau = radau_tableau(q);
    std::vector<Matrix> nodal(mesh.slabs());
    const Vector start = rng.vector(d);
    Vector left = start;
    for (auto& m : nodal) {
        m.resize(static_cast<Eigen::Index>(d), q + 1);
        m.col(0) = left;
        for (int j = 1; j <= q; ++j)
            m.col(j) = rng.vector(d);
        left = m.col(q);
    }
    return MeshFunction(mesh, std::make_shared<const LagrangeBasis>(tableau.extended_basis), std::move(nodal),
                        start, Continuity::continuous);
}

// Scalar element of V^d_{k,0}(q-1) with stage values x (slab-major), or its
// reconstruction in V^c_{k,0}(q).
MeshFunction stage_function(const TimeMesh& mesh, int q, const Vector& x, bool continuous = false)
{
    std::vector<Matrix> nodal(mesh.slabs());
    for (std::size_t n = 0; n < mesh.slabs(); ++n)
        nodal[n] = x.segment(static_cast<Eigen::Index>(n) * q, q).transpose();
    MeshFunction v(mesh, std::make_shared<const LagrangeBasis>(radau_tableau(q).stage_basis), std::move(nodal),
                   Vector::Zero(1), Continuity::discontinuous);
    return continuous ? reconstruct(v).hat : v;
}

// Eigenvectors of the L^2 Gram matrix of x -> stage_function(x). The discrete
// norm of stage_function(x) is ||x|| k^{1/2}, so at p = 2 the extreme
// eigenvectors realize the sharp equivalence constants.
Matrix gram_directions(const TimeMesh& mesh, int q, bool continuous)
{
    if (!continuous && mesh.slabs() > 1) {
        // block diagonal with identical blocks: use slab-local eigenvectors
        // instead of an arbitrary basis of the degenerate eigenspaces
        const Matrix local = gram_directions(TimeMesh(mesh.step(), 1), q, false);
        const auto unknowns = static_cast<Eigen::Index>(mesh.slabs()) * q;
        Matrix out = Matrix::Zero(unknowns, unknowns);
        for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(mesh.slabs()); ++n)
            out.block(n * q, n * q, q, q) = local;
        return out;
    }
    const auto& rule = gauss_rule(q + 2);
    const auto unknowns = static_cast<Eigen::Index>(mesh.slabs()) * q;
    Matrix phi(static_cast<Eigen::Index>(mesh.slabs()) * rule.size(), unknowns);
    for (Eigen::Index a = 0; a < unknowns; ++a) {
        const auto v = stage_function(mesh, q, Vector::Unit(unknowns, a), continuous);
        for (std::size_t n = 0; n < mesh.slabs(); ++n)
            for (int g = 0; g < rule.size(); ++g)
                phi(static_cast<Eigen::Index>(n) * rule.size() + g, a) =
                    std::sqrt(mesh.step() * rule.weights()[g]) * v.evaluate(n, rule.nodes()[g])[0];
    }
    return Eigen::SelfAdjointEigenSolver<Matrix>(phi.transpose() * phi).eigenvectors();
}

double max_nodal_difference(const MeshFunction& a, const MeshFunction& b)
{
    double diff = 0.0, scale = 1.0;
    for (std::size_t n = 0; n < a.mesh().slabs(); ++n) {
        diff = std::max(diff, (a.nodal(n) - b.nodal(n)).cwiseAbs().maxCoeff());
        scale = std::max(scale, a.nodal(n).cwiseAbs().maxCoeff());
    }
    return diff / scale;
}

} // namespace

InterpReport run_interp_check(const RunConfig& config)
{
    config.validate(false);
    InterpReport report;
    const auto lq = lp_quadrature(config);
    const double horizon = config.problem.horizon;
    const TimeFunction u = [](double t) { return smooth_test_value(t, 0); };
    const TimeFunction du = [](double t) { return smooth_test_value(t, 1); };

    // (a)-(d) interpolation rates
    for (int q : config.solver.q_list) {
        std::vector<std::vector<InterpRow>> per_n(config.solver.n_list.size());
        parallel_for(per_n.size(), [&](std::size_t ni) {
            const TimeMesh mesh(horizon, config.solver.n_list[ni]);
            const auto tilde = ortho_interpolate(u, mesh, q).tilde;
            const auto hat = reconstruct(tilde, u(0.0)).hat;
            for (double p : config.norm.p_list) {
                const NormSpec spec{p, config.norm.x_norm};
                InterpRow row{q, p, mesh.slabs(), mesh.step(), 0, 0, 0, 0};
                const SlabFunction rho = [&](std::size_t n, double tau) {
                    return Vector(u(mesh.time(n, tau)) - tilde.evaluate(n, tau));
                };
                row.err_tilde = lp_norm(rho, mesh, spec, std::nullopt, lq);
                row.err_hat = lp_norm(
                    [&](std::size_t n, double tau) { return Vector(u(mesh.time(n, tau)) - hat.evaluate(n, tau)); },
                    mesh, spec, std::nullopt, lq);
                row.err_dhat = lp_norm(
                    [&](std::size_t n, double tau) {
                        return Vector(du(mesh.time(n, tau)) - hat.derivative(n, tau));
                    },
                    mesh, spec, std::nullopt, lq);
                const auto sup = slab_norms(rho, mesh, NormSpec{NormSpec::infinity, config.norm.x_norm}, lq);
                const auto semi = slab_norms(
                    [&](std::size_t n, double tau) { return smooth_test_value(mesh.time(n, tau), q); }, mesh,
                    spec, lq);
                for (std::size_t n = 0; n < mesh.slabs(); ++n) {
                    const double s = spec.is_infinite() ? semi.contribution(n)
                                                        : std::pow(semi.contribution(n), 1.0 / p);
                    row.linf_scaled = std::max(row.linf_scaled, sup.contribution(n) / s);
                }
                per_n[ni].push_back(row);
            }
        });
        for (double p : config.norm.p_list) {
            std::vector<std::pair<double, double>> a, b, c, d;
            for (const auto& rows : per_n) {
                for (const auto& r : rows) {
                    if (r.p != p)
                        continue;
                    report.rows.push_back(r);
                    a.emplace_back(r.k, r.err_tilde);
                    b.emplace_back(r.k, r.err_hat);
                    c.emplace_back(r.k, r.err_dhat);
                    d.emplace_back(r.k, r.linf_scaled);
                }
            }
            const double inv_p = p == NormSpec::infinity ? 0.0 : 1.0 / p;
            const std::tuple<const char*, std::vector<std::pair<double, double>>*, double> checks[] = {
                {"(a) ||u - u_tilde||", &a, q - rate_slack},
                {"(b) ||u - hat u_tilde||", &b, q - rate_slack},
                {"(c) ||(u - hat u_tilde)'||", &c, q - rate_slack},
                {"(d) scaled L^inf of u - u_tilde", &d, q - inv_p - rate_slack},
            };
            for (const auto& [name, pairs, required] : checks) {
                const double rate = fit_rate(*pairs);
                report.rates.push_back(RateRow{q, p, name, rate});
                report.properties.push_back({std::string("interpolation rate ") + name + " " + cell_label(q, p),
                                             std::isfinite(rate) && rate >= required,
                                             describe_rate(rate, required)});
            }
        }
    }

    Random rng(config.output.seed);

    // reproduction: hat(tilde(v)) = v on continuous piecewise degree-q v
    for (int q : config.solver.q_list) {
        double worst = 0.0;
        for (int trial = 0; trial < config.interp.reproduction_trials; ++trial) {
            const TimeMesh mesh(rng.uniform(0.5, 2.0), 1 + rng.index(8));
            const auto v = random_continuous(rng, mesh, q, 2);
            const auto rebuilt = hat_tilde(v.values(), v.left_value_at_zero(), mesh, q);
            worst = std::max(worst, max_nodal_difference(v, rebuilt));
        }
        report.properties.push_back({"reproduction hat(tilde v) = v q=" + std::to_string(q) + " (" +
                                         std::to_string(config.interp.reproduction_trials) + " trials)",
                                     worst <= reproduction_tolerance, "max nodal error " + format_number(worst)});
    }

    // discrete/continuous norm toolkit
    for (int q : config.solver.q_list) {
        const auto& tableau = radau_tableau(q);
        const auto sup_d = basis_sup_norms(tableau.stage_basis);
        const auto sup_c = basis_sup_norms(tableau.extended_basis);
        for (double p : config.norm.p_list) {
            if (p == NormSpec::infinity || p <= 1.0)
                continue;
            const NormSpec spec{p, {}};
            const double pd = p / (p - 1.0);
            double sum_d = 0.0, sum_c = 0.0;
            for (double s : sup_d)
                sum_d += std::pow(s, pd);
            for (double s : sup_c)
                sum_c += std::pow(s, pd);
            const double dom_d = std::pow(sum_d, 1.0 / pd);
            const double dom_c = std::pow(sum_c, 1.0 / pd) * std::pow(2.0, 1.0 / p);

            struct Interval {
                double lo = std::numeric_limits<double>::infinity();
                double hi = 0.0;
                void add(double r) { lo = std::min(lo, r), hi = std::max(hi, r); }
            };
            std::vector<Interval> range_d, range_c;
            double worst_dom = 0.0, worst_equal = 0.0, worst_commute = 0.0;
            for (std::size_t n_slabs : config.solver.n_list) {
                const TimeMesh mesh(horizon, n_slabs);
                Interval rd, rc;
                // Gram eigenvectors of each class set that class's interval;
                // random samples feed the remaining checks.
                auto probe = [&](const MeshFunction& v, bool interval, bool continuous) {
                    const auto vhat = reconstruct(v).hat;
                    const double disc = discrete_lp_norm(v, tableau, spec);
                    const double disc_hat = discrete_lp_norm(vhat, tableau, spec);
                    const double cont = lp_norm(v, spec, std::nullopt, toolkit_quadrature);
                    const double cont_hat = lp_norm(vhat, spec, std::nullopt, toolkit_quadrature);
                    if (interval)
                        (continuous ? rc : rd).add(continuous ? disc_hat / cont_hat : disc / cont);
                    worst_dom = std::max({worst_dom, cont / (dom_d * disc), cont_hat / (dom_c * disc_hat)});
                    worst_equal = std::max(worst_equal, std::abs(disc_hat - disc) / disc);
                    const auto lhs = reconstruct(backward_difference(v)).hat;
                    const auto rhs = backward_difference(vhat);
                    worst_commute = std::max(worst_commute, max_nodal_difference(lhs, rhs));
                };
                for (bool continuous : {false, true}) {
                    const Matrix dirs = gram_directions(mesh, q, continuous);
                    for (Eigen::Index j = 0; j < dirs.cols(); ++j)
                        probe(stage_function(mesh, q, dirs.col(j)), true, continuous);
                }
                for (int s = 0; s < config.interp.norm_samples; ++s)
                    probe(random_discontinuous(rng, mesh, q, 2), false, false);
                range_d.push_back(rd);
                range_c.push_back(rc);
            }
            const auto label = cell_label(q, p);
            for (const auto& [name, ranges] : {std::pair{"V^d(q-1)", &range_d}, std::pair{"V^c(q)", &range_c}}) {
                double lo_min = std::numeric_limits<double>::infinity(), lo_max = 0.0;
                double hi_min = lo_min, hi_max = 0.0;
                for (const auto& r : *ranges) {
                    lo_min = std::min(lo_min, r.lo), lo_max = std::max(lo_max, r.lo);
                    hi_min = std::min(hi_min, r.hi), hi_max = std::max(hi_max, r.hi);
                }
                const double drift = std::max(lo_max / lo_min, hi_max / hi_min) - 1.0;
                report.properties.push_back(
                    {std::string("norm ratio interval drift ") + name + " " + label,
                     lo_min > 0.0 && drift < norm_ratio_drift_limit,
                     "discrete/continuous within [" + format_number(lo_min) + ", " + format_number(hi_max) +
                         "]; endpoint drift " + format_number(drift)});
            }
            report.properties.push_back({"continuous norm dominated by discrete norm " + label,
                                         worst_dom <= 1.0 + dominance_slack,
                                         "max ||v||_Lp / (c ||v||_lp) = " + format_number(worst_dom)});
            report.properties.push_back({"discrete norms of v and v_hat coincide " + label,
                                         worst_equal <= norm_equal_tolerance,
                                         "max relative gap " + format_number(worst_equal)});
            report.properties.push_back({"backward difference commutes with reconstruction " + label,
                                         worst_commute <= commutation_tolerance,
                                         "max nodal gap " + format_number(worst_commute)});
        }
    }
    return report;
}

// ----------------------------------------------------------------- output

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_error_csv(std::ostream& out, const std::vector<ErrorRow>& rows)
{
    out << "q,p,N,k,err_AU,err_dhatU,err_AhatU,resid,effectivity,maxreg_ratio,note\n";
    for (const auto& r : rows) {
        out << r.q << ',' << p_label(r.p) << ',' << r.N << ',' << format_number(r.k) << ','
            << format_number(r.err_au) << ',' << format_number(r.err_dhat) << ','
            << format_number(r.err_ahat) << ',' << format_number(r.resid) << ','
            << format_number(r.effectivity) << ',' << format_number(r.maxreg_ratio) << ','
            << sanitize(r.note) << '\n';
    }
}

void write_rates_csv(std::ostream& out, const std::vector<RateRow>& rates)
{
    out << "q,p,metric,rate\n";
    for (const auto& r : rates)
        out << r.q << ',' << p_label(r.p) << ',' << sanitize(r.metric) << ',' << format_number(r.rate) << '\n';
}

void write_interp_csv(std::ostream& out, const std::vector<InterpRow>& rows)
{
    out << "q,p,N,k,err_tilde,err_hat,err_dhat,linf_scaled\n";
    for (const auto& r : rows)
        out << r.q << ',' << p_label(r.p) << ',' << r.N << ',' << format_number(r.k) << ','
            << format_number(r.err_tilde) << ',' << format_number(r.err_hat) << ','
            << format_number(r.err_dhat) << ',' << format_number(r.linf_scaled) << '\n';
}

void write_plot_data(const std::filesystem::path& dir, const std::vector<ErrorRow>& rows)
{
    std::filesystem::create_directories(dir);
    std::map<std::string, std::vector<const ErrorRow*>> groups;
    for (const auto& r : rows)
        groups["q" + std::to_string(r.q) + "_p" + p_label(r.p)].push_back(&r);
    for (const auto& [suffix, members] : groups) {
        for (const auto& m : convergence_metrics) {
            std::ofstream f(dir / (std::string(m.metric) + "_" + suffix + ".dat"));
            f << "# k " << m.metric << '\n';
            for (const auto* r : members)
                f << format_number(r->k) << ' ' << format_number(r->*m.field) << '\n';
        }
        std::ofstream f(dir / ("maxreg_ratio_" + suffix + ".dat"));
        f << "# k maxreg_ratio\n";
        for (const auto* r : members)
            f << format_number(r->k) << ' ' << format_number(r->maxreg_ratio) << '\n';
    }
}

void write_properties(std::ostream& out, const std::vector<PropertyResult>& props)
{
    for (const auto& p : props)
        out << (p.passed ? "PASS  " : "FAIL  ") << p.name << (p.detail.empty() ? "" : ": ") << p.detail
            << '\n';
}

} // namespace dgt
