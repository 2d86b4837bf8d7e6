#include "dgtime/estimate.hpp"

#include "dgtime/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dgt {
namespace {

std::vector<double> cumulative_discrete(const MeshFunction& v, const RadauTableau& tableau,
                                        const NormSpec& spec)
{
    const double k = v.mesh().step();
    std::vector<double> out(v.mesh().slabs());
    double acc = 0.0;
    for (std::size_t l = 0; l < out.size(); ++l) {
        for (int i = 0; i < tableau.q; ++i)
            acc += k * std::pow(spec.x_norm(v.evaluate(l, tableau.c[i])), spec.p);
        out[l] = std::pow(acc, 1.0 / spec.p);
    }
    return out;
}

double safe_ratio(double num, double den)
{
    if (den == 0.0)
        return num == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                          : std::numeric_limits<double>::infinity();
    return num / den;
}

std::string fmt_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

// ----------------------------------------------------------------- Residual

Residual::Residual(const DGSolution& solution, const Reconstruction& recon,
                   const ProblemSpec& problem)
    : hat_(recon.hat), problem_(problem), cache_(std::make_shared<Cache>())
{
    problem_.validate();
    if (!(solution.U.mesh() == recon.hat.mesh()))
        throw std::invalid_argument("residual: reconstruction and solution meshes differ");
    if (std::abs(hat_.mesh().horizon() - problem_.horizon) > 1e-12 * problem_.horizon)
        throw std::invalid_argument("residual: problem horizon differs from mesh horizon");
    if (hat_.dim() != problem_.dim())
        throw std::invalid_argument("residual: dimension mismatch");
    if (hat_.degree() != solution.q)
        throw std::invalid_argument("residual: reconstruction degree must be q");
}

Vector Residual::operator()(std::size_t n, double tau) const
{
    const double t = mesh().time(n, tau);
    return hat_.derivative(n, tau) + problem_.apply_at(t, hat_.evaluate(n, tau)) - problem_.f.eval(t);
}

SlabFunction Residual::as_slab_function() const
{
    return [self = *this](std::size_t n, double tau) { return self(n, tau); };
}

const SlabNorms& Residual::slab_norms(const NormSpec& spec, LpQuadrature quad) const
{
    const auto key = std::make_tuple(spec.p, quad.panels, quad.points);
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->entries.find(key); it != cache_->entries.end())
            return *it->second;
    }
    auto computed = std::make_shared<const SlabNorms>(
        dgt::slab_norms([this](std::size_t n, double tau) { return (*this)(n, tau); }, mesh(), spec,
                        quad));
    std::lock_guard lock(cache_->mutex);
    return *cache_->entries.emplace(key, std::move(computed)).first->second;
}

double Residual::norm(const NormSpec& spec, std::size_t m, LpQuadrature quad) const
{
    if (m == 0 || m > mesh().slabs())
        throw std::out_of_range("residual norm: prefix must be a mesh point t_m, 1 <= m <= N");
    return slab_norms(spec, quad).prefix(m);
}

// ------------------------------------------------------ a posteriori bounds

std::vector<AposterioriBounds> aposteriori_prefixes(const Residual& resid,
                                                    const ExactSolution& truth,
                                                    const NormSpec& spec, LpQuadrature quad)
{
    const auto& mesh = resid.mesh();
    const auto& hat = resid.reconstruction();
    const auto& problem = resid.problem();
    const auto r = resid.slab_norms(spec, quad).prefixes();
    const auto ed = dgt::slab_norms(
                        [&](std::size_t n, double tau) {
                            return Vector(truth.derivative(mesh.time(n, tau)) - hat.derivative(n, tau));
                        },
                        mesh, spec, quad)
                        .prefixes();
    const auto ea = dgt::slab_norms(
                        [&](std::size_t n, double tau) {
                            const double t = mesh.time(n, tau);
                            return problem.apply_at(t, truth.value(t) - hat.evaluate(n, tau));
                        },
                        mesh, spec, quad)
                        .prefixes();

    std::vector<AposterioriBounds> out(r.size());
    for (std::size_t m = 0; m < r.size(); ++m) {
        auto& b = out[m];
        b.residual = r[m];
        b.err_deriv = ed[m];
        b.err_A = ea[m];
        b.error_sum = ed[m] + ea[m];
        b.lower_ok = b.residual <= b.error_sum * (1.0 + lower_bound_tolerance);
        // zero residual with zero error: ratio 1 by convention
        b.upper_ratio = (b.residual == 0.0 && b.error_sum == 0.0) ? 1.0
                                                                  : safe_ratio(b.error_sum, b.residual);
    }
    return out;
}

AposterioriBounds aposteriori_bounds(const Residual& resid, const ExactSolution& truth,
                                     const NormSpec& spec, std::size_t m, LpQuadrature quad)
{
    if (m == 0 || m > resid.mesh().slabs())
        throw std::out_of_range("aposteriori_bounds: t_m must be a mesh point, 1 <= m <= N");
    return aposteriori_prefixes(resid, truth, spec, quad)[m - 1];
}

// ------------------------------------------------------------- max-reg data

MaxRegReport maxreg_report(const DGSolution& solution, const Reconstruction& recon,
                           const ProblemSpec& problem, const NormSpec& spec, LpQuadrature quad)
{
    spec.validate_for_max_regularity();
    problem.validate();
    if (problem.u0.lpNorm<Eigen::Infinity>() != 0.0)
        throw PreconditionError("maxreg_report: requires vanishing initial value u0 = 0");
    const auto& mesh = solution.U.mesh();
    const auto& tableau = radau_tableau(solution.q);
    const Matrix frozen = problem.operator_at(problem.horizon);
    const auto& hat = recon.hat;
    const auto& u = solution.U;

    MaxRegReport rep;
    rep.dk_hat = cumulative_discrete(backward_difference(hat), tableau, spec);
    rep.d_hat = dgt::slab_norms(hat.derivatives(), mesh, spec, quad).prefixes();
    rep.a_hat = dgt::slab_norms([&](std::size_t n, double tau) { return Vector(frozen * hat.evaluate(n, tau)); },
                                mesh, spec, quad)
                    .prefixes();
    rep.a_u = dgt::slab_norms([&](std::size_t n, double tau) { return Vector(frozen * u.evaluate(n, tau)); },
                              mesh, spec, quad)
                  .prefixes();
    rep.f = dgt::slab_norms(on_slabs(mesh, problem.f.eval), mesh, spec, quad).prefixes();
    rep.ratio.resize(rep.f.size());
    for (std::size_t m = 0; m < rep.f.size(); ++m)
        rep.ratio[m] = safe_ratio(rep.dk_hat[m] + rep.d_hat[m] + rep.a_hat[m] + rep.a_u[m], rep.f[m]);
    return rep;
}

double stage_backward_difference_norm(const DGSolution& solution, const NormSpec& spec,
                                      std::size_t m)
{
    spec.validate();
    const auto& mesh = solution.U.mesh();
    if (m == 0 || m > mesh.slabs())
        throw std::out_of_range("stage_backward_difference_norm: prefix out of range");
    const double k = mesh.step();
    double total = 0.0;
    for (int i = 0; i < solution.q; ++i) {
        double stage_sum = 0.0;
        for (std::size_t n = 0; n < m; ++n) {
            const Vector prev = n == 0 ? Vector(Vector::Zero(static_cast<Eigen::Index>(solution.U.dim())))
                                       : Vector(solution.stage_values(n - 1).col(i));
            const Vector diff = (solution.stage_values(n).col(i) - prev) / k;
            stage_sum += k * std::pow(spec.x_norm(diff), spec.p);
        }
        total += stage_sum;
    }
    return std::pow(total, 1.0 / spec.p);
}

double collocation_defect(const DGSolution& solution, const Reconstruction& recon,
                          const ProblemSpec& problem)
{
    const auto& tableau = radau_tableau(solution.q);
    const auto& mesh = solution.U.mesh();
    double worst = 0.0;
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        for (int i = 0; i < solution.q; ++i) {
            const double tau = tableau.c[i];
            const Vector au = problem.apply_at(mesh.time(n, tau), recon.hat.evaluate(n, tau));
            const Vector fbar = solution.f_averages[n].col(i);
            const Vector defect = recon.hat.derivative(n, tau) + au - fbar;
            const double scale = std::max({1.0, au.norm(), fbar.norm()});
            worst = std::max(worst, defect.norm() / scale);
        }
    }
    return worst;
}

void write_report_csv(std::ostream& out, const TimeMesh& mesh,
                      const std::vector<AposterioriBounds>& bounds, const MaxRegReport* maxreg)
{
    out << "t_m,resid,err_deriv,err_A,effectivity,maxreg_ratio\n";
    for (std::size_t m = 0; m < bounds.size(); ++m) {
        const auto& b = bounds[m];
        const double ratio = maxreg && m < maxreg->size() ? maxreg->ratio[m]
                                                          : std::numeric_limits<double>::quiet_NaN();
        out << fmt_double(mesh.point(m + 1)) << ',' << fmt_double(b.residual) << ','
            << fmt_double(b.err_deriv) << ',' << fmt_double(b.err_A) << ','
            << fmt_double(b.upper_ratio) << ',' << fmt_double(ratio) << '\n';
    }
}

} // namespace dgt
