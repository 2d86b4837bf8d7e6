#include "dgtime/dgsolve.hpp"

#include "dgtime/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dgt {
namespace {

constexpr double singular_rcond = 1e-14;

void check_factorization(const BlockFactorization& f, std::size_t slab)
{
    if (!(f.rcond() > singular_rcond))
        throw StepFailure(slab, "singular slab system (rcond " + std::to_string(f.rcond()) + ")");
}

void check_stages(const Matrix& stages, std::size_t slab)
{
    if (!stages.allFinite())
        throw StepFailure(slab, "non-finite stage values");
}

SolverQuadrature resolve(SolverQuadrature quad, int q)
{
    if (quad.forcing_points == 0)
        quad.forcing_points = q + 3;
    if (quad.operator_points == 0)
        quad.operator_points = 2 * q;
    return quad;
}

void check_inputs(const ProblemSpec& problem, const TimeMesh& mesh)
{
    problem.validate();
    if (std::abs(mesh.horizon() - problem.horizon) > 1e-12 * problem.horizon)
        throw std::invalid_argument("solve_dg: mesh horizon differs from problem horizon");
}

DGSolution finish(const ProblemSpec& problem, const TimeMesh& mesh, const RadauTableau& tableau,
                  std::vector<Matrix> stages, std::vector<Matrix> averages, SolverPath path,
                  SolverQuadrature quad)
{
    MeshFunction u(mesh, std::make_shared<const LagrangeBasis>(tableau.stage_basis),
                   std::move(stages), problem.u0, Continuity::discontinuous);
    return DGSolution{std::move(u), std::move(averages), path, quad, tableau.q};
}

} // namespace

std::size_t ProblemSpec::dim() const
{
    return std::visit([](const auto& op) { return op ? op->dim() : std::size_t{0}; }, op);
}

Matrix ProblemSpec::operator_at(double t) const
{
    if (autonomous())
        return std::get<AutonomousOperator>(op)->matrix();
    return std::get<NonautonomousOperator>(op)->matrix_at(t);
}

Vector ProblemSpec::apply_at(double t, const Vector& x) const
{
    if (autonomous())
        return std::get<AutonomousOperator>(op)->apply(x);
    return std::get<NonautonomousOperator>(op)->apply_at(t, x);
}

void ProblemSpec::validate() const
{
    if (dim() == 0)
        throw std::invalid_argument("problem: missing operator");
    if (static_cast<std::size_t>(u0.size()) != dim())
        throw std::invalid_argument("problem: u0 has dimension " + std::to_string(u0.size()) +
                                    ", operator has " + std::to_string(dim()));
    if (!(horizon > 0.0))
        throw std::invalid_argument("problem: horizon must be positive");
    if (!f.eval)
        throw std::invalid_argument("problem: missing forcing");
}

const char* to_string(SolverPath path)
{
    return path == SolverPath::galerkin ? "galerkin" : "radau-averaged";
}

GalerkinMatrices galerkin_matrices(const RadauTableau& tableau)
{
    const int q = tableau.q;
    const auto& basis = tableau.stage_basis;
    const auto& rule = gauss_rule(q + 1);
    GalerkinMatrices m{Matrix::Zero(q, q), Matrix::Zero(q, q), Vector(q)};
    std::vector<double> phi(q), dphi(q);
    for (int g = 0; g < rule.size(); ++g) {
        const double tau = rule.nodes()[g], w = rule.weights()[g];
        basis.values(tau, phi);
        basis.derivatives(tau, dphi);
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < q; ++j) {
                m.time_mass(i, j) += w * dphi[j] * phi[i];
                m.time_gram(i, j) += w * phi[j] * phi[i];
            }
        }
    }
    basis.values(0.0, phi);
    for (int i = 0; i < q; ++i) {
        m.left_trace[i] = phi[i];
        for (int j = 0; j < q; ++j)
            m.time_mass(i, j) += phi[j] * phi[i];
    }
    return m;
}

std::vector<Matrix> f_averages(const Forcing& f, const TimeMesh& mesh, const RadauTableau& tableau,
                               const GaussRule& quad)
{
    const int q = tableau.q;
    const GaussRule* rule = &quad;
    if (f.polynomial_degree) {
        // l_i f has degree q-1+m; make the rule exact for it.
        const int needed = (q + *f.polynomial_degree) / 2 + 1;
        if (needed > quad.size())
            rule = &gauss_rule(std::min(needed, GaussRule::max_points));
    }
    std::vector<double> phi(q);
    std::vector<Matrix> out(mesh.slabs());
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        Matrix acc;
        for (int g = 0; g < rule->size(); ++g) {
            const double tau = rule->nodes()[g];
            const Vector fv = f.eval(mesh.time(n, tau));
            if (g == 0)
                acc = Matrix::Zero(fv.size(), q);
            tableau.stage_basis.values(tau, phi);
            for (int i = 0; i < q; ++i)
                acc.col(i) += (rule->weights()[g] * phi[i]) * fv;
        }
        for (int i = 0; i < q; ++i)
            acc.col(i) /= tableau.lagrange_integrals[i];
        out[n] = std::move(acc);
    }
    return out;
}

DGSolution solve_dg(const ProblemSpec& problem, const TimeMesh& mesh, const RadauTableau& tableau,
                    SolverPath path, SolverQuadrature quad)
{
    if (!problem.autonomous()) {
        if (path != SolverPath::galerkin)
            throw std::invalid_argument(
                "solve_dg: the radau-averaged path is defined for autonomous problems only");
        const auto resolved = resolve(quad, tableau.q);
        return solve_dg_nonautonomous(problem, mesh, tableau,
                                      gauss_rule(resolved.operator_points), quad);
    }
    check_inputs(problem, mesh);
    quad = resolve(quad, tableau.q);
    const int q = tableau.q;
    const double k = mesh.step();
    const auto& op = *std::get<AutonomousOperator>(problem.op);

    auto averages = f_averages(problem.f, mesh, tableau, gauss_rule(quad.forcing_points));

    std::shared_ptr<const BlockFactorization> fact;
    GalerkinMatrices gm;
    if (path == SolverPath::galerkin) {
        gm = galerkin_matrices(tableau);
        fact = op.factor_block(gm.time_mass, gm.time_gram, k);
    } else {
        fact = op.factor_block(Matrix::Identity(q, q), tableau.a, k);
    }
    check_factorization(*fact, 0);

    std::vector<Matrix> stages(mesh.slabs());
    Vector previous = problem.u0;
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        const Matrix& fbar = averages[n];
        Matrix rhs(fbar.rows(), q);
        if (path == SolverPath::galerkin) {
            for (int i = 0; i < q; ++i)
                rhs.col(i) = (k * tableau.lagrange_integrals[i]) * fbar.col(i) +
                             gm.left_trace[i] * previous;
        } else {
            rhs = k * fbar * tableau.a.transpose();
            rhs.colwise() += previous;
        }
        stages[n] = fact->solve(rhs);
        check_stages(stages[n], n);
        previous = stages[n].col(q - 1);
    }
    return finish(problem, mesh, tableau, std::move(stages), std::move(averages), path, quad);
}

DGSolution solve_dg_nonautonomous(const ProblemSpec& problem, const TimeMesh& mesh,
                                  const RadauTableau& tableau, const GaussRule& quad_A,
                                  SolverQuadrature quad)
{
    check_inputs(problem, mesh);
    quad = resolve(quad, tableau.q);
    quad.operator_points = quad_A.size();
    const int q = tableau.q;
    const auto d = static_cast<Eigen::Index>(problem.dim());
    const double k = mesh.step();
    const auto gm = galerkin_matrices(tableau);

    auto averages = f_averages(problem.f, mesh, tableau, gauss_rule(quad.forcing_points));

    // Gauss-point basis products, shared by every slab.
    std::vector<Matrix> products(static_cast<std::size_t>(quad_A.size()));
    std::vector<double> phi(q);
    for (int g = 0; g < quad_A.size(); ++g) {
        tableau.stage_basis.values(quad_A.nodes()[g], phi);
        const Eigen::Map<const Vector> l(phi.data(), q);
        products[g] = quad_A.weights()[g] * (l * l.transpose());
    }

    std::vector<Matrix> stages(mesh.slabs());
    Vector previous = problem.u0;
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        Matrix sys = Matrix::Zero(q * d, q * d);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                sys.block(i * d, j * d, d, d).diagonal().array() += gm.time_mass(i, j);
        for (int g = 0; g < quad_A.size(); ++g) {
            const Matrix a_g = problem.operator_at(mesh.time(n, quad_A.nodes()[g]));
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    sys.block(i * d, j * d, d, d) += (k * products[g](i, j)) * a_g;
        }
        const BlockFactorization fact(sys, static_cast<std::size_t>(q), static_cast<std::size_t>(d));
        check_factorization(fact, n);

        Matrix rhs(d, q);
        for (int i = 0; i < q; ++i)
            rhs.col(i) = (k * tableau.lagrange_integrals[i]) * averages[n].col(i) +
                         gm.left_trace[i] * previous;
        stages[n] = fact.solve(rhs);
        check_stages(stages[n], n);
        previous = stages[n].col(q - 1);
    }
    return finish(problem, mesh, tableau, std::move(stages), std::move(averages),
                  SolverPath::galerkin, quad);
}

} // namespace dgt
