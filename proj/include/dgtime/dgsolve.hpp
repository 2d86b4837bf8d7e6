#pragma once

// dG(q-1) time stepping for u' + A(t) u = f, slab by slab.

#include "dgtime/operators.hpp"
#include "dgtime/timefun.hpp"

#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace dgt {

struct Forcing {
    TimeFunction eval;
    /// When set, f is a polynomial of at most this degree in t and the
    /// forcing integrals are taken with a rule that is exact for it.
    std::optional<int> polynomial_degree;
};

using AutonomousOperator = std::shared_ptr<const OperatorModel>;
using NonautonomousOperator = std::shared_ptr<const TimeDependentOperatorModel>;

struct ProblemSpec {
    std::variant<AutonomousOperator, NonautonomousOperator> op;
    Forcing f;
    Vector u0;
    double horizon = 1.0;

    std::size_t dim() const;
    bool autonomous() const { return std::holds_alternative<AutonomousOperator>(op); }
    /// A(t) as a dense matrix (A for autonomous problems).
    Matrix operator_at(double t) const;
    Vector apply_at(double t, const Vector& x) const;
    /// Throws std::invalid_argument on inconsistent dimensions or T <= 0.
    void validate() const;
};

enum class SolverPath { galerkin, radau_averaged };

const char* to_string(SolverPath path);

struct SolverQuadrature {
    /// Gauss points per slab for the forcing integrals; 0 selects q + 3.
    int forcing_points = 0;
    /// Gauss points per slab for int <A(t) l_j, l_i>; 0 selects 2q.
    int operator_points = 0;
};

struct DGSolution {
    MeshFunction U;                  // degree q-1, nodal at the Radau points
    std::vector<Matrix> f_averages;  // per slab, d x q
    SolverPath path;
    SolverQuadrature quadrature;     // resolved point counts
    int q;

    /// U(t_{ni}) for slab n: column i is stage i+1.
    const Matrix& stage_values(std::size_t n) const { return U.nodal(n); }
};

/// f_{ni} = int_{J_n} l_{ni} f / int_{J_n} l_{ni}, per slab as d x q.
std::vector<Matrix> f_averages(const Forcing& f, const TimeMesh& mesh, const RadauTableau& tableau,
                               const GaussRule& quad);

/// Autonomous solver. The Galerkin path assembles the slab system by
/// testing against the Lagrange basis at the Radau points; the
/// radau_averaged path solves the Radau IIA stage equations with averaged
/// forcing. Nonautonomous problems are forwarded to
/// solve_dg_nonautonomous (galerkin only). Throws StepFailure on a
/// singular slab system.
DGSolution solve_dg(const ProblemSpec& problem, const TimeMesh& mesh, const RadauTableau& tableau,
                    SolverPath path = SolverPath::galerkin, SolverQuadrature quad = {});

/// Galerkin solver with int <A(t) U, v> approximated by quad_A on each slab;
/// every A-independent time integral is exact.
DGSolution solve_dg_nonautonomous(const ProblemSpec& problem, const TimeMesh& mesh,
                                  const RadauTableau& tableau, const GaussRule& quad_A,
                                  SolverQuadrature quad = {});

/// Reference-slab matrices of the Galerkin form:
///   time_mass(i,j)  = int_0^1 l_j' l_i + l_j(0) l_i(0)
///   time_gram(i,j)  = int_0^1 l_j l_i
struct GalerkinMatrices {
    Matrix time_mass;
    Matrix time_gram;
    Vector left_trace; // l_i(0)
};

GalerkinMatrices galerkin_matrices(const RadauTableau& tableau);

} // namespace dgt
