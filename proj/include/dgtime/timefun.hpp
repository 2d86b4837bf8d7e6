#pragma once

// Uniform time meshes, piecewise polynomials in time with vector
// coefficients, L^p / discrete l^p norms and the backward difference.

#include "dgtime/polyquad.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace dgt {

/// Uniform partition of [0,T] into N slabs J_n = (t_n, t_{n+1}].
class TimeMesh {
public:
    TimeMesh(double horizon, std::size_t slabs);

    double horizon() const { return horizon_; }
    std::size_t slabs() const { return slabs_; }
    double step() const { return horizon_ / static_cast<double>(slabs_); }
    /// t_n = n T / N; t_N == T exactly.
    double point(std::size_t n) const;
    /// t_n + tau k
    double time(std::size_t n, double tau) const { return point(n) + tau * step(); }

    /// Slab containing t under J_n = (t_n, t_{n+1}] with its reference
    /// coordinate. Times within 1e-12 k of a mesh point t_m (m >= 1) map to
    /// (m-1, 1). t <= 0 maps to (0, 0).
    std::pair<std::size_t, double> locate(double t) const;

    bool operator==(const TimeMesh&) const = default;

private:
    double horizon_;
    std::size_t slabs_;
};

/// Value on slab n at reference coordinate tau in [0,1]. Slab-local
/// evaluation avoids the left/right ambiguity at mesh points.
using SlabFunction = std::function<Vector(std::size_t slab, double tau)>;
using TimeFunction = std::function<Vector(double t)>;

SlabFunction on_slabs(const TimeMesh& mesh, TimeFunction f);

enum class Continuity { discontinuous, continuous };

/// Piecewise polynomial of fixed per-slab degree, stored as nodal values
/// against a shared reference basis. Immutable.
class MeshFunction {
public:
    /// nodal[n] is d x basis->size(): column j is the value at basis node j.
    /// For Continuity::continuous the slab traces are validated (1e-12
    /// relative) and std::invalid_argument is thrown on mismatch.
    MeshFunction(TimeMesh mesh, std::shared_ptr<const LagrangeBasis> basis,
                 std::vector<Matrix> nodal, Vector left_value_at_zero, Continuity continuity);

    const TimeMesh& mesh() const { return mesh_; }
    const LagrangeBasis& basis() const { return *basis_; }
    std::shared_ptr<const LagrangeBasis> shared_basis() const { return basis_; }
    int degree() const { return basis_->degree(); }
    std::size_t dim() const { return static_cast<std::size_t>(left_.size()); }
    Continuity continuity() const { return continuity_; }
    const Vector& left_value_at_zero() const { return left_; }
    const Matrix& nodal(std::size_t n) const { return nodal_[n]; }
    const std::vector<Matrix>& nodal() const { return nodal_; }

    Vector evaluate(std::size_t n, double tau) const;
    /// Time derivative d/dt on slab n.
    Vector derivative(std::size_t n, double tau) const;
    /// Left-limit semantics: v(t_n) for n >= 1 is the slab n-1 trace at tau=1;
    /// v(0) is left_value_at_zero.
    Vector operator()(double t) const;
    /// v_n = v(t_n)
    Vector left_limit(std::size_t n) const;
    /// v_n^+
    Vector right_limit(std::size_t n) const;
    /// Shifted-Legendre coefficients on slab n, d x (degree+1).
    Matrix legendre_coefficients(std::size_t n) const;

    SlabFunction values() const;
    SlabFunction derivatives() const;

private:
    TimeMesh mesh_;
    std::shared_ptr<const LagrangeBasis> basis_;
    std::vector<Matrix> nodal_;
    Vector left_;
    Continuity continuity_;
};

/// The state-space norm ||.||_X on R^d.
struct StateNorm {
    /// Empty: Euclidean. Otherwise sqrt(sum_i w_i x_i^2).
    std::vector<double> weights;

    double operator()(const Vector& x) const;
};

struct NormSpec {
    double p = 2.0;
    StateNorm x_norm;

    static constexpr double infinity = std::numeric_limits<double>::infinity();

    bool is_infinite() const { return p == infinity; }
    /// Throws std::invalid_argument unless 1 <= p <= inf.
    void validate() const;
    /// Throws std::invalid_argument unless 1 < p < inf.
    void validate_for_max_regularity() const;
};

/// Composite Gauss setting for time integrals of |.|^p.
struct LpQuadrature {
    int panels = 16;
    int points = 10;
};

/// Per-slab contributions of an L^p integral so that any mesh-point prefix
/// can be read off without re-integration.
class SlabNorms {
public:
    SlabNorms(double p, std::vector<double> contributions);

    double p() const { return p_; }
    std::size_t slabs() const { return contributions_.size(); }
    /// int_{J_n} ||v||^p (or the slab max for p = inf).
    double contribution(std::size_t n) const { return contributions_[n]; }
    /// Norm over (0, t_m].
    double prefix(std::size_t m) const;
    /// All prefixes m = 1..N.
    std::vector<double> prefixes() const;
    double total() const { return prefix(contributions_.size()); }

private:
    double p_;
    std::vector<double> contributions_;
    std::vector<double> cumulative_;
};

SlabNorms slab_norms(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
                     LpQuadrature quad = {});

/// (int_0^{t_m} ||v||_X^p dt)^{1/p}; m defaults to N.
double lp_norm(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
               std::optional<std::size_t> m = std::nullopt, LpQuadrature quad = {});
double lp_norm(const MeshFunction& v, const NormSpec& spec,
               std::optional<std::size_t> m = std::nullopt, LpQuadrature quad = {});

/// Relative change of lp_norm when the panel count is doubled.
double lp_norm_doubling_error(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
                              std::optional<std::size_t> m = std::nullopt,
                              LpQuadrature quad = {});

/// (sum_{l<m} k sum_i ||v(t_{li})||^p)^{1/p} at the Radau nodes of the
/// tableau; exact (no quadrature). Intended for v with v(0) = 0.
double discrete_lp_norm(const MeshFunction& v, const RadauTableau& tableau,
                        const NormSpec& spec, std::optional<std::size_t> m = std::nullopt);

/// t -> (v(t) - v(t-k))/k with v = 0 on [-k, 0).
MeshFunction backward_difference(const MeshFunction& v);

/// CSV layout, one row per slab per nodal vector:
///   slab,node,tau,t,v0,...,v{d-1}
/// preceded by a row with slab = -1 holding the value attached at t = 0.
void write_csv(std::ostream& out, const MeshFunction& v);
/// Inverse of write_csv; the node set is taken from slab 0's tau column.
MeshFunction read_csv(std::istream& in, Continuity continuity);

} // namespace dgt
