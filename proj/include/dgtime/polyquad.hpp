#pragma once

// Reference-interval polynomial machinery on [0,1]: Gauss rules, right-Radau
// nodes with their Butcher tableau, and Lagrange / shifted Legendre bases.

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace dgt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gauss-Legendre rule with G points mapped to [0,1].
///
/// Construction verifies exactness on the monomials tau^m, m <= 2G-1, and
/// throws std::logic_error if that check fails.
class GaussRule {
public:
    static constexpr int max_points = 64;

    explicit GaussRule(int points);

    int size() const { return static_cast<int>(nodes_.size()); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    /// Integrates f over [a,b].
    template <class F>
    auto integrate(F&& f, double a = 0.0, double b = 1.0) const
    {
        const double h = b - a;
        using Value = std::decay_t<decltype(f(a))>;
        Value sum = f(a + h * nodes_[0]) * (h * weights_[0]);
        for (std::size_t g = 1; g < nodes_.size(); ++g)
            sum += f(a + h * nodes_[g]) * (h * weights_[g]);
        return sum;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Shared immutable Gauss rule; throws std::out_of_range outside 1..64.
const GaussRule& gauss_rule(int points);

/// Lagrange cardinal basis over distinct nodes.
///
/// Values use the second (true) barycentric form; derivatives use the
/// product form, which is unconditionally stable for the small node counts
/// used here.
class LagrangeBasis {
public:
    explicit LagrangeBasis(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    int degree() const { return static_cast<int>(nodes_.size()) - 1; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> barycentric_weights() const { return bary_; }

    /// All basis values at tau, written into out (size() entries).
    void values(double tau, std::span<double> out) const;
    /// All basis derivatives at tau.
    void derivatives(double tau, std::span<double> out) const;

    double value(std::size_t i, double tau) const;
    double derivative(std::size_t i, double tau) const;
    /// Definite integral of l_i over [a,b], exact.
    double integral(std::size_t i, double a = 0.0, double b = 1.0) const;

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
};

/// Shifted Legendre polynomials L_i(tau) = P_i(2 tau - 1) on [0,1];
/// L_i(1) = 1 and the squared L2(0,1) norm is 1/(2i+1).
class LegendreBasis {
public:
    explicit LegendreBasis(int max_degree);

    int max_degree() const { return max_degree_; }

    /// L_0..L_max at tau.
    void values(double tau, std::span<double> out) const;
    /// L_0'..L_max' at tau (derivative with respect to tau).
    void derivatives(double tau, std::span<double> out) const;

    double value(int i, double tau) const;
    double derivative(int i, double tau) const;
    static double squared_norm(int i) { return 1.0 / (2.0 * i + 1.0); }

private:
    int max_degree_;
};

/// q-stage Radau IIA data on the reference slab.
struct RadauTableau {
    int q = 0;
    std::vector<double> c;                  // 0 < c_1 < ... < c_q = 1
    Matrix a;                               // a_ij = int_0^{c_i} l_j
    std::vector<double> b;                  // b_j = a_qj
    std::vector<double> lagrange_integrals; // int_0^1 l_j
    LagrangeBasis stage_basis;              // l_1..l_q over c
    LagrangeBasis extended_basis;           // over {0, c_1, ..., c_q}
};

inline constexpr int max_radau_stages = 8;

/// Builds the tableau from scratch. Nodes are eigenvalues of the Jacobi
/// matrix for weight (1-x) on [-1,1] (interior Radau points), polished by
/// Newton on P_q - P_{q-1}. Throws std::out_of_range unless 1 <= q <= 8.
RadauTableau build_radau_tableau(int q);

/// Cached shared instance of build_radau_tableau(q).
const RadauTableau& radau_tableau(int q);

} // namespace dgt
