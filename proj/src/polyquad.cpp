#include "dgtime/polyquad.hpp"

#include "dgtime/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace dgt {
namespace {

// P_n and P_n' on [-1,1] by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x)
{
    if (n == 0)
        return {1.0, 0.0};
    double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        const double d2 = d0 + (2.0 * m - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return {p1, d1};
}

// Eigenvalues of a symmetric tridiagonal matrix, ascending.
std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& diag,
                                            const std::vector<double>& off)
{
    const auto n = static_cast<Eigen::Index>(diag.size());
    Matrix jac = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        jac(i, i) = diag[i];
        if (i + 1 < n)
            jac(i, i + 1) = jac(i + 1, i) = off[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jac, Eigen::EigenvaluesOnly);
    std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    std::sort(out.begin(), out.end());
    return out;
}

template <class F>
double newton_polish(double x, F&& f_and_df)
{
    for (int it = 0; it < 50; ++it) {
        const auto [f, df] = f_and_df(x);
        const double dx = f / df;
        x -= dx;
        if (std::abs(dx) < 1e-16)
            break;
    }
    return x;
}

} // namespace

// ---------------------------------------------------------------- GaussRule

GaussRule::GaussRule(int points)
{
    if (points < 1 || points > max_points)
        throw std::out_of_range("gauss_rule: point count " + std::to_string(points) +
                                " outside [1, " + std::to_string(max_points) + "]");
    const int n = points;
    std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
    for (int i = 1; i < n; ++i)
        off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
    auto x = tridiagonal_eigenvalues(diag, off);

    nodes_.resize(n);
    weights_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double xi = newton_polish(x[i], [n](double t) { return legendre_pair(n, t); });
        const double dp = legendre_pair(n, xi).second;
        nodes_[i] = 0.5 * (xi + 1.0);
        // 2/((1-x^2) P_n'(x)^2) on [-1,1], halved for [0,1]
        weights_[i] = 1.0 / ((1.0 - xi * xi) * dp * dp);
    }

    for (int m = 0; m <= 2 * n - 1; ++m) {
        const double approx = integrate([m](double t) { return std::pow(t, m); });
        if (std::abs(approx - 1.0 / (m + 1.0)) > 1e-12)
            throw std::logic_error("gauss_rule: exactness check failed for G=" +
                                   std::to_string(n) + ", degree " + std::to_string(m));
    }
}

const GaussRule& gauss_rule(int points)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[points];
    if (!slot)
        slot = std::make_unique<const GaussRule>(points);
    return *slot;
}

// ------------------------------------------------------------ LagrangeBasis

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.empty())
        throw DegenerateInput("lagrange_basis: empty node set");
    const std::size_t m = nodes_.size();
    bary_.assign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j)
                continue;
            const double diff = nodes_[i] - nodes_[j];
            if (diff == 0.0)
                throw DegenerateInput("lagrange_basis: duplicate node " +
                                      std::to_string(nodes_[i]));
            bary_[i] /= diff;
        }
    }
}

void LagrangeBasis::values(double tau, std::span<double> out) const
{
    const std::size_t m = nodes_.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (tau == nodes_[i]) {
            std::fill(out.begin(), out.begin() + m, 0.0);
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = bary_[i] / (tau - nodes_[i]);
        denom += out[i];
    }
    for (std::size_t i = 0; i < m; ++i)
        out[i] /= denom;
}

void LagrangeBasis::derivatives(double tau, std::span<double> out) const
{
    const std::size_t m = nodes_.size();
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == i)
                continue;
            double prod = 1.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i && j != r)
                    prod *= tau - nodes_[j];
            sum += prod;
        }
        out[i] = bary_[i] * sum;
    }
}

double LagrangeBasis::value(std::size_t i, double tau) const
{
    std::vector<double> out(size());
    values(tau, out);
    return out[i];
}

double LagrangeBasis::derivative(std::size_t i, double tau) const
{
    std::vector<double> out(size());
    derivatives(tau, out);
    return out[i];
}

double LagrangeBasis::integral(std::size_t i, double a, double b) const
{
    // degree m-1 integrand: ceil(m/2) points suffice
    const auto& rule = gauss_rule(static_cast<int>(size() + 1) / 2);
    return rule.integrate([&](double t) { return value(i, t); }, a, b);
}

// ------------------------------------------------------------ LegendreBasis

LegendreBasis::LegendreBasis(int max_degree) : max_degree_(max_degree)
{
    if (max_degree < 0)
        throw std::out_of_range("legendre_basis: negative degree");
}

void LegendreBasis::values(double tau, std::span<double> out) const
{
    const double x = 2.0 * tau - 1.0;
    out[0] = 1.0;
    if (max_degree_ >= 1)
        out[1] = x;
    for (int m = 2; m <= max_degree_; ++m)
        out[m] = ((2.0 * m - 1.0) * x * out[m - 1] - (m - 1.0) * out[m - 2]) / m;
}

void LegendreBasis::derivatives(double tau, std::span<double> out) const
{
    // P_m' = P_{m-2}' + (2m-1) P_{m-1}, chain factor 2 for tau
    std::vector<double> p(max_degree_ + 1);
    values(tau, p);
    out[0] = 0.0;
    if (max_degree_ >= 1)
        out[1] = 2.0;
    for (int m = 2; m <= max_degree_; ++m)
        out[m] = out[m - 2] + 2.0 * (2.0 * m - 1.0) * p[m - 1];
}

double LegendreBasis::value(int i, double tau) const
{
    return legendre_pair(i, 2.0 * tau - 1.0).first;
}

double LegendreBasis::derivative(int i, double tau) const
{
    std::vector<double> d(max_degree_ + 1);
    derivatives(tau, d);
    return d[i];
}

// ------------------------------------------------------------- RadauTableau

namespace {

std::vector<double> right_radau_nodes(int q)
{
    std::vector<double> x;
    if (q > 1) {
        // Jacobi P^{(1,0)}: recurrence coefficients for weight (1-x)
        const double alpha = 1.0, beta = 0.0;
        const int n = q - 1;
        std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
        for (int i = 0; i < n; ++i) {
            const double s = 2.0 * i + alpha + beta;
            diag[i] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        }
        for (int i = 1; i < n; ++i) {
            const double s = 2.0 * i + alpha + beta;
            off[i - 1] = std::sqrt(4.0 * i * (i + alpha) * (i + beta) * (i + alpha + beta) /
                                   (s * s * (s + 1.0) * (s - 1.0)));
        }
        x = tridiagonal_eigenvalues(diag, off);
        for (auto& xi : x) {
            xi = newton_polish(xi, [q](double t) {
                const auto [pq, dq] = legendre_pair(q, t);
                const auto [pm, dm] = legendre_pair(q - 1, t);
                return std::pair{pq - pm, dq - dm};
            });
        }
    }
    x.push_back(1.0);
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        c[i] = 0.5 * (x[i] + 1.0);
    c.back() = 1.0;
    return c;
}

std::vector<double> with_origin(const std::vector<double>& c)
{
    std::vector<double> ext{0.0};
    ext.insert(ext.end(), c.begin(), c.end());
    return ext;
}

} // namespace

RadauTableau build_radau_tableau(int q)
{
    if (q < 1 || q > max_radau_stages)
        throw std::out_of_range("radau_tableau: q=" + std::to_string(q) + " outside [1, " +
                                std::to_string(max_radau_stages) + "]");
    auto c = right_radau_nodes(q);
    LagrangeBasis stage(c);
    LagrangeBasis extended(with_origin(c));

    Matrix a(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            a(i, j) = stage.integral(j, 0.0, c[i]);
    std::vector<double> b(q), integrals(q);
    for (int j = 0; j < q; ++j) {
        b[j] = a(q - 1, j);
        integrals[j] = stage.integral(j, 0.0, 1.0);
        if (!(integrals[j] > 0.0))
            throw std::logic_error("radau_tableau: nonpositive Lagrange integral");
    }
    return RadauTableau{q, std::move(c), std::move(a), std::move(b), std::move(integrals),
                        std::move(stage), std::move(extended)};
}

const RadauTableau& radau_tableau(int q)
{
    if (q < 1 || q > max_radau_stages)
        throw std::out_of_range("radau_tableau: q=" + std::to_string(q) + " outside [1, " +
                                std::to_string(max_radau_stages) + "]");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const RadauTableau>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[q];
    if (!slot)
        slot = std::make_unique<const RadauTableau>(build_radau_tableau(q));
    return *slot;
}

} // namespace dgt
