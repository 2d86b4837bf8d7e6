#include "dgtime/timefun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dgt {

// ----------------------------------------------------------------- TimeMesh

TimeMesh::TimeMesh(double horizon, std::size_t slabs) : horizon_(horizon), slabs_(slabs)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time mesh: horizon must be positive and finite");
    if (slabs == 0)
        throw std::invalid_argument("time mesh: slab count must be positive");
}

double TimeMesh::point(std::size_t n) const
{
    if (n == slabs_)
        return horizon_;
    return static_cast<double>(n) * horizon_ / static_cast<double>(slabs_);
}

std::pair<std::size_t, double> TimeMesh::locate(double t) const
{
    if (t <= 0.0)
        return {0, 0.0};
    const double s = t / step();
    const double nearest = std::round(s);
    if (nearest >= 1.0 && std::abs(s - nearest) <= 1e-12 * std::max(1.0, nearest)) {
        const auto m = std::min(static_cast<std::size_t>(nearest), slabs_);
        return {m - 1, 1.0};
    }
    auto n = static_cast<std::size_t>(std::floor(s));
    if (n >= slabs_)
        return {slabs_ - 1, 1.0};
    return {n, (t - point(n)) / step()};
}

SlabFunction on_slabs(const TimeMesh& mesh, TimeFunction f)
{
    return [mesh, f = std::move(f)](std::size_t n, double tau) { return f(mesh.time(n, tau)); };
}

// ------------------------------------------------------------- MeshFunction

MeshFunction::MeshFunction(TimeMesh mesh, std::shared_ptr<const LagrangeBasis> basis,
                           std::vector<Matrix> nodal, Vector left_value_at_zero,
                           Continuity continuity)
    : mesh_(mesh), basis_(std::move(basis)), nodal_(std::move(nodal)),
      left_(std::move(left_value_at_zero)), continuity_(continuity)
{
    if (!basis_)
        throw std::invalid_argument("mesh function: missing basis");
    if (nodal_.size() != mesh_.slabs())
        throw std::invalid_argument("mesh function: expected " + std::to_string(mesh_.slabs()) +
                                    " slabs, got " + std::to_string(nodal_.size()));
    for (const auto& m : nodal_) {
        if (m.rows() != left_.size() || m.cols() != static_cast<Eigen::Index>(basis_->size()))
            throw std::invalid_argument("mesh function: slab coefficient shape mismatch");
    }
    if (continuity_ == Continuity::continuous) {
        for (std::size_t n = 0; n < mesh_.slabs(); ++n) {
            const Vector from_left = left_limit(n);
            const Vector from_right = right_limit(n);
            const double scale = std::max({1.0, from_left.norm(), from_right.norm()});
            if ((from_left - from_right).norm() > 1e-12 * scale)
                throw std::invalid_argument("mesh function: declared continuous but jumps at t_" +
                                            std::to_string(n));
        }
    }
}

Vector MeshFunction::evaluate(std::size_t n, double tau) const
{
    std::vector<double> phi(basis_->size());
    basis_->values(tau, phi);
    return nodal_[n] * Eigen::Map<const Vector>(phi.data(), static_cast<Eigen::Index>(phi.size()));
}

Vector MeshFunction::derivative(std::size_t n, double tau) const
{
    std::vector<double> dphi(basis_->size());
    basis_->derivatives(tau, dphi);
    return nodal_[n] * Eigen::Map<const Vector>(dphi.data(), static_cast<Eigen::Index>(dphi.size())) /
           mesh_.step();
}

Vector MeshFunction::operator()(double t) const
{
    if (t == 0.0)
        return left_;
    if (t < 0.0 || t > mesh_.horizon() * (1.0 + 1e-12))
        throw std::out_of_range("mesh function: time outside (0, T]");
    const auto [n, tau] = mesh_.locate(t);
    return evaluate(n, tau);
}

Vector MeshFunction::left_limit(std::size_t n) const
{
    return n == 0 ? left_ : evaluate(n - 1, 1.0);
}

Vector MeshFunction::right_limit(std::size_t n) const { return evaluate(n, 0.0); }

Matrix MeshFunction::legendre_coefficients(std::size_t n) const
{
    const int deg = degree();
    LegendreBasis legendre(deg);
    const auto& rule = gauss_rule(deg + 1);
    Matrix coeffs = Matrix::Zero(static_cast<Eigen::Index>(dim()), deg + 1);
    std::vector<double> leg(deg + 1);
    for (int g = 0; g < rule.size(); ++g) {
        const double tau = rule.nodes()[g];
        const Vector v = evaluate(n, tau);
        legendre.values(tau, leg);
        for (int i = 0; i <= deg; ++i)
            coeffs.col(i) += rule.weights()[g] * leg[i] * v;
    }
    for (int i = 0; i <= deg; ++i)
        coeffs.col(i) /= LegendreBasis::squared_norm(i);
    return coeffs;
}

SlabFunction MeshFunction::values() const
{
    return [self = *this](std::size_t n, double tau) { return self.evaluate(n, tau); };
}

SlabFunction MeshFunction::derivatives() const
{
    return [self = *this](std::size_t n, double tau) { return self.derivative(n, tau); };
}

// -------------------------------------------------------------------- norms

double StateNorm::operator()(const Vector& x) const
{
    if (weights.empty())
        return x.norm();
    if (weights.size() != static_cast<std::size_t>(x.size()))
        throw std::invalid_argument("state norm: weight count does not match dimension");
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        s += weights[static_cast<std::size_t>(i)] * x[i] * x[i];
    return std::sqrt(s);
}

void NormSpec::validate() const
{
    if (std::isnan(p) || p < 1.0)
        throw std::invalid_argument("norm: exponent p must lie in [1, inf]");
    for (double w : x_norm.weights)
        if (!(w > 0.0))
            throw std::invalid_argument("norm: state-norm weights must be positive");
}

void NormSpec::validate_for_max_regularity() const
{
    validate();
    if (!(p > 1.0) || is_infinite())
        throw std::invalid_argument("norm: maximal-regularity quantities need p in (1, inf)");
}

SlabNorms::SlabNorms(double p, std::vector<double> contributions)
    : p_(p), contributions_(std::move(contributions))
{
    cumulative_.resize(contributions_.size() + 1, 0.0);
    for (std::size_t n = 0; n < contributions_.size(); ++n) {
        cumulative_[n + 1] = p_ == NormSpec::infinity
                                 ? std::max(cumulative_[n], contributions_[n])
                                 : cumulative_[n] + contributions_[n];
    }
}

double SlabNorms::prefix(std::size_t m) const
{
    if (m > contributions_.size())
        throw std::out_of_range("slab norms: prefix beyond final slab");
    const double s = cumulative_[m];
    return p_ == NormSpec::infinity ? s : std::pow(s, 1.0 / p_);
}

std::vector<double> SlabNorms::prefixes() const
{
    std::vector<double> out(contributions_.size());
    for (std::size_t m = 1; m <= contributions_.size(); ++m)
        out[m - 1] = prefix(m);
    return out;
}

SlabNorms slab_norms(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
                     LpQuadrature quad)
{
    spec.validate();
    if (quad.panels < 1)
        throw std::invalid_argument("lp quadrature: panel count must be positive");
    const auto& rule = gauss_rule(quad.points);
    const double k = mesh.step();
    std::vector<double> contributions(mesh.slabs(), 0.0);
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        double acc = 0.0;
        if (spec.is_infinite()) {
            acc = std::max(spec.x_norm(v(n, 0.0)), spec.x_norm(v(n, 1.0)));
        }
        for (int panel = 0; panel < quad.panels; ++panel) {
            for (int g = 0; g < rule.size(); ++g) {
                const double tau = (panel + rule.nodes()[g]) / quad.panels;
                const double x = spec.x_norm(v(n, tau));
                if (spec.is_infinite())
                    acc = std::max(acc, x);
                else
                    acc += rule.weights()[g] / quad.panels * k * std::pow(x, spec.p);
            }
        }
        contributions[n] = acc;
    }
    return SlabNorms(spec.p, std::move(contributions));
}

double lp_norm(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
               std::optional<std::size_t> m, LpQuadrature quad)
{
    if (m && (*m == 0 || *m > mesh.slabs()))
        throw std::out_of_range("lp_norm: prefix must be a mesh point t_m with 1 <= m <= N");
    // Only the prefix slabs are integrated.
    if (m && *m < mesh.slabs()) {
        const TimeMesh prefix_mesh(mesh.point(*m), *m);
        return slab_norms(v, prefix_mesh, spec, quad).total();
    }
    return slab_norms(v, mesh, spec, quad).total();
}

double lp_norm(const MeshFunction& v, const NormSpec& spec, std::optional<std::size_t> m,
               LpQuadrature quad)
{
    return lp_norm(v.values(), v.mesh(), spec, m, quad);
}

double lp_norm_doubling_error(const SlabFunction& v, const TimeMesh& mesh, const NormSpec& spec,
                              std::optional<std::size_t> m, LpQuadrature quad)
{
    const double coarse = lp_norm(v, mesh, spec, m, quad);
    quad.panels *= 2;
    const double fine = lp_norm(v, mesh, spec, m, quad);
    if (fine == 0.0)
        return coarse == 0.0 ? 0.0 : 1.0;
    return std::abs(coarse - fine) / fine;
}

double discrete_lp_norm(const MeshFunction& v, const RadauTableau& tableau, const NormSpec& spec,
                        std::optional<std::size_t> m)
{
    spec.validate();
    const std::size_t upto = m.value_or(v.mesh().slabs());
    if (upto == 0 || upto > v.mesh().slabs())
        throw std::out_of_range("discrete_lp_norm: prefix must be a mesh point t_m");
    const double k = v.mesh().step();
    double acc = 0.0;
    for (std::size_t l = 0; l < upto; ++l) {
        for (int i = 0; i < tableau.q; ++i) {
            const double x = spec.x_norm(v.evaluate(l, tableau.c[i]));
            if (spec.is_infinite())
                acc = std::max(acc, x);
            else
                acc += k * std::pow(x, spec.p);
        }
    }
    return spec.is_infinite() ? acc : std::pow(acc, 1.0 / spec.p);
}

MeshFunction backward_difference(const MeshFunction& v)
{
    const double k = v.mesh().step();
    std::vector<Matrix> nodal(v.mesh().slabs());
    for (std::size_t n = 0; n < nodal.size(); ++n)
        nodal[n] = n == 0 ? Matrix(v.nodal(0) / k) : Matrix((v.nodal(n) - v.nodal(n - 1)) / k);
    return MeshFunction(v.mesh(), v.shared_basis(), std::move(nodal), v.left_value_at_zero() / k,
                        v.continuity());
}

// ---------------------------------------------------------------------- CSV

namespace {

std::string fmt_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_csv(std::ostream& out, const MeshFunction& v)
{
    out << "slab,node,tau,t";
    for (std::size_t i = 0; i < v.dim(); ++i)
        out << ",v" << i;
    out << '\n';
    out << "-1,0,0,0";
    for (Eigen::Index i = 0; i < v.left_value_at_zero().size(); ++i)
        out << ',' << fmt_double(v.left_value_at_zero()[i]);
    out << '\n';
    const auto nodes = v.basis().nodes();
    for (std::size_t n = 0; n < v.mesh().slabs(); ++n) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            out << n << ',' << j << ',' << fmt_double(nodes[j]) << ','
                << fmt_double(v.mesh().time(n, nodes[j]));
            const auto col = v.nodal(n).col(static_cast<Eigen::Index>(j));
            for (Eigen::Index i = 0; i < col.size(); ++i)
                out << ',' << fmt_double(col[i]);
            out << '\n';
        }
    }
}

MeshFunction read_csv(std::istream& in, Continuity continuity)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("slab,node,tau,t", 0) != 0)
        throw std::invalid_argument("mesh function csv: missing header");
    struct Row {
        long slab;
        std::size_t node;
        double tau, t;
        std::vector<double> v;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() < 5)
            throw std::invalid_argument("mesh function csv: short row '" + line + "'");
        Row r{std::stol(cells[0]), std::stoul(cells[1]), std::stod(cells[2]), std::stod(cells[3]), {}};
        for (std::size_t i = 4; i < cells.size(); ++i)
            r.v.push_back(std::stod(cells[i]));
        rows.push_back(std::move(r));
    }
    if (rows.empty() || rows.front().slab != -1)
        throw std::invalid_argument("mesh function csv: missing value-at-zero row");
    const std::size_t d = rows.front().v.size();
    long max_slab = -1;
    for (const auto& r : rows) {
        if (r.v.size() != d)
            throw std::invalid_argument("mesh function csv: ragged rows");
        max_slab = std::max(max_slab, r.slab);
    }
    if (max_slab < 0)
        throw std::invalid_argument("mesh function csv: no slab rows");
    const auto slabs = static_cast<std::size_t>(max_slab + 1);

    std::vector<double> nodes;
    double k = 0.0;
    for (const auto& r : rows) {
        if (r.slab != 0)
            continue;
        nodes.push_back(r.tau);
        if (r.tau > 0.0)
            k = r.t / r.tau;
    }
    if (!(k > 0.0))
        throw std::invalid_argument("mesh function csv: cannot infer step from slab 0");
    double horizon = static_cast<double>(slabs) * k;
    if (rows.back().slab == max_slab && rows.back().tau == 1.0)
        horizon = rows.back().t;

    auto basis = std::make_shared<const LagrangeBasis>(nodes);
    std::vector<Matrix> nodal(slabs, Matrix::Zero(static_cast<Eigen::Index>(d),
                                                  static_cast<Eigen::Index>(nodes.size())));
    Vector left = Eigen::Map<const Vector>(rows.front().v.data(), static_cast<Eigen::Index>(d));
    for (const auto& r : rows) {
        if (r.slab < 0)
            continue;
        if (r.node >= nodes.size())
            throw std::invalid_argument("mesh function csv: node index out of range");
        nodal[static_cast<std::size_t>(r.slab)].col(static_cast<Eigen::Index>(r.node)) =
            Eigen::Map<const Vector>(r.v.data(), static_cast<Eigen::Index>(d));
    }
    return MeshFunction(TimeMesh(horizon, slabs), std::move(basis), std::move(nodal),
                        std::move(left), continuity);
}

} // namespace dgt
