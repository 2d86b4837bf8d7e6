#include "dgtime/operators.hpp"

#include "dgtime/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dgt {

// ------------------------------------------------------- BlockFactorization

BlockFactorization::BlockFactorization(const Matrix& assembled, std::size_t stages,
                                       std::size_t dim)
    : lu_(assembled), stages_(stages), dim_(dim), rcond_(lu_.rcond())
{
}

Matrix BlockFactorization::solve(const Matrix& rhs) const
{
    const auto d = static_cast<Eigen::Index>(dim_);
    const auto q = static_cast<Eigen::Index>(stages_);
    const Vector stacked = Eigen::Map<const Vector>(rhs.data(), d * q);
    const Vector x = lu_.solve(stacked);
    return Eigen::Map<const Matrix>(x.data(), d, q);
}

Matrix assemble_block(const Matrix& mass, const Matrix& stiffness, double k, const Matrix& a)
{
    const Eigen::Index q = mass.rows();
    const Eigen::Index d = a.rows();
    Matrix sys = Matrix::Zero(q * d, q * d);
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index j = 0; j < q; ++j) {
            auto block = sys.block(i * d, j * d, d, d);
            block = (k * stiffness(i, j)) * a;
            block.diagonal().array() += mass(i, j);
        }
    }
    return sys;
}

// ------------------------------------------------------------ OperatorModel

struct OperatorModel::Cache {
    std::mutex mutex;
    std::map<std::vector<double>, std::shared_ptr<const BlockFactorization>> entries;
};

namespace {

SpectralInfo compute_spectrum(const Matrix& a)
{
    Eigen::EigenSolver<Matrix> eig(a, false);
    if (eig.info() != Eigen::Success)
        throw ModelRejected("operator model: eigenvalue computation failed");
    SpectralInfo info{std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        info.min_real = std::min(info.min_real, eig.eigenvalues()[i].real());
        info.max_abs = std::max(info.max_abs, std::abs(eig.eigenvalues()[i]));
    }
    return info;
}

} // namespace

OperatorModel::OperatorModel(Matrix a, std::string name)
    : a_(std::move(a)), name_(std::move(name)), cache_(std::make_shared<Cache>())
{
    if (a_.rows() == 0 || a_.rows() != a_.cols())
        throw std::invalid_argument("operator model: matrix must be square and nonempty");
    if (!a_.allFinite())
        throw std::invalid_argument("operator model: matrix has non-finite entries");
    symmetric_ = (a_ - a_.transpose()).norm() <= 1e-14 * std::max(1.0, a_.norm());
    spectrum_ = compute_spectrum(a_);
}

Vector OperatorModel::solve_shifted(double alpha, double beta, const Vector& rhs) const
{
    if (beta == 0.0) {
        if (alpha == 0.0)
            throw std::invalid_argument("solve_shifted: alpha = beta = 0");
        return rhs / alpha;
    }
    Matrix m = beta * a_;
    m.diagonal().array() += alpha;
    return m.partialPivLu().solve(rhs);
}

std::shared_ptr<const BlockFactorization>
OperatorModel::factor_block(const Matrix& mass, const Matrix& stiffness, double k) const
{
    std::vector<double> key{k};
    key.insert(key.end(), mass.data(), mass.data() + mass.size());
    key.insert(key.end(), stiffness.data(), stiffness.data() + stiffness.size());
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->entries.find(key); it != cache_->entries.end())
            return it->second;
    }
    auto fact = std::make_shared<const BlockFactorization>(assemble_block(mass, stiffness, k, a_),
                                                           static_cast<std::size_t>(mass.rows()),
                                                           dim());
    std::lock_guard lock(cache_->mutex);
    return cache_->entries.emplace(std::move(key), std::move(fact)).first->second;
}

OperatorModel laplacian_1d(std::size_t d, double diffusion)
{
    if (d == 0)
        throw std::invalid_argument("laplacian_1d: need at least one interior point");
    if (!(diffusion > 0.0))
        throw std::invalid_argument("laplacian_1d: diffusion must be positive");
    const double h = 1.0 / (static_cast<double>(d) + 1.0);
    const double s = diffusion / (h * h);
    const auto n = static_cast<Eigen::Index>(d);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = 2.0 * s;
        if (i + 1 < n)
            a(i, i + 1) = a(i + 1, i) = -s;
    }
    return OperatorModel(std::move(a), "heat1d");
}

OperatorModel nonnormal_model(std::size_t d, double skew)
{
    if (d < 2)
        throw std::invalid_argument("nonnormal_model: need d >= 2");
    const double h = 1.0 / (static_cast<double>(d) + 1.0);
    Matrix a = laplacian_1d(d, 1.0).matrix();
    for (Eigen::Index i = 0; i + 1 < a.rows(); ++i)
        a(i, i + 1) += skew / h;
    OperatorModel model(std::move(a), "nonnormal");
    if (!(model.spectrum().min_real > 0.0))
        throw ModelRejected("nonnormal_model: spectrum not in the open right half-plane (min Re = " +
                            std::to_string(model.spectrum().min_real) + ")");
    return model;
}

OperatorModel read_matrix(std::istream& in, std::string name)
{
    std::stringstream body;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#')
            continue;
        body << line << '\n';
    }
    long d = 0;
    if (!(body >> d) || d <= 0)
        throw std::invalid_argument("matrix file: header must be a positive dimension");
    Matrix a(d, d);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j)
            if (!(body >> a(i, j)))
                throw std::invalid_argument("matrix file: expected " + std::to_string(d * d) +
                                            " entries, ran out at row " + std::to_string(i));
    double extra;
    if (body >> extra)
        throw std::invalid_argument("matrix file: trailing entries after d x d matrix");
    return OperatorModel(std::move(a), std::move(name));
}

OperatorModel read_matrix_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("matrix file: cannot open " + path.string());
    return read_matrix(in, "matrix-file");
}

// ----------------------------------------------- TimeDependentOperatorModel

TimeDependentOperatorModel::TimeDependentOperatorModel(std::shared_ptr<const OperatorModel> base,
                                                       Modulation modulation, Drift drift,
                                                       double horizon, DeclaredBounds bounds)
    : base_(std::move(base)), modulation_(std::move(modulation)), drift_(std::move(drift)),
      horizon_(horizon), bounds_(bounds)
{
    if (!base_)
        throw std::invalid_argument("nonautonomous model: missing base operator");
    if (!modulation_.value)
        throw std::invalid_argument("nonautonomous model: missing modulation");
    if (!(horizon_ > 0.0))
        throw std::invalid_argument("nonautonomous model: horizon must be positive");
}

Matrix TimeDependentOperatorModel::matrix_at(double t) const
{
    Matrix m = modulation_.value(t) * base_->matrix();
    if (drift_)
        m += drift_(t);
    return m;
}

Vector TimeDependentOperatorModel::apply_at(double t, const Vector& x) const
{
    Vector y = modulation_.value(t) * base_->apply(x);
    if (drift_)
        y += drift_(t) * x;
    return y;
}

LipschitzCheck TimeDependentOperatorModel::check_lipschitz(int probes, std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> when(0.0, horizon_);
    LipschitzCheck out;
    for (int trial = 0; trial < probes; ++trial) {
        Vector v(static_cast<Eigen::Index>(dim()));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = normal(rng);
        const double t = when(rng), s = when(rng);
        if (t == s)
            continue;
        const double denom = std::abs(t - s) * apply_at(0.0, v).norm();
        if (denom == 0.0)
            continue;
        out.max_ratio = std::max(out.max_ratio, (apply_at(t, v) - apply_at(s, v)).norm() / denom);
    }
    out.ok = out.max_ratio <= 1.05 * bounds_.lipschitz;
    if (!out.ok)
        std::clog << "warning: sampled Lipschitz ratio " << out.max_ratio
                  << " exceeds declared L = " << bounds_.lipschitz << '\n';
    return out;
}

TimeDependentOperatorModel nonautonomous_model(std::shared_ptr<const OperatorModel> base,
                                               Modulation modulation, Drift drift,
                                               double horizon,
                                               std::optional<DeclaredBounds> declared)
{
    if (!modulation.value)
        throw std::invalid_argument("nonautonomous_model: missing modulation");
    if (!(horizon > 0.0))
        throw std::invalid_argument("nonautonomous_model: horizon must be positive");
    constexpr int samples = 1024;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double a = modulation.value(horizon * i / samples);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (!(lo > 0.0))
        throw std::invalid_argument("nonautonomous_model: modulation must be positive on [0, T]");
    DeclaredBounds bounds{};
    if (declared) {
        bounds = *declared;
    } else {
        if (drift)
            throw std::invalid_argument(
                "nonautonomous_model: a drift term needs declared Lipschitz/equivalence bounds");
        bounds = {modulation.lipschitz / lo, hi / lo};
    }
    return TimeDependentOperatorModel(std::move(base), std::move(modulation), std::move(drift),
                                      horizon, bounds);
}

} // namespace dgt
