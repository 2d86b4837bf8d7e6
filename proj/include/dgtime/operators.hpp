#pragma once

// Finite-dimensional spatial operators A and A(t) with the solves the slab
// stepper needs.

#include "dgtime/polyquad.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace dgt {

/// LU factorization of a slab system
///   sum_j (mass_ij I + k stiffness_ij A) X_j = R_i,   i = 1..q,
/// with the stages stacked as [X_1; ...; X_q].
class BlockFactorization {
public:
    BlockFactorization(const Matrix& assembled, std::size_t stages, std::size_t dim);

    std::size_t stages() const { return stages_; }
    std::size_t dim() const { return dim_; }
    /// Reciprocal condition estimate of the assembled system.
    double rcond() const { return rcond_; }
    /// rhs and result are d x q (column i = stage i).
    Matrix solve(const Matrix& rhs) const;

private:
    Eigen::PartialPivLU<Matrix> lu_;
    std::size_t stages_;
    std::size_t dim_;
    double rcond_;
};

/// Assembles sum_j (mass_ij I + k stiffness_ij A) as a dense qd x qd matrix.
Matrix assemble_block(const Matrix& mass, const Matrix& stiffness, double k, const Matrix& a);

struct SpectralInfo {
    double min_real = 0.0; // smallest real part of the spectrum
    double max_abs = 0.0;  // spectral radius
};

/// Constant operator A on R^d, stored densely. Immutable; block
/// factorizations are cached per (k, mass, stiffness) behind a mutex.
class OperatorModel {
public:
    OperatorModel(Matrix a, std::string name);

    std::size_t dim() const { return static_cast<std::size_t>(a_.rows()); }
    const Matrix& matrix() const { return a_; }
    const std::string& name() const { return name_; }
    bool symmetric() const { return symmetric_; }
    const SpectralInfo& spectrum() const { return spectrum_; }

    Vector apply(const Vector& x) const { return a_ * x; }
    /// Solves (alpha I + beta A) x = rhs.
    Vector solve_shifted(double alpha, double beta, const Vector& rhs) const;
    std::shared_ptr<const BlockFactorization> factor_block(const Matrix& mass,
                                                           const Matrix& stiffness,
                                                           double k) const;

private:
    struct Cache;

    Matrix a_;
    std::string name_;
    bool symmetric_;
    SpectralInfo spectrum_;
    std::shared_ptr<Cache> cache_;
};

/// -nu * (second difference)/h^2, h = 1/(d+1), homogeneous Dirichlet.
OperatorModel laplacian_1d(std::size_t d, double diffusion);

/// Dirichlet Laplacian (nu = 1) plus (skew/h) times the upper shift.
/// Throws ModelRejected unless every eigenvalue has positive real part.
OperatorModel nonnormal_model(std::size_t d, double skew);

/// Dense text import: first token d, then d rows of d numbers. Lines
/// starting with '#' are ignored.
OperatorModel read_matrix(std::istream& in, std::string name);
OperatorModel read_matrix_file(const std::filesystem::path& path);

/// Scalar modulation a(t) with a declared Lipschitz constant.
struct Modulation {
    std::function<double(double)> value;
    double lipschitz = 0.0;
};

using Drift = std::function<Matrix(double)>;

/// Constants of the Lipschitz and norm-equivalence conditions on A(t).
struct DeclaredBounds {
    double lipschitz;
    double equivalence;
};

struct LipschitzCheck {
    double max_ratio = 0.0; // max ||(A(t)-A(s))v|| / (|t-s| ||A(0)v||)
    bool ok = true;         // max_ratio <= 1.05 L
};

/// A(t) = a(t) base + B(t) on [0, horizon].
class TimeDependentOperatorModel {
public:
    TimeDependentOperatorModel(std::shared_ptr<const OperatorModel> base, Modulation modulation,
                               Drift drift, double horizon, DeclaredBounds bounds);

    std::size_t dim() const { return base_->dim(); }
    double horizon() const { return horizon_; }
    const OperatorModel& base() const { return *base_; }
    double lipschitz_bound() const { return bounds_.lipschitz; }
    double equivalence_bound() const { return bounds_.equivalence; }
    double modulation(double t) const { return modulation_.value(t); }

    Matrix matrix_at(double t) const;
    Vector apply_at(double t, const Vector& x) const;

    /// Samples the Lipschitz condition on random probes; logs a warning to
    /// std::clog when the declared constant is exceeded by more than 5%.
    LipschitzCheck check_lipschitz(int probes, std::uint64_t seed) const;

private:
    std::shared_ptr<const OperatorModel> base_;
    Modulation modulation_;
    Drift drift_;
    double horizon_;
    DeclaredBounds bounds_;
};

/// Builds A(t) = a(t) base + B(t). Without a drift the bounds are derived
/// from the modulation: L = lip(a)/min a, c = max a/min a (extremes sampled
/// on [0, horizon]). A drift requires declared bounds. Throws
/// std::invalid_argument if a(t) <= 0 somewhere on the sample grid.
TimeDependentOperatorModel nonautonomous_model(std::shared_ptr<const OperatorModel> base,
                                               Modulation modulation, Drift drift,
                                               double horizon,
                                               std::optional<DeclaredBounds> declared = {});

} // namespace dgt
