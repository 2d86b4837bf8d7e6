#pragma once

// Residual of the reconstruction, a posteriori bounds and maximal-regularity
// diagnostics.

#include "dgtime/dgsolve.hpp"
#include "dgtime/reconinterp.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace dgt {

/// R(t) = U_hat'(t) + A(t) U_hat(t) - f(t), slab by slab.
class Residual {
public:
    /// Throws std::invalid_argument when solution, reconstruction and
    /// problem live on different meshes or dimensions.
    Residual(const DGSolution& solution, const Reconstruction& recon, const ProblemSpec& problem);

    const TimeMesh& mesh() const { return hat_.mesh(); }
    const MeshFunction& reconstruction() const { return hat_; }
    const ProblemSpec& problem() const { return problem_; }

    Vector operator()(std::size_t n, double tau) const;
    SlabFunction as_slab_function() const;

    /// ||R||_{L^p(0, t_m)}; slab contributions are cached per exponent.
    double norm(const NormSpec& spec, std::size_t m, LpQuadrature quad = {}) const;
    /// All mesh-point prefixes of ||R||.
    const SlabNorms& slab_norms(const NormSpec& spec, LpQuadrature quad = {}) const;

private:
    MeshFunction hat_;
    ProblemSpec problem_;
    struct Cache {
        std::mutex mutex;
        std::map<std::tuple<double, int, int>, std::shared_ptr<const SlabNorms>> entries;
    };
    std::shared_ptr<Cache> cache_;
};

/// Manufactured exact solution u and its derivative u'.
struct ExactSolution {
    TimeFunction value;
    TimeFunction derivative;
};

struct AposterioriBounds {
    double residual = 0.0;     // ||R||
    double err_deriv = 0.0;    // ||(u - U_hat)'||
    double err_A = 0.0;        // ||A(.)(u - U_hat)||
    double error_sum = 0.0;    // err_deriv + err_A
    bool lower_ok = true;      // residual <= error_sum (1 + 1e-6)
    double upper_ratio = 1.0;  // error_sum / residual; 1 when both vanish
};

inline constexpr double lower_bound_tolerance = 1e-6;

/// Bounds on (0, t_m]. Throws std::out_of_range if m is not in 1..N.
AposterioriBounds aposteriori_bounds(const Residual& resid, const ExactSolution& truth,
                                     const NormSpec& spec, std::size_t m, LpQuadrature quad = {});
/// Bounds on every mesh-point prefix m = 1..N in one pass.
std::vector<AposterioriBounds> aposteriori_prefixes(const Residual& resid,
                                                    const ExactSolution& truth,
                                                    const NormSpec& spec, LpQuadrature quad = {});

/// Maximal-regularity quantities on each prefix (0, t_m], m = 1..N. For
/// time-dependent operators A is frozen at s = T.
struct MaxRegReport {
    std::vector<double> dk_hat;  // ||d_k U_hat||_{l^p}
    std::vector<double> d_hat;   // ||U_hat'||_{L^p}
    std::vector<double> a_hat;   // ||A U_hat||_{L^p}
    std::vector<double> a_u;     // ||A U||_{L^p}
    std::vector<double> f;       // ||f||_{L^p}
    std::vector<double> ratio;   // sum of the four l.h.s. terms / ||f||; NaN when 0/0

    std::size_t size() const { return f.size(); }
};

/// Throws PreconditionError unless u0 = 0.
MaxRegReport maxreg_report(const DGSolution& solution, const Reconstruction& recon,
                           const ProblemSpec& problem, const NormSpec& spec,
                           LpQuadrature quad = {});

/// ||d_k U_hat||_{l^p(0,t_m)} summed stage-major from the stage values:
/// sum_i k sum_n ||(U_{ni} - U_{n-1,i})/k||^p with U_{-1,i} = 0.
double stage_backward_difference_norm(const DGSolution& solution, const NormSpec& spec,
                                      std::size_t m);

/// Collocation defect max_{n,i} ||U_hat'(t_ni) + A U_hat(t_ni) - f_ni|| / scale,
/// scale = max(1, ||A U_hat(t_ni)||, ||f_ni||).
double collocation_defect(const DGSolution& solution, const Reconstruction& recon,
                          const ProblemSpec& problem);

/// CSV: t_m,resid,err_deriv,err_A,effectivity,maxreg_ratio (one row per prefix).
/// maxreg may be null, in which case the column is written as nan.
void write_report_csv(std::ostream& out, const TimeMesh& mesh,
                      const std::vector<AposterioriBounds>& bounds, const MaxRegReport* maxreg);

} // namespace dgt
