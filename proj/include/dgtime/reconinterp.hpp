#pragma once

// The reconstruction w -> w_hat (interpolation at t_n and the Radau points
// of each slab) and the orthogonal interpolant u -> u_tilde.

#include "dgtime/timefun.hpp"

#include <memory>
#include <vector>

namespace dgt {

struct Reconstruction {
    MeshFunction hat;                           // degree q, continuous
    std::shared_ptr<const MeshFunction> source; // degree q-1
};

/// Per slab, the degree-q polynomial through (t_n, w_n) and (t_{ni}, w(t_{ni})),
/// i = 1..q, with w_0 := w0. Stored nodally over {0, c_1, ..., c_q}.
Reconstruction reconstruct(const MeshFunction& w, const Vector& w0);
/// Uses the value attached to w at t = 0.
Reconstruction reconstruct(const MeshFunction& w);

struct OrthoInterpolant {
    MeshFunction tilde;                  // degree q-1, nodal at the Radau points
    std::vector<Matrix> legendre_coeffs; // per slab d x (q-1): v_0..v_{q-2}
};

/// u_tilde(t_{n+1}) = u(t_{n+1}) and u - u_tilde orthogonal to P_{q-2} on
/// each slab, built as P_{q-2} u + L_{q-1} [u(t_{n+1}) - sum_i v_i].
/// Legendre coefficients use a G-point Gauss rule per slab (0 selects q+4).
/// u_at_zero is attached as the value at t = 0.
OrthoInterpolant ortho_interpolate(const SlabFunction& u, const Vector& u_at_zero,
                                   const TimeMesh& mesh, int q, int gauss_points = 0);
OrthoInterpolant ortho_interpolate(const TimeFunction& u, const TimeMesh& mesh, int q,
                                   int gauss_points = 0);

/// reconstruct(ortho_interpolate(u), u(0)).
MeshFunction hat_tilde(const SlabFunction& u, const Vector& u_at_zero, const TimeMesh& mesh,
                       int q, int gauss_points = 0);
MeshFunction hat_tilde(const TimeFunction& u, const TimeMesh& mesh, int q, int gauss_points = 0);

} // namespace dgt
