#include "dgtime/reconinterp.hpp"

#include <stdexcept>

namespace dgt {

Reconstruction reconstruct(const MeshFunction& w, const Vector& w0)
{
    const int q = w.degree() + 1;
    const auto& tableau = radau_tableau(q);
    if (static_cast<std::size_t>(w0.size()) != w.dim())
        throw std::invalid_argument("reconstruct: w0 dimension mismatch");
    const auto d = static_cast<Eigen::Index>(w.dim());
    std::vector<Matrix> nodal(w.mesh().slabs(), Matrix(d, q + 1));
    for (std::size_t n = 0; n < nodal.size(); ++n) {
        nodal[n].col(0) = n == 0 ? w0 : Vector(w.evaluate(n - 1, 1.0));
        for (int i = 0; i < q; ++i)
            nodal[n].col(i + 1) = w.evaluate(n, tableau.c[i]);
    }
    MeshFunction hat(w.mesh(), std::make_shared<const LagrangeBasis>(tableau.extended_basis),
                     std::move(nodal), w0, Continuity::continuous);
    return Reconstruction{std::move(hat), std::make_shared<const MeshFunction>(w)};
}

Reconstruction reconstruct(const MeshFunction& w) { return reconstruct(w, w.left_value_at_zero()); }

OrthoInterpolant ortho_interpolate(const SlabFunction& u, const Vector& u_at_zero,
                                   const TimeMesh& mesh, int q, int gauss_points)
{
    const auto& tableau = radau_tableau(q);
    const auto& rule = gauss_rule(gauss_points > 0 ? gauss_points : q + 4);
    const LegendreBasis legendre(q - 1);
    const auto d = u_at_zero.size();

    // Legendre values at the quadrature points and at the Radau nodes.
    std::vector<std::vector<double>> at_quad(static_cast<std::size_t>(rule.size()),
                                             std::vector<double>(q));
    for (int g = 0; g < rule.size(); ++g)
        legendre.values(rule.nodes()[g], at_quad[g]);
    std::vector<std::vector<double>> at_nodes(static_cast<std::size_t>(q), std::vector<double>(q));
    for (int j = 0; j < q; ++j)
        legendre.values(tableau.c[j], at_nodes[j]);

    std::vector<Matrix> nodal(mesh.slabs());
    std::vector<Matrix> coeffs(mesh.slabs());
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        Matrix v = Matrix::Zero(d, q - 1);
        for (int g = 0; g < rule.size() && q > 1; ++g) {
            const Vector ug = u(n, rule.nodes()[g]);
            for (int i = 0; i < q - 1; ++i)
                v.col(i) += (rule.weights()[g] * at_quad[g][i]) * ug;
        }
        for (int i = 0; i < q - 1; ++i)
            v.col(i) /= LegendreBasis::squared_norm(i);
        const Vector top = u(n, 1.0) - v.rowwise().sum();

        Matrix values(d, q);
        for (int j = 0; j < q; ++j) {
            Vector x = at_nodes[j][q - 1] * top;
            for (int i = 0; i < q - 1; ++i)
                x += at_nodes[j][i] * v.col(i);
            values.col(j) = x;
        }
        nodal[n] = std::move(values);
        coeffs[n] = std::move(v);
    }
    MeshFunction tilde(mesh, std::make_shared<const LagrangeBasis>(tableau.stage_basis),
                       std::move(nodal), u_at_zero, Continuity::discontinuous);
    return OrthoInterpolant{std::move(tilde), std::move(coeffs)};
}

OrthoInterpolant ortho_interpolate(const TimeFunction& u, const TimeMesh& mesh, int q,
                                   int gauss_points)
{
    return ortho_interpolate(on_slabs(mesh, u), u(0.0), mesh, q, gauss_points);
}

MeshFunction hat_tilde(const SlabFunction& u, const Vector& u_at_zero, const TimeMesh& mesh, int q,
                       int gauss_points)
{
    return reconstruct(ortho_interpolate(u, u_at_zero, mesh, q, gauss_points).tilde, u_at_zero).hat;
}

MeshFunction hat_tilde(const TimeFunction& u, const TimeMesh& mesh, int q, int gauss_points)
{
    return hat_tilde(on_slabs(mesh, u), u(0.0), mesh, q, gauss_points);
}

} // namespace dgt
