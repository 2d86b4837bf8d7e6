#include "dgtime/experiment.hpp"
#include "dgtime/reconinterp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dgt;

namespace {

MeshFunction random_stage_function(std::mt19937_64& gen, const TimeMesh& mesh, int q, int d, const Vector& at_zero)
{
    std::normal_distribution<double> normal;
    std::vector<Matrix> nodal(mesh.slabs(), Matrix(d, q));
    for (auto& m : nodal)
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = normal(gen);
    return MeshFunction(mesh, std::make_shared<const LagrangeBasis>(radau_tableau(q).stage_basis), nodal, at_zero,
                        Continuity::discontinuous);
}

// Continuous piecewise polynomial of degree deg (deg <= q) sampled on the
// extended node set {0, c_1..c_q}.
MeshFunction random_continuous(std::mt19937_64& gen, const TimeMesh& mesh, int q, int deg)
{
    std::normal_distribution<double> normal;
    const auto& basis = radau_tableau(q).extended_basis;
    std::vector<Matrix> nodal;
    double left = normal(gen);
    const double start = left;
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        // polynomial in tau with p(0) = left
        std::vector<double> coeff(deg + 1);
        coeff[0] = left;
        for (int j = 1; j <= deg; ++j)
            coeff[j] = normal(gen);
        Matrix m(1, q + 1);
        for (int j = 0; j <= q; ++j) {
            double s = 0.0;
            for (int i = deg; i >= 0; --i)
                s = s * basis.nodes()[j] + coeff[i];
            m(0, j) = s;
        }
        left = m(0, q);
        nodal.push_back(m);
    }
    return MeshFunction(mesh, std::make_shared<const LagrangeBasis>(basis), nodal, Vector::Constant(1, start),
                        Continuity::continuous);
}

double max_difference(const MeshFunction& a, const MeshFunction& b)
{
    double worst = 0.0;
    for (std::size_t n = 0; n < a.mesh().slabs(); ++n)
        for (double tau : {0.0, 0.11, 0.5, 0.83, 1.0})
            worst = std::max(worst, (a.evaluate(n, tau) - b.evaluate(n, tau)).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace

TEST(Reconstruct, InterpolationConditionsAndContinuity)
{
    std::mt19937_64 gen(1);
    for (int q = 1; q <= 4; ++q) {
        const TimeMesh mesh(1.3, 6);
        const Vector w0{{0.4, -2.0}};
        const auto w = random_stage_function(gen, mesh, q, 2, w0);
        const auto rec = reconstruct(w);
        const auto& hat = rec.hat;
        EXPECT_EQ(hat.degree(), q);
        EXPECT_EQ(hat.continuity(), Continuity::continuous);
        const auto& c = radau_tableau(q).c;
        for (std::size_t n = 0; n < mesh.slabs(); ++n) {
            EXPECT_LE((hat.evaluate(n, 0.0) - w.left_limit(n)).norm(), 1e-12);
            for (int i = 0; i < q; ++i)
                EXPECT_LE((hat.evaluate(n, c[i]) - w.evaluate(n, c[i])).norm(), 1e-12);
            if (n > 0)
                EXPECT_LE((hat.left_limit(n) - hat.right_limit(n)).norm(), 1e-12);
        }
        EXPECT_EQ(rec.source->nodal(0), w.nodal(0));
    }
}

TEST(Reconstruct, DegreeZeroGivesPiecewiseLinearInterpolant)
{
    std::mt19937_64 gen(2);
    const TimeMesh mesh(1.0, 5);
    const auto w = random_stage_function(gen, mesh, 1, 1, Vector::Constant(1, 0.3));
    const auto hat = reconstruct(w).hat;
    for (std::size_t n = 0; n < mesh.slabs(); ++n) {
        const double a = w.left_limit(n)[0], b = w.evaluate(n, 1.0)[0];
        EXPECT_NEAR(hat.evaluate(n, 0.25)[0], 0.75 * a + 0.25 * b, 1e-14);
    }
}

TEST(Reconstruct, ContinuousLowDegreeInputIsUnchanged)
{
    const TimeMesh mesh(2.0, 4);
    const auto& c = radau_tableau(3).c;
    std::vector<Matrix> nodal(4, Matrix(1, 3));
    auto g = [](double t) { return 1.0 - t + 0.25 * t * t; };
    for (std::size_t n = 0; n < 4; ++n)
        for (int i = 0; i < 3; ++i)
            nodal[n](0, i) = g(mesh.time(n, c[i]));
    const MeshFunction w(mesh, std::make_shared<const LagrangeBasis>(radau_tableau(3).stage_basis), nodal,
                         Vector::Constant(1, g(0.0)), Continuity::discontinuous);
    EXPECT_LE(max_difference(reconstruct(w).hat, w), 1e-12);
}

TEST(Reconstruct, CommutesWithBackwardDifference)
{
    std::mt19937_64 gen(3);
    for (int q = 1; q <= 3; ++q) {
        const TimeMesh mesh(1.0, 7);
        const auto w = random_stage_function(gen, mesh, q, 2, Vector::Zero(2));
        const auto lhs = reconstruct(backward_difference(w)).hat;
        const auto rhs = backward_difference(reconstruct(w).hat);
        EXPECT_LE(max_difference(lhs, rhs), 1e-11 * 7.0) << q;
    }
}

TEST(OrthoInterpolant, DegreeZeroTakesRightEndpointValues)
{
    const TimeMesh mesh(1.0, 4);
    const TimeFunction u = [](double t) { return Vector::Constant(1, std::exp(t)); };
    const auto tilde = ortho_interpolate(u, mesh, 1).tilde;
    for (std::size_t n = 0; n < 4; ++n)
        EXPECT_NEAR(tilde.evaluate(n, 0.3)[0], std::exp(mesh.point(n + 1)), 1e-14);
}

TEST(OrthoInterpolant, EndpointAndOrthogonalityConditions)
{
    const TimeMesh mesh(1.0, 3);
    const TimeFunction u = [](double t) { return smooth_test_value(t); };
    const auto& rule = gauss_rule(30);
    for (int q = 1; q <= 4; ++q) {
        const auto tilde = ortho_interpolate(u, mesh, q).tilde;
        for (std::size_t n = 0; n < mesh.slabs(); ++n) {
            EXPECT_LE((tilde.evaluate(n, 1.0) - u(mesh.point(n + 1))).norm(), 1e-12);
            for (int j = 0; j <= q - 2; ++j) {
                const Vector ip = rule.integrate([&](double s) {
                    const double t = mesh.time(n, s);
                    return Vector((u(t) - tilde.evaluate(n, s)) * std::pow(t, j));
                });
                EXPECT_LE(ip.norm(), 1e-10) << q << ' ' << n << ' ' << j;
            }
        }
    }
}

TEST(OrthoInterpolant, PiecewisePolynomialsOfDegreeQMinusOneAreFixed)
{
    const TimeMesh mesh(1.0, 5);
    const TimeFunction u = [](double t) { return Vector{{t * t - 1.0, 3.0 * t}}; };
    const auto tilde = ortho_interpolate(u, mesh, 3).tilde;
    for (std::size_t n = 0; n < mesh.slabs(); ++n)
        for (double tau : {0.1, 0.6})
            EXPECT_LE((tilde.evaluate(n, tau) - u(mesh.time(n, tau))).norm(), 1e-13);
}

TEST(OrthoInterpolant, MatchesLinearSystemOracle)
{
    // u = t^q on (0,1]: solve for p in P_{q-1} with p(1) = 1 and
    // int_0^1 (t^q - p) t^j = 0, j <= q-2, in the monomial basis.
    const TimeMesh one(1.0, 1);
    for (int q = 1; q <= 5; ++q) {
        Matrix sys(q, q);
        Vector rhs(q);
        for (int m = 0; m < q; ++m)
            sys(0, m) = 1.0;
        rhs[0] = 1.0;
        for (int j = 0; j <= q - 2; ++j) {
            for (int m = 0; m < q; ++m)
                sys(j + 1, m) = 1.0 / (m + j + 1);
            rhs[j + 1] = 1.0 / (q + j + 1);
        }
        const Vector coeff = sys.fullPivLu().solve(rhs);
        const TimeFunction u = [q](double t) { return Vector::Constant(1, std::pow(t, q)); };
        const auto tilde = ortho_interpolate(u, one, q).tilde;
        double sup_diff = 0.0, sup_err = 0.0, sup_err_oracle = 0.0;
        for (int s = 0; s <= 200; ++s) {
            const double t = s / 200.0;
            double p = 0.0;
            for (int m = q - 1; m >= 0; --m)
                p = p * t + coeff[m];
            sup_diff = std::max(sup_diff, std::abs(p - tilde.evaluate(0, t)[0]));
            sup_err = std::max(sup_err, std::abs(std::pow(t, q) - tilde.evaluate(0, t)[0]));
            sup_err_oracle = std::max(sup_err_oracle, std::abs(std::pow(t, q) - p));
        }
        EXPECT_LE(sup_diff, 1e-11) << q;
        EXPECT_NEAR(sup_err, sup_err_oracle, 1e-11) << q;
    }
}

TEST(OrthoInterpolant, JumpOrthogonalityIdentity)
{
    // int_{J_n} <rho', v> + <rho_n^+ - rho_n, v_n^+> = 0 for v of degree <= q-1
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> uni(0.3, 2.0);
    const TimeFunction u = [](double t) { return smooth_test_value(t); };
    const TimeFunction du = [](double t) { return smooth_test_value(t, 1); };
    const auto& rule = gauss_rule(30);
    for (int q = 1; q <= 4; ++q) {
        const TimeMesh mesh(uni(gen), 4);
        const auto tilde = ortho_interpolate(u, mesh, q).tilde;
        const LegendreBasis leg(q - 1);
        for (std::size_t n = 0; n < mesh.slabs(); ++n) {
            const Vector rho_n = u(mesh.point(n)) - tilde.left_limit(n);
            const Vector rho_plus = u(mesh.point(n)) - tilde.right_limit(n);
            for (int j = 0; j < q; ++j) {
                const double vplus = leg.value(j, 0.0);
                const Vector integral = rule.integrate([&](double s) {
                    const double t = mesh.time(n, s);
                    return Vector((du(t) - tilde.derivative(n, s)) * leg.value(j, s));
                }) * mesh.step();
                EXPECT_LE((integral + (rho_plus - rho_n) * vplus).norm(), 1e-10) << q << ' ' << n << ' ' << j;
            }
        }
    }
}

TEST(HatTilde, ReproducesContinuousPiecewisePolynomials)
{
    std::mt19937_64 gen(5);
    for (int q = 1; q <= 4; ++q) {
        for (int trial = 0; trial < 20; ++trial) {
            const TimeMesh mesh(1.0 + trial * 0.05, 3 + trial % 5);
            const auto v = random_continuous(gen, mesh, q, q);
            const auto rebuilt = hat_tilde(v.values(), v.left_value_at_zero(), mesh, q);
            EXPECT_LE(max_difference(rebuilt, v), 1e-11) << q;
            if (q > 1) {
                const auto low = random_continuous(gen, mesh, q, q - 1);
                const auto tilde = ortho_interpolate(low.values(), low.left_value_at_zero(), mesh, q).tilde;
                EXPECT_LE(max_difference(tilde, low), 1e-11);
                EXPECT_LE(max_difference(hat_tilde(low.values(), low.left_value_at_zero(), mesh, q), low), 1e-11);
            }
        }
    }
}

TEST(HatTilde, ConvergesAtOrderQPlusOneForPowerFunction)
{
    for (int q = 1; q <= 3; ++q) {
        const TimeFunction v = [q](double t) { return Vector::Constant(1, std::pow(t, q + 1)); };
        std::vector<std::pair<double, double>> errors;
        for (std::size_t n : {4, 8, 16, 32, 64}) {
            const TimeMesh mesh(1.0, n);
            const auto h = hat_tilde(v, mesh, q);
            errors.emplace_back(mesh.step(),
                                lp_norm([&](std::size_t s, double tau) { return Vector(v(mesh.time(s, tau)) - h.evaluate(s, tau)); },
                                        mesh, NormSpec{2.0, {}}));
        }
        EXPECT_GE(fit_rate(errors), q + 1 - 0.15) << q;
    }
}
