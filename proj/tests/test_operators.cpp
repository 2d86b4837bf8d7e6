#include "dgtime/dgsolve.hpp"
#include "dgtime/errors.hpp"
#include "dgtime/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

using namespace dgt;

namespace {

Vector random_vector(std::mt19937_64& gen, Eigen::Index d)
{
    std::normal_distribution<double> normal;
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i)
        v[i] = normal(gen);
    return v;
}

} // namespace

TEST(Laplacian, SinglePoint)
{
    const auto a = laplacian_1d(1, 1.0);
    ASSERT_EQ(a.dim(), 1u);
    EXPECT_DOUBLE_EQ(a.matrix()(0, 0), 8.0);
}

TEST(Laplacian, KnownEigenvalues)
{
    const auto a = laplacian_1d(3, 1.0);
    EXPECT_TRUE(a.symmetric());
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
    const double h = 0.25;
    for (int j = 1; j <= 3; ++j) {
        const double expected = 4.0 * std::pow(std::sin(j * std::numbers::pi / 8.0), 2) / (h * h);
        EXPECT_NEAR(es.eigenvalues()[j - 1], expected, 1e-12);
    }
    EXPECT_NEAR(a.spectrum().min_real, es.eigenvalues()[0], 1e-11);
    EXPECT_NEAR(a.spectrum().max_abs, es.eigenvalues()[2], 1e-11);
    EXPECT_DOUBLE_EQ(laplacian_1d(3, 2.5).matrix()(1, 1), 2.5 * 32.0);
}

TEST(NonnormalModel, TwoByTwoEigenvaluesFromQuadraticFormula)
{
    const auto a = nonnormal_model(2, 1.0);
    EXPECT_FALSE(a.symmetric());
    const Matrix& m = a.matrix();
    EXPECT_NE(m(0, 1), m(1, 0));
    const double tr = m.trace(), det = m.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
    const auto l1 = (tr - disc) / 2.0, l2 = (tr + disc) / 2.0;
    EXPECT_GT(l1.real(), 0.0);
    EXPECT_GT(l2.real(), 0.0);
    EXPECT_NEAR(a.spectrum().min_real, std::min(l1.real(), l2.real()), 1e-10);
    EXPECT_NEAR(a.spectrum().max_abs, std::max(std::abs(l1), std::abs(l2)), 1e-10);
}

TEST(NonnormalModel, ZeroSkewIsTheLaplacian)
{
    EXPECT_EQ(nonnormal_model(5, 0.0).matrix(), laplacian_1d(5, 1.0).matrix());
}

TEST(NonnormalModel, RejectsSpectrumOutsideRightHalfPlane)
{
    // off-diagonal product 25 * 275 gives real eigenvalues down to about -84
    EXPECT_THROW(nonnormal_model(4, -50.0), ModelRejected);
}

TEST(OperatorModel, ShiftedSolveConsistentWithApply)
{
    std::mt19937_64 gen(11);
    for (const auto& a : {laplacian_1d(6, 1.0), nonnormal_model(6, 0.7)}) {
        const Vector r = random_vector(gen, 6);
        EXPECT_TRUE(a.solve_shifted(1.0, 0.0, r).isApprox(r, 1e-15));
        for (double beta : {0.01, 0.3}) {
            const Vector x = a.solve_shifted(1.0, beta, r);
            EXPECT_LE((x + beta * a.apply(x) - r).norm(), 1e-12 * r.norm());
        }
    }
}

TEST(OperatorModel, BlockSolveResidualIsSmall)
{
    std::mt19937_64 gen(5);
    const auto a = nonnormal_model(7, 0.4);
    for (int q = 1; q <= 4; ++q) {
        const auto gm = galerkin_matrices(radau_tableau(q));
        const double k = 0.013 * q;
        const auto fac = a.factor_block(gm.time_mass, gm.time_gram, k);
        Matrix rhs(7, q);
        for (int i = 0; i < q; ++i)
            rhs.col(i) = random_vector(gen, 7);
        const Matrix x = fac->solve(rhs);
        // sum_j (M_ij I + k G_ij A) x_j = rhs_i
        Matrix back = Matrix::Zero(7, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                back.col(i) += gm.time_mass(i, j) * x.col(j) + k * gm.time_gram(i, j) * (a.matrix() * x.col(j));
        EXPECT_LE((back - rhs).norm(), 1e-10 * rhs.norm()) << q;
        EXPECT_EQ(fac.get(), a.factor_block(gm.time_mass, gm.time_gram, k).get()) << "cached";
    }
}

TEST(MatrixFile, ParsesAndRejectsMalformedInput)
{
    std::istringstream good("# a comment\n2\n1 2\n3 4\n");
    const auto a = read_matrix(good, "file");
    EXPECT_EQ(a.matrix(), (Matrix{{1, 2}, {3, 4}}));
    std::istringstream short_input("2\n1 2 3\n");
    EXPECT_THROW(read_matrix(short_input, "file"), std::exception);
    std::istringstream trailing("1\n5 6\n");
    EXPECT_THROW(read_matrix(trailing, "file"), std::exception);
    EXPECT_THROW(read_matrix_file("/nonexistent/matrix.txt"), std::exception);
}

TEST(TimeDependentModel, ConstantModulationReducesToBase)
{
    auto base = std::make_shared<const OperatorModel>(laplacian_1d(4, 1.0));
    const auto m = nonautonomous_model(base, Modulation{[](double) { return 1.0; }, 0.0}, nullptr, 1.0);
    const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
    for (double t : {0.0, 0.4, 1.0})
        EXPECT_EQ(m.apply_at(t, x), base->apply(x));
    EXPECT_EQ(m.lipschitz_bound(), 0.0);
    EXPECT_EQ(m.equivalence_bound(), 1.0);
}

TEST(TimeDependentModel, LinearModulationBounds)
{
    auto base = std::make_shared<const OperatorModel>(laplacian_1d(5, 1.0));
    const auto m =
        nonautonomous_model(base, Modulation{[](double t) { return 1.0 + 0.5 * t; }, 0.5}, nullptr, 1.0);
    EXPECT_NEAR(m.lipschitz_bound(), 0.5, 1e-12);
    EXPECT_NEAR(m.equivalence_bound(), 1.5, 1e-12);
    const Vector v = Vector::Ones(5);
    const double t = 0.9, s = 0.1;
    EXPECT_NEAR((m.apply_at(t, v) - m.apply_at(s, v)).norm(), std::abs(t - s) / 2.0 * base->apply(v).norm(), 1e-11);
    const auto check = m.check_lipschitz(64, 7);
    EXPECT_TRUE(check.ok);
    EXPECT_LE(check.max_ratio, 0.5 + 1e-12);
}

TEST(TimeDependentModel, RejectsNonpositiveModulationAndUndeclaredDrift)
{
    auto base = std::make_shared<const OperatorModel>(laplacian_1d(3, 1.0));
    EXPECT_THROW(nonautonomous_model(base, Modulation{[](double t) { return 1.0 - 2.0 * t; }, 2.0}, nullptr, 1.0),
                 std::invalid_argument);
    const Drift drift = [](double t) { return Matrix(t * Matrix::Identity(3, 3)); };
    EXPECT_THROW(nonautonomous_model(base, Modulation{[](double) { return 1.0; }, 0.0}, drift, 1.0),
                 std::invalid_argument);
    EXPECT_NO_THROW(nonautonomous_model(base, Modulation{[](double) { return 1.0; }, 0.0}, drift, 1.0,
                                        DeclaredBounds{1.0, 2.0}));
}
