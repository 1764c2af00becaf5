#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "orbmin/celestial.hpp"
#include "orbmin/smallmat.hpp"

using namespace orbmin;

namespace {

Mat random_mat(std::mt19937_64& rng, std::size_t n, double shift = 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng) + (i == j ? shift : 0.0);
    return m;
}

Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

} // namespace

TEST(Det, SmallCases) {
    EXPECT_EQ(det(Mat::identity(2)), 1.0);
    EXPECT_EQ(det(Mat::diag({2.0, 3.0})), 6.0);
    EXPECT_EQ(det(Mat::from_rows({{0, 1}, {1, 0}})), -1.0);
    EXPECT_EQ(det(Mat::identity(0)), 1.0);
}

TEST(Det, MatchesEigenOnRandomMatrices) {
    std::mt19937_64 rng(7);
    for (std::size_t n = 1; n <= 8; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const Mat m = random_mat(rng, n);
            const double ref = to_eigen(m).determinant();
            EXPECT_NEAR(det(m), ref, 1e-12 * (1.0 + std::abs(ref))) << "n=" << n;
        }
    }
}

TEST(Det, Multiplicative) {
    std::mt19937_64 rng(11);
    for (std::size_t n = 2; n <= 6; ++n) {
        for (int rep = 0; rep < 50; ++rep) {
            const Mat a = random_mat(rng, n, 2.0), b = random_mat(rng, n, 2.0);
            const double lhs = det(a * b), rhs = det(a) * det(b);
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(rhs) + 1e-14);
        }
    }
}

TEST(Solve, IdentityAndDiagonal) {
    const Mat m = Mat::from_rows({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(solve(Mat::identity(2), m).x, m);
    const Mat inv = solve(Mat::diag({2.0, 2.0}), Mat::identity(2)).x;
    EXPECT_EQ(inv, Mat::diag({0.5, 0.5}));
}

TEST(Solve, SingularThrows) {
    try {
        solve(Mat::from_rows({{1, 1}, {1, 1}}), Mat::identity(2));
        FAIL() << "expected Singular";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Singular);
    }
}

TEST(Solve, ShapeMismatchIsInvalidArgument) {
    try {
        solve(Mat::identity(2), Mat::identity(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

TEST(Solve, ResidualBoundForModerateCondition) {
    std::mt19937_64 rng(3);
    for (std::size_t n = 2; n <= 6; ++n) {
        for (int rep = 0; rep < 50; ++rep) {
            const Mat m = random_mat(rng, n), rhs = random_mat(rng, n);
            const SolveResult r = solve(m, rhs);
            if (r.condition >= 1e8) continue;
            EXPECT_LE((m * r.x - rhs).max_norm(), 1e-10 * rhs.max_norm());
        }
    }
}

TEST(Solve, ConditionEstimateTracksEigen) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const Mat m = random_mat(rng, 4, 0.5);
        const Eigen::MatrixXd e = to_eigen(m);
        auto one_norm = [](const Eigen::MatrixXd& x) { return x.cwiseAbs().colwise().sum().maxCoeff(); };
        const double ref = one_norm(e) * one_norm(e.inverse());
        EXPECT_NEAR(solve(m, Mat::identity(4)).condition, ref, 1e-8 * ref);
    }
}

TEST(Construction, RejectsNonFinite) {
    const double bad[] = {1.0, std::numeric_limits<double>::quiet_NaN()};
    EXPECT_THROW(Mat::from_row_major(1, 2, bad), Error);
    EXPECT_THROW(Mat::from_rows({{1.0, std::numeric_limits<double>::infinity()}}), Error);
    EXPECT_THROW(Mat::from_rows({{1.0, 2.0}, {3.0}}), Error);
}

TEST(Definiteness, SpecCases) {
    EXPECT_EQ(is_positive_definite(Mat::identity(2), 1e-10), Definiteness::Positive);
    EXPECT_EQ(is_positive_definite(Mat::diag({1.0, -1.0}), 1e-10), Definiteness::Indefinite);
    EXPECT_EQ(is_positive_definite(Mat(3, 3), 1e-10), Definiteness::Semidefinite);
    EXPECT_EQ(is_positive_definite(Mat::diag({1.0, 0.0}), 1e-10), Definiteness::Semidefinite);
}

TEST(Definiteness, RejectsAsymmetric) {
    try {
        is_positive_definite(Mat::from_rows({{1, 1}, {0, 1}}), 1e-10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotSymmetric);
    }
    // Drift within the relative tolerance is accepted.
    EXPECT_EQ(is_positive_definite(Mat::from_rows({{1, 1e-12}, {0, 1}}), 1e-10), Definiteness::Positive);
}

TEST(Definiteness, AgreesWithRandomQuadraticProbe) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 40; ++rep) {
        const Mat a = random_mat(rng, 5);
        // Alternate between clearly definite and clearly indefinite instances.
        const Mat m = rep % 2 ? (a.transpose() * a + 0.1 * Mat::identity(5)).symmetrized() : a.symmetrized();
        const Definiteness d = is_positive_definite(m, 1e-10);
        bool all_positive = true;
        for (int k = 0; k < 1000; ++k) {
            Vec v(5);
            for (double& x : v) x = g(rng);
            const double nv = norm2(v);
            for (double& x : v) x /= nv;
            if (dot(v, m * v) <= 0) all_positive = false;
        }
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(m)).eigenvalues().minCoeff();
        if (d == Definiteness::Positive) {
            EXPECT_TRUE(all_positive);
            EXPECT_GT(min_eig, 0.0);
        } else {
            EXPECT_EQ(d, Definiteness::Indefinite);
            EXPECT_LT(min_eig, 0.0);
        }
    }
}

TEST(EigenDecomposition, MatchesReferenceSolver) {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 7; ++n) {
        const Mat m = random_mat(rng, n).symmetrized();
        const SymmetricEigen e = symmetric_eigen(m);
        const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(m)).eigenvalues();
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(e.values[k], ref(static_cast<Eigen::Index>(k)), 1e-12);
            const Vec v = e.vectors.col(k);
            const Vec mv = m * v;
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(mv[i], e.values[k] * v[i], 1e-11);
        }
        EXPECT_LT(orthogonality_defect(e.vectors), 1e-12);
    }
}

TEST(Orthogonality, Cases) {
    EXPECT_EQ(orthogonality_defect(Mat::identity(4)), 0.0);
    EXPECT_EQ(orthogonality_defect(Mat::diag({2.0, 1.0})), 3.0);
    EXPECT_EQ(orthogonality_defect(figure_eight_symmetry()), 0.0);
    // S^6 = I for the figure-eight symmetry.
    Mat p = Mat::identity(6);
    for (int i = 0; i < 6; ++i) p = p * figure_eight_symmetry();
    EXPECT_EQ(p, Mat::identity(6));
}

TEST(Cholesky, PositiveAndFailure) {
    const Mat m = Mat::from_rows({{4, 2}, {2, 3}});
    const auto L = cholesky(m);
    ASSERT_TRUE(L.has_value());
    EXPECT_LT((*L * L->transpose() - m).max_norm(), 1e-14);
    EXPECT_FALSE(cholesky(Mat::diag({1.0, -1.0})).has_value());
}

TEST(Complement, SpansOrthogonalDirections) {
    const Mat c = orthogonal_complement(3, {{1.0, 1.0, 0.0}, {2.0, 2.0, 0.0}});
    ASSERT_EQ(c.cols(), 2u);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(c(0, j) + c(1, j), 0.0, 1e-14);
    EXPECT_LT((c.transpose() * c - Mat::identity(2)).max_norm(), 1e-14);
}

TEST(NullDirection, FindsKernel) {
    const Vec v = null_direction(Mat::from_rows({{1, 2}, {2, 4}}));
    EXPECT_NEAR(norm2(v), 1.0, 1e-14);
    EXPECT_NEAR(v[0] + 2 * v[1], 0.0, 1e-12);
}
