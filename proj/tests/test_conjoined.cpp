#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "orbmin/celestial.hpp"
#include "orbmin/conjoined.hpp"

using namespace orbmin;

namespace {

constexpr double kPi = std::numbers::pi;

SecondVariation oscillator(std::size_t n) {
    return SecondVariation::constant(-Mat::identity(n), Mat(n, n), Mat::identity(n), 2 * kPi);
}

SecondVariation free_sv(std::size_t n) {
    return SecondVariation::constant(Mat(n, n), Mat(n, n), Mat::identity(n), 2 * kPi);
}

SecondVariation kepler_sv(double alpha, int k = 1) {
    return second_variation(circular_orbit(alpha, 2 * kPi * k, k));
}

Mat random_mat(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

/// Smooth random periodic coefficients with R positive definite.
SecondVariation random_sv(std::mt19937_64& rng, std::size_t n) {
    const Mat P0 = random_mat(rng, n).symmetrized(), P1 = random_mat(rng, n).symmetrized();
    const Mat Q0 = random_mat(rng, n), Q1 = random_mat(rng, n);
    const Mat L = random_mat(rng, n);
    const Mat R0 = L * L.transpose() + Mat::identity(n), R1 = 0.3 * random_mat(rng, n).symmetrized();
    return SecondVariation(
        n, 2 * kPi, [=](double t) { return P0 + std::cos(t) * P1; }, [=](double t) { return Q0 + std::sin(2 * t) * Q1; },
        [=](double t) { return R0 + (0.2 * std::cos(t)) * R1; }, false);
}

} // namespace

TEST(Basis, FreeParticleClosedForm) {
    const ConjoinedBasis b = principal_basis(free_sv(2), 2 * kPi);
    for (double t : {0.5, 2.0, 6.0}) {
        EXPECT_LT((b.Y(t) - t * Mat::identity(2)).max_norm(), 1e-10);
        EXPECT_LT((b.Z(t) - Mat::identity(2)).max_norm(), 1e-12);
    }
}

TEST(Basis, OscillatorClosedForm) {
    const ConjoinedBasis b = principal_basis(oscillator(2), 2 * kPi);
    for (double t : {0.5, 2.0, 4.0, 6.0}) {
        EXPECT_LT((b.Y(t) - std::sin(t) * Mat::identity(2)).max_norm(), 1e-9);
        EXPECT_LT((b.Z(t) - std::cos(t) * Mat::identity(2)).max_norm(), 1e-9);
    }
}

TEST(Basis, KeplerUnitExponentDegeneratesAtPeriod) {
    const ConjoinedBasis b = principal_basis(kepler_sv(1.0), 2 * kPi);
    const ConjugateReport r = conjugate_points(b);
    EXPECT_LT(std::abs(b.det_Y(2 * kPi)), 1e-6 * r.det_max);
    EXPECT_TRUE(r.endpoint_degenerate);
    EXPECT_TRUE(r.condition_J());
    EXPECT_FALSE(r.condition_J_strict());
}

TEST(Basis, WronskianConstantForRandomCoefficients) {
    std::mt19937_64 rng(41);
    for (std::size_t n : {1u, 2u, 3u, 4u}) {
        const SecondVariation sv = random_sv(rng, n);
        // Self-conjoined data: Z0 = Y0^-T S with S symmetric.
        const Mat Y0 = random_mat(rng, n) + 2.0 * Mat::identity(n);
        const Mat S = random_mat(rng, n).symmetrized();
        const Mat Z0 = inverse(Y0.transpose()) * S;
        const ConjoinedBasis b = integrate_basis(sv, Y0, Z0, 2 * kPi);
        EXPECT_LT(b.wronskian_drift(), 1e-8 * std::max(1.0, b.max_abs_Z())) << "n=" << n;
        const Mat Y = b.Y(2 * kPi), Z = b.Z(2 * kPi);
        EXPECT_LT((Y.transpose() * Z - Z.transpose() * Y).max_norm(), 1e-8 * std::max(1.0, b.max_abs_Z()));
        // Arbitrary data keeps its (nonzero) Wronskian.
        const ConjoinedBasis c = integrate_basis(sv, random_mat(rng, n), random_mat(rng, n), 2 * kPi);
        EXPECT_LT(c.wronskian_drift(), 1e-8 * std::max(1.0, c.max_abs_Z()));
    }
}

TEST(Basis, EpsilonShiftedDataIsSelfConjoined) {
    const double eps = 1e-3;
    const Mat Y0 = -eps * Mat::identity(2), Z0 = Mat::identity(2);
    EXPECT_EQ(Y0.transpose() * Z0 - Z0.transpose() * Y0, Mat(2, 2));
    const ConjoinedBasis b = integrate_basis(kepler_sv(1.2), Y0, Z0, 2 * kPi);
    const Mat Y = b.Y(3.0), Z = b.Z(3.0);
    EXPECT_LT((Y.transpose() * Z - Z.transpose() * Y).max_norm(), 1e-8);
}

TEST(Conjugate, KeplerFirstWinding) {
    for (double a : {0.2, 0.4, 0.6, 0.8}) {
        const ConjugateReport r = conjugate_points(principal_basis(kepler_sv(a), 2 * kPi));
        EXPECT_TRUE(r.interior_sign_change()) << "alpha " << a;
        EXPECT_FALSE(r.condition_J());
    }
    for (double a : {1.2, 1.4, 1.6}) {
        const ConjugateReport r = conjugate_points(principal_basis(kepler_sv(a), 2 * kPi));
        EXPECT_TRUE(r.zeros.empty()) << "alpha " << a;
        EXPECT_TRUE(r.condition_J_strict());
        EXPECT_EQ(r.sign, SignSummary::Positive);
    }
}

TEST(Conjugate, KeplerSecondWinding) {
    for (double a : {1.2, 1.3, 1.4, 1.5, 1.6, 1.7}) {
        const ConjugateReport r = conjugate_points(principal_basis(kepler_sv(a, 2), 4 * kPi));
        EXPECT_FALSE(r.interior().empty()) << "alpha " << a;
    }
    const ConjugateReport r = conjugate_points(principal_basis(kepler_sv(1.8, 2), 4 * kPi));
    EXPECT_TRUE(r.zeros.empty());
}

TEST(Conjugate, OscillatorTouchesAtPiAndTwoPi) {
    const ConjugateReport r = conjugate_points(principal_basis(oscillator(2), 2 * kPi));
    ASSERT_EQ(r.zeros.size(), 2u);
    EXPECT_NEAR(r.zeros[0].t, kPi, 1e-8);
    EXPECT_EQ(r.zeros[0].kind, ZeroKind::Touch);
    EXPECT_NEAR(r.zeros[1].t, 2 * kPi, 1e-8);
    EXPECT_TRUE(r.endpoint_degenerate);
    // One-dimensional oscillator: genuine sign change at pi.
    const ConjugateReport r1 = conjugate_points(principal_basis(oscillator(1), 2 * kPi));
    ASSERT_FALSE(r1.zeros.empty());
    EXPECT_EQ(r1.zeros[0].kind, ZeroKind::SignChange);
    EXPECT_NEAR(r1.zeros[0].t, kPi, 1e-8);
}

TEST(Conjugate, ReportTimesAreIncreasing) {
    const ConjugateReport r = conjugate_points(principal_basis(kepler_sv(0.3), 2 * kPi));
    for (std::size_t i = 0; i < r.zeros.size(); ++i) {
        EXPECT_GT(r.zeros[i].t, 0.0);
        EXPECT_LE(r.zeros[i].t, 2 * kPi);
        if (i) {
            EXPECT_LT(r.zeros[i - 1].t, r.zeros[i].t);
        }
    }
}

TEST(Parity, Hints) {
    const ConjugateReport k = conjugate_points(principal_basis(kepler_sv(1.2), 2 * kPi));
    EXPECT_EQ(lemma_parity_fastpath(k, 2), ParityHint::SuggestsSR);

    const FigureEight fe = figure_eight();
    const SecondVariation sv8 = second_variation(fe.trajectory);
    const ConjugateReport e = conjugate_points(principal_basis(sv8, fe.trajectory.period() / 6));
    EXPECT_EQ(e.sign, SignSummary::Positive);
    EXPECT_EQ(lemma_parity_fastpath(e, 6), ParityHint::SuggestsSR);

    const ConjugateReport o = conjugate_points(principal_basis(oscillator(2), kPi / 2));
    EXPECT_EQ(lemma_parity_fastpath(o, 2), ParityHint::SuggestsSR);

    const ConjugateReport o2 = conjugate_points(principal_basis(oscillator(2), 2 * kPi));
    EXPECT_EQ(lemma_parity_fastpath(o2, 2), ParityHint::Inapplicable);
}

TEST(Riccati, ResidualAndSymmetryAlongNonsingularBases) {
    for (double a : {1.2, 1.6}) {
        const SecondVariation sv = kepler_sv(a);
        const RiccatiStats s = riccati_stats(sv, principal_basis(sv, 2 * kPi));
        EXPECT_LT(s.max_relative_residual, 1e-6);
        EXPECT_LT(s.max_symmetry_defect, 1e-8);
    }
    std::mt19937_64 rng(3);
    const SecondVariation sv = random_sv(rng, 3);
    const ConjoinedBasis b = principal_basis(sv, 0.5);
    const RiccatiStats s = riccati_stats(sv, b);
    EXPECT_LT(s.max_relative_residual, 1e-6);
    EXPECT_LT(s.max_symmetry_defect, 1e-8);
}

TEST(Riccati, OscillatorClosedForm) {
    // W = Z Y^-1 = cot(t) Id.
    const ConjoinedBasis b = principal_basis(oscillator(2), 3.0);
    for (double t : {0.3, 1.0, 2.5}) EXPECT_LT((riccati_W(b, t) - (1.0 / std::tan(t)) * Mat::identity(2)).max_norm(), 1e-8);
}

TEST(SR, OscillatorFails) {
    const SRResult r = check_SR(oscillator(2), 2 * kPi);
    EXPECT_EQ(r.status, SrStatus::Fails);
    EXPECT_FALSE(r.holds());
    ASSERT_EQ(r.trace.size(), 4u);
}

TEST(SR, FreeParticleShiftedBasisSingularNearEpsilon) {
    // Y_eps(t) = (t - eps) Id vanishes at t = eps although det Y0 = t^2 > 0.
    const SecondVariation sv = free_sv(2);
    const ConjugateReport r = conjugate_points(principal_basis(sv, 2 * kPi));
    EXPECT_EQ(lemma_parity_fastpath(r, 2), ParityHint::SuggestsSR);
    const SRResult s = check_SR(sv, 2 * kPi);
    EXPECT_EQ(s.status, SrStatus::Fails);
    for (const EpsTrial& e : s.trace) {
        EXPECT_EQ(e.status, EpsStatus::SingularY);
        EXPECT_NEAR(e.singular_time, e.eps, 1e-8);
    }
}

TEST(SR, ShiftedBasisSingularityIsGenericNearZero) {
    // Y_eps = Y0 - eps Y1 = (t - eps) Id + O(t^2, eps t) for any problem, so the
    // schedule never survives the scan; the verdict therefore rests on the
    // boundary form (see verdict tests).
    const SRResult s = check_SR(kepler_sv(1.4), 2 * kPi);
    for (const EpsTrial& e : s.trace) {
        EXPECT_EQ(e.status, EpsStatus::SingularY);
        EXPECT_NEAR(e.singular_time, e.eps, 1e-2 * e.eps);
    }
}

TEST(SR, StarWithIdentityReducesToPlainCheck) {
    const SecondVariation sv = kepler_sv(1.3);
    const SRResult a = check_SR(sv, 2 * kPi);
    const SRResult b = check_SR_star(sv, Mat::identity(2), 1);
    EXPECT_EQ(a.status, b.status);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].status, b.trace[i].status);
        EXPECT_EQ(a.trace[i].singular_time, b.trace[i].singular_time);
    }
    EXPECT_EQ(a.lmi.feasible, b.lmi.feasible);
}

TEST(SR, FigureEightSymmetryChecks) {
    const FigureEight fe = figure_eight();
    const SecondVariation sv = second_variation(fe.trajectory);
    const SRResult r = check_SR_star(sv, fe.symmetry.S, 6);
    EXPECT_TRUE(r.symmetry_checked);
    EXPECT_LT(r.momentum_defect, 1e-6);
    EXPECT_LT(r.equivariance_defect, 1e-12);
    EXPECT_NEAR(r.tau, fe.trajectory.period() / 6, 1e-15);
}

TEST(SR, NonEquivariantSymmetryRejected) {
    const FigureEight fe = figure_eight();
    const SecondVariation sv = second_variation(fe.trajectory);
    // Rotating only the first body changes the mutual distances.
    Mat S = Mat::identity(6);
    S.set_block(0, 0, Mat::from_rows({{0.0, -1.0}, {1.0, 0.0}}));
    try {
        check_SR_star(sv, S, 6);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EquivarianceFailure);
    }
    EXPECT_THROW(check_SR_star(sv, 2.0 * Mat::identity(6), 6), Error);
}

TEST(BoundaryForm, IdentityJacobiFieldAttainsTheForm) {
    // For the oscillator on [0, tau] with S = Id the Jacobi field with
    // y(0) = y(tau) = xi is cos(t - tau/2)/cos(tau/2) xi; its second variation
    // is -2 tan(tau/2) |xi|^2.
    const double tau = 1.3;
    const SecondVariation sv = SecondVariation::constant(-Mat::identity(2), Mat(2, 2), Mat::identity(2), tau);
    const BoundaryForm bf = boundary_form(principal_basis(sv, tau), complementary_basis(sv, tau), Mat::identity(2));
    EXPECT_LT((bf.Gamma + 2 * std::tan(tau / 2) * Mat::identity(2)).max_norm(), 1e-8);
    // Free particle: Gamma = 0 for S = Id.
    const SecondVariation fp = SecondVariation::constant(Mat(2, 2), Mat(2, 2), Mat::identity(2), tau);
    const BoundaryForm bfp = boundary_form(principal_basis(fp, tau), complementary_basis(fp, tau), Mat::identity(2));
    EXPECT_LT(bfp.Gamma.max_norm(), 1e-9);
}

TEST(BoundaryForm, RestrictedDefiniteness) {
    const Mat m = Mat::diag({1.0, -1.0});
    const Mat slice = Mat::from_rows({{1.0}, {0.0}});
    EXPECT_EQ(restricted_definiteness(m, slice, 1e-10).kind, Definiteness::Positive);
    EXPECT_EQ(restricted_definiteness(m, Mat::identity(2), 1e-10).kind, Definiteness::Indefinite);
}

TEST(Lmi, FindsCertificateWhenOneExists) {
    // N' = 3 Id, G' = Id: K = 1.5 Id gives blocks 1.5 Id with coupling Id, feasible.
    const LmiResult r = solve_boundary_lmi(3.0 * Mat::identity(2), Mat::identity(2), Mat::identity(2));
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.margin, 0.0);
    // N' = Id, G' = Id requires K < Id and K > Id at once: infeasible.
    const LmiResult s = solve_boundary_lmi(Mat::identity(2), Mat::identity(2), Mat::identity(2));
    EXPECT_LE(s.margin, 0.0);
}
