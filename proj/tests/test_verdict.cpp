#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "orbmin/verdict.hpp"

using namespace orbmin;

namespace {

constexpr double kPi = std::numbers::pi;

MinimalityReport kepler(double a, int k = 1) { return classify(circular_orbit(a, 2 * kPi * std::abs(k), k)); }

/// Random trigonometric variation with harmonics 0..4 in each component.
Variation fourier_variation(std::mt19937_64& rng, std::size_t n, double T) {
    std::normal_distribution<double> g;
    std::vector<double> c(n * 9);
    for (double& x : c) x = g(rng);
    return {[c, n, T](double t, std::span<double> v, std::span<double> vd) {
                const double w = 2 * kPi / T;
                for (std::size_t i = 0; i < n; ++i) {
                    const double* a = &c[9 * i];
                    v[i] = a[0];
                    vd[i] = 0.0;
                    for (int j = 1; j <= 4; ++j) {
                        const double cj = std::cos(j * w * t), sj = std::sin(j * w * t);
                        v[i] += a[2 * j - 1] * cj + a[2 * j] * sj;
                        vd[i] += j * w * (-a[2 * j - 1] * sj + a[2 * j] * cj);
                    }
                }
            },
            T,
            {}};
}

} // namespace

TEST(Kepler, Verdicts) {
    for (double a : {1.2, 1.4, 1.6}) {
        const MinimalityReport r = kepler(a);
        EXPECT_EQ(r.verdict, Verdict::SLM) << a << ": " << r.reason;
        EXPECT_TRUE(r.pointwise.legendre_strict);
        EXPECT_TRUE(r.pointwise.weierstrass_strict);
        EXPECT_NE(r.certificate, "none");
        EXPECT_TRUE(r.dlm_implied);
    }
    for (double a : {0.2, 0.4, 0.6, 0.8}) {
        const MinimalityReport r = kepler(a);
        EXPECT_EQ(r.verdict, Verdict::SADDLE) << a << ": " << r.reason;
        ASSERT_FALSE(r.conjugate.interior().empty());
    }
    const MinimalityReport r1 = kepler(1.0);
    EXPECT_EQ(r1.verdict, Verdict::DEGENERATE) << r1.reason;
    EXPECT_TRUE(r1.conjugate.interior().empty());
}

TEST(Kepler, SlmWithinThePositiveStripOnly) {
    // Winding twice over T = 4 pi there is an interior conjugate point up to alpha 1.7.
    for (double a : {1.2, 1.5, 1.7}) EXPECT_EQ(kepler(a, 2).verdict, Verdict::SADDLE) << a;
}

TEST(Kepler, SaddleWitnessIsNegativeAndProbeDecreases) {
    for (double a : {0.4, 0.8}) {
        const Trajectory tr = circular_orbit(a, 2 * kPi, 1);
        const MinimalityReport r = classify(tr);
        ASSERT_EQ(r.verdict, Verdict::SADDLE);
        ASSERT_TRUE(r.witness.has_value()) << r.witness_error;
        EXPECT_LT(r.witness->value, 0.0);
        // Independent recomputation of the second variation along the witness.
        EXPECT_NEAR(quadratic_form(second_variation(tr), r.witness->variation), r.witness->value,
                    1e-6 * std::abs(r.witness->value));
        const double s[] = {0.0, 1e-3, -1e-3};
        const auto phi = directional_probe(tr, r.witness->variation, s);
        for (int i = 1; i < 3; ++i) {
            EXPECT_LT(phi[i].action, phi[0].action) << a;
            // phi(s) - phi(0) ~ s^2 Q(v) / 2.
            const double predicted = 0.5 * 1e-6 * r.witness->value;
            EXPECT_NEAR(phi[i].action - phi[0].action, predicted, 0.05 * std::abs(predicted));
        }
    }
}

TEST(Kepler, SaddleWitnessEntryPoint) {
    const Trajectory tr = circular_orbit(0.6, 2 * kPi, 1);
    const MinimalityReport r = classify(tr);
    const WitnessInfo w = saddle_witness(tr, r);
    EXPECT_LT(w.value, 0.0);
    EXPECT_EQ(w.method, "broken_jacobi");
    const Trajectory slm = circular_orbit(1.2, 2 * kPi, 1);
    EXPECT_THROW(saddle_witness(slm, classify(slm)), Error);
}

TEST(Kepler, SlmProbeAlongRandomFourierVariations) {
    const Trajectory tr = circular_orbit(1.4, 2 * kPi, 1);
    ASSERT_EQ(classify(tr).verdict, Verdict::SLM);
    const SecondVariation sv = second_variation(tr);
    std::mt19937_64 rng(2024);
    const double s[] = {0.0, 1e-4, -1e-4, 3e-5};
    for (int rep = 0; rep < 50; ++rep) {
        const Variation v = fourier_variation(rng, 2, tr.period());
        const double q = quadratic_form(sv, v);
        EXPECT_GE(q, 0.0);
        const auto phi = directional_probe(tr, v, s, 4 * kDefaultGrid);
        for (int i = 1; i < 4; ++i) EXPECT_GE(phi[i].action - phi[0].action, -1e-12) << rep;
    }
}

TEST(Kepler, StructuralEvidence) {
    const MinimalityReport r = kepler(1.4);
    ASSERT_TRUE(r.sr.has_value());
    // The epsilon route cannot certify: Y(0) = -eps I runs singular near t = eps.
    EXPECT_FALSE(r.sr->holds());
    EXPECT_EQ(r.certificate, "boundary_form");
    EXPECT_EQ(r.boundary.definiteness, Definiteness::Positive);
    EXPECT_GT(r.boundary.min_eig, 0.0);
    // Slice removes the time shift and the rotation, which coincide for circles.
    EXPECT_EQ(r.boundary.slice_dim, 1u);
    EXPECT_FALSE(r.slice.generators.empty());
    for (double kv : r.slice.kernel_values) EXPECT_LT(std::abs(kv), 1e-8);
    EXPECT_LT(r.wronskian_drift, 1e-8);
}

TEST(FigureEight, SaddleInFullSpaceAndSlmInSymmetricSpace) {
    const FigureEight fe = figure_eight();
    const MinimalityReport full = classify(fe.trajectory);
    EXPECT_EQ(full.verdict, Verdict::SADDLE) << full.reason;
    EXPECT_FALSE(full.conjugate.interior().empty());
    const MinimalityReport sym = classify(fe.trajectory, fe.symmetry);
    EXPECT_EQ(sym.verdict, Verdict::SLM) << sym.reason;
    EXPECT_TRUE(sym.conjugate.interior().empty());
    EXPECT_NEAR(sym.tau, kEightPeriod / 6, 1e-15);
}

TEST(FreeParticle, Inconclusive) {
    auto m = free_particle(2);
    const Trajectory tr = Trajectory::from_sampler(m, 2 * kPi, [](double, std::span<double> u, std::span<double> v) {
        u[0] = 1.0, u[1] = -0.5, v[0] = 0.0, v[1] = 0.0;
    });
    const MinimalityReport r = classify(tr);
    EXPECT_EQ(r.verdict, Verdict::INCONCLUSIVE) << r.reason;
    EXPECT_TRUE(r.conjugate.interior().empty());
    ASSERT_TRUE(r.sr.has_value());
    EXPECT_FALSE(r.sr->holds());
    EXPECT_FALSE(r.witness.has_value());
}

TEST(Oscillator, WitnessExists) {
    // Unit oscillator at rest over 3 pi: conjugate points at pi and 2 pi.
    auto m = harmonic_oscillator(1);
    const Trajectory tr = Trajectory::from_sampler(m, 3 * kPi, [](double, std::span<double> u, std::span<double> v) {
        u[0] = 0.0, v[0] = 0.0;
    });
    const MinimalityReport r = classify(tr);
    EXPECT_EQ(r.verdict, Verdict::SADDLE);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_LT(r.witness->value, 0.0);
    EXPECT_NEAR(r.conjugate.interior().front().t, kPi, 1e-8);
}

TEST(Classify, Deterministic) {
    const Trajectory tr = circular_orbit(0.4, 2 * kPi, 1);
    const MinimalityReport a = classify(tr), b = classify(tr);
    EXPECT_EQ(a.verdict, b.verdict);
    ASSERT_EQ(a.conjugate.zeros.size(), b.conjugate.zeros.size());
    for (std::size_t i = 0; i < a.conjugate.zeros.size(); ++i) EXPECT_EQ(a.conjugate.zeros[i].t, b.conjugate.zeros[i].t);
    ASSERT_TRUE(a.witness && b.witness);
    EXPECT_EQ(a.witness->value, b.witness->value);
}

TEST(Classify, RejectsNonCriticalAndNonPeriodic) {
    // Circle of the right radius traversed at the wrong speed is closed but not critical.
    const Trajectory wrong = Trajectory::from_sampler(std::make_shared<KeplerAlpha>(1.0), 2 * kPi,
                                                      [](double t, std::span<double> u, std::span<double> v) {
                                                          u[0] = std::cos(t), u[1] = std::sin(t);
                                                          v[0] = -std::sin(t), v[1] = std::cos(t);
                                                          for (int i = 0; i < 2; ++i) u[i] *= 1.3, v[i] *= 1.3;
                                                      });
    try {
        classify(wrong);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotCritical);
    }
    IntegratorOpts o;
    o.rtol = 1e-12, o.atol = 1e-14, o.step = 0.0;
    const Trajectory open = Trajectory::integrate(std::make_shared<KeplerAlpha>(1.0), {1.0, 0.0}, {0.0, 1.1}, 2 * kPi, o);
    try {
        classify(open);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPeriodic);
    }
}

TEST(Verdict, Names) {
    EXPECT_EQ(to_string(Verdict::SLM), "SLM");
    EXPECT_EQ(to_string(Verdict::SADDLE), "SADDLE");
    EXPECT_EQ(to_string(Verdict::INCONCLUSIVE), "INCONCLUSIVE");
}
