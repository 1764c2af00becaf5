#pragma once

// Full decision procedure: pointwise conditions, conjugate points, Riccati and
// boundary-form certificates, and constructive saddle witnesses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orbmin/celestial.hpp"
#include "orbmin/conjoined.hpp"
#include "orbmin/error.hpp"
#include "orbmin/smallmat.hpp"
#include "orbmin/varcalc.hpp"

namespace orbmin {

enum class Verdict { SLM, WLM, DLM, SADDLE, DEGENERATE, INCONCLUSIVE };

constexpr std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::SLM: return "SLM";
    case Verdict::WLM: return "WLM";
    case Verdict::DLM: return "DLM";
    case Verdict::SADDLE: return "SADDLE";
    case Verdict::DEGENERATE: return "DEGENERATE";
    case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "?";
}

/// A variation with negative second variation.
struct WitnessInfo {
    std::string method; ///< "broken_jacobi", "boundary_jacobi" or "constant"
    double value = 0.0; ///< quadrature value of the second variation
    double conjugate_time = 0.0;
    double window = 0.0;
    double eta = 0.0;
    Variation variation;
};

/// Directions removed before the boundary test: values at t = 0 of the
/// Jacobi fields generated by symmetries compatible with the loop class.
struct SliceInfo {
    Mat basis; ///< orthonormal columns
    std::vector<std::string> generators;
    std::vector<double> kernel_values; ///< second variation of each generator field
};

struct BoundaryEvidence {
    bool computed = false;
    Definiteness definiteness = Definiteness::Indefinite;
    double min_eig = 0.0;
    Vec eigenvalues;
    std::size_t slice_dim = 0;
};

struct Tolerances {
    double tol_el = 0.0;
    double tol_periodic = 0.0;
    double tol_touch = 0.0;
    double tol_endpoint = 0.0;
    double tol_definite = 0.0;
    double tol_riccati = 0.0;
    double tol_witness = 0.0;
    double tube_radius = 0.0;
    std::vector<double> eps_schedule;
};

struct MinimalityReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    std::string reason;
    std::size_t dim = 0;
    double period = 0.0;
    double tau = 0.0;
    std::optional<SymmetrySpec> symmetry;
    double symmetry_defect = 0.0;

    double el_residual = 0.0;
    double closure_defect = 0.0;
    ConditionFlags pointwise;
    ConjugateReport conjugate;
    bool jacobi_J = false;
    bool jacobi_J_strict = false;
    ParityHint parity = ParityHint::Inapplicable;
    std::optional<SRResult> sr;
    SliceInfo slice;
    BoundaryEvidence boundary;
    std::string certificate = "none"; ///< "riccati", "riccati_slice", "boundary_form" or "none"
    bool dlm_implied = false;
    std::optional<WitnessInfo> witness;
    std::string witness_error;
    double wronskian_drift = 0.0;
    Tolerances tolerances;
};

struct ClassifyOpts {
    IntegratorOpts integ = default_basis_opts();
    ConjugateOpts conjugate;
    PointwiseOpts pointwise;
    SrOptions sr;
    double tol_el_rel = 1e-4;     ///< tol_el = tol_el_rel (1 + max |u'|)
    double tol_boundary = 1e-9;   ///< definiteness band for the boundary form
    double tol_witness = 1e-10;
    std::vector<double> mollifier_windows{1e-2, 1e-1}; ///< fractions of T
    double tol_generator = 1e-6;  ///< compatibility of a generator with the loop symmetry
    std::size_t quad_nodes = 8 * kDefaultGrid;
};

namespace detail {

inline void hermite(double a, double b, CSpan p0, CSpan m0, CSpan p1, CSpan m1, double t, std::span<double> v,
                    std::span<double> vd) {
    const double h = b - a, s = (t - a) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1, d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = h00 * p0[i] + h10 * h * m0[i] + h01 * p1[i] + h11 * h * m1[i];
        vd[i] = (d00 * p0[i] + d01 * p1[i]) / h + d10 * m0[i] + d11 * m1[i];
    }
}

/// Extends f on [0, tau] to [0, M tau] by v(t + j tau) = S^j v(t).
inline Variation symmetric_extension(std::function<void(double, std::span<double>, std::span<double>)> f, double tau,
                                     const Mat& S, int M, const std::vector<double>& local_breaks) {
    std::vector<Mat> powers{Mat::identity(S.rows())};
    for (int j = 1; j < M; ++j) powers.push_back(S * powers.back());
    Variation var;
    var.period = tau * M;
    for (int j = 0; j < M; ++j) {
        var.breakpoints.push_back(j * tau);
        for (double b : local_breaks) var.breakpoints.push_back(j * tau + b);
    }
    const std::size_t n = S.rows();
    var.eval = [f, tau, powers, M, n](double t, std::span<double> v, std::span<double> vd) {
        int j = static_cast<int>(std::floor(t / tau));
        j = std::clamp(j, 0, M - 1);
        const double s = t - j * tau;
        Vec y(n), yd(n);
        f(s, y, yd);
        if (j == 0) {
            std::copy(y.begin(), y.end(), v.begin());
            std::copy(yd.begin(), yd.end(), vd.begin());
            return;
        }
        const Vec a = powers[j] * y, b = powers[j] * yd;
        std::copy(a.begin(), a.end(), v.begin());
        std::copy(b.begin(), b.end(), vd.begin());
    };
    return var;
}

/// y' = A y + B z for a Jacobi field with y = Y xi, z = Z xi.
inline Vec jacobi_velocity(const SecondVariation& sv, double t, const Vec& y, const Vec& z) {
    if (sv.mechanical()) return z;
    const SecondVariation::Jacobi J = sv.jacobi(t);
    Vec a = J.A * y;
    const Vec b = J.B * z;
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Variation combine(const Variation& a, const Variation& b, double wb) {
    Variation c;
    c.period = a.period;
    c.breakpoints = a.breakpoints;
    c.breakpoints.insert(c.breakpoints.end(), b.breakpoints.begin(), b.breakpoints.end());
    c.eval = [a, b, wb](double t, std::span<double> v, std::span<double> vd) {
        Vec x(v.size()), xd(v.size());
        a.eval(t, v, vd);
        b.eval(t, x, xd);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += wb * x[i];
            vd[i] += wb * xd[i];
        }
    };
    return c;
}

} // namespace detail

/// Broken Jacobi field through an interior conjugate point c of the
/// principal basis on [0, tau]: y = Y0(t) xi on [0, c] with Y0(c) xi = 0, zero
/// on [c, tau], blended to C^1 by cubics over a window around 0 and c, then
/// improved along a bump at c. Extended to the full loop by the symmetry.
inline WitnessInfo conjugate_witness(const SecondVariation& sv, const ConjoinedBasis& principal, double c, const Mat& S,
                                     int M, const ClassifyOpts& o) {
    const std::size_t n = sv.dim();
    const double tau = sv.period() / M, T = sv.period();
    if (!(c > 0 && c < tau)) throw Error(ErrorKind::InvalidArgument, "witness: conjugate time outside (0, tau)");
    const Vec xi = null_direction(principal.Y(c));
    const Vec zc = principal.Z(c) * xi;
    const double znorm = norm2(zc);
    // Captured by value: the witness outlives the caller's bases.
    auto field = [sv, principal, xi](double t, Vec& y, Vec& yd) {
        Mat Y, Z;
        principal.eval(t, Y, Z);
        y = Y * xi;
        yd = detail::jacobi_velocity(sv, t, y, Z * xi);
    };

    std::string last;
    for (double frac : o.mollifier_windows) {
        const double delta = frac * T;
        if (!(delta < 0.45 * c)) {
            last = "window too wide for the conjugate time";
            continue;
        }
        Vec ya(n), yda(n), yb(n), ydb(n);
        field(delta, ya, yda);
        field(c - delta, yb, ydb);
        const Vec zero(n, 0.0);
        auto broken = [=](double s, std::span<double> v, std::span<double> vd) {
            if (s <= 0.0 || s >= c) {
                std::fill(v.begin(), v.end(), 0.0);
                std::fill(vd.begin(), vd.end(), 0.0);
            } else if (s < delta) {
                detail::hermite(0.0, delta, zero, zero, ya, yda, s, v, vd);
            } else if (s > c - delta) {
                detail::hermite(c - delta, c, yb, ydb, zero, zero, s, v, vd);
            } else {
                Vec y, yd;
                field(s, y, yd);
                std::copy(y.begin(), y.end(), v.begin());
                std::copy(yd.begin(), yd.end(), vd.begin());
            }
        };
        const Variation base = detail::symmetric_extension(broken, tau, S, M, {delta, c - delta, c});
        const double q0 = quadratic_form(sv, base, o.quad_nodes);
        if (q0 < -o.tol_witness) return {"broken_jacobi", q0, c, delta, 0.0, base};

        // Bump along z(c) at the corner: Q(v + eta h) = Q(v) + 2 eta Q(v, h) + eta^2 Q(h).
        if (znorm == 0.0) {
            last = "vanishing momentum at the conjugate point";
            continue;
        }
        const double w = 0.5 * std::min(c, tau - c);
        Vec dir = zc;
        for (double& x : dir) x /= znorm;
        auto bump = [=](double s, std::span<double> v, std::span<double> vd) {
            const double x = (s - c) / w;
            if (std::abs(x) >= 1.0) {
                std::fill(v.begin(), v.end(), 0.0);
                std::fill(vd.begin(), vd.end(), 0.0);
                return;
            }
            const double p = (1 - x * x) * (1 - x * x), dp = -4 * x * (1 - x * x) / w;
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] = p * dir[i];
                vd[i] = dp * dir[i];
            }
        };
        const Variation h = detail::symmetric_extension(bump, tau, S, M, {c - w, c, c + w});
        const double qh = quadratic_form(sv, h, o.quad_nodes);
        const double qp = quadratic_form(sv, detail::combine(base, h, 1.0), o.quad_nodes);
        const double qm = quadratic_form(sv, detail::combine(base, h, -1.0), o.quad_nodes);
        const double cross = 0.25 * (qp - qm);
        if (qh < -o.tol_witness) return {"broken_jacobi", qh, c, delta, 0.0, h};
        if (qh > 0) {
            const double eta = -cross / qh;
            const Variation v = detail::combine(base, h, eta);
            const double q = quadratic_form(sv, v, o.quad_nodes);
            if (q < -o.tol_witness) return {"broken_jacobi", q, c, delta, eta, v};
        }
        last = "mollified field not negative (Q=" + num_str(q0) + ")";
    }
    throw Error(ErrorKind::WitnessNotFound, last.empty() ? "no window produced a negative value" : last);
}

/// Jacobi field with y(0) = xi, y(tau) = S xi, whose second variation equals
/// M xi^T Gamma xi; negative when xi is a negative direction of Gamma.
inline WitnessInfo boundary_witness(const SecondVariation& sv, const ConjoinedBasis& principal,
                                    const ConjoinedBasis& complement, const BoundaryForm& bf, const Vec& xi, int M,
                                    const ClassifyOpts& o) {
    const double tau = bf.tau;
    const Vec rhs = bf.S * xi;
    Vec diff = bf.Y1 * xi;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rhs[i] - diff[i];
    const Vec b = bf.G * diff;
    auto f = [sv, principal, complement, xi, b](double s, std::span<double> v, std::span<double> vd) {
        Mat Y0, Z0, Y1, Z1;
        principal.eval(s, Y0, Z0);
        complement.eval(s, Y1, Z1);
        Vec y = Y1 * xi, z = Z1 * xi;
        const Vec y2 = Y0 * b, z2 = Z0 * b;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] += y2[i];
            z[i] += z2[i];
        }
        const Vec yd = detail::jacobi_velocity(sv, s, y, z);
        std::copy(y.begin(), y.end(), v.begin());
        std::copy(yd.begin(), yd.end(), vd.begin());
    };
    const Variation var = detail::symmetric_extension(f, tau, bf.S, M, {});
    const double q = quadratic_form(sv, var, o.quad_nodes);
    if (!(q < -o.tol_witness))
        throw Error(ErrorKind::WitnessNotFound, "boundary Jacobi field is not negative (Q=" + num_str(q) + ")");
    return {"boundary_jacobi", q, 0.0, 0.0, 0.0, var};
}

/// Constant variation along the most negative direction of int P.
inline WitnessInfo constant_witness(const SecondVariation& sv, const Mat& intP, const ClassifyOpts& o) {
    const SymmetricEigen e = symmetric_eigen(intP);
    const Vec dir = e.vectors.col(0);
    const Variation var = constant_variation(dir, sv.period());
    const double q = quadratic_form(sv, var, o.quad_nodes);
    if (!(q < -o.tol_witness))
        throw Error(ErrorKind::WitnessNotFound, "constant variation is not negative (Q=" + num_str(q) + ")");
    return {"constant", q, 0.0, 0.0, 0.0, var};
}

/// Symmetry directions compatible with the loop class, and the orthogonal
/// complement of their values at t = 0.
inline SliceInfo symmetry_slice(const SecondVariation& sv, const std::optional<SymmetrySpec>& sym,
                                const ClassifyOpts& o) {
    const std::size_t n = sv.dim();
    SliceInfo info;
    if (!sv.trajectory()) {
        info.basis = Mat::identity(n);
        return info;
    }
    const Trajectory& tr = *sv.trajectory();
    const LagrangianModel& m = tr.model();
    const int M = sym ? sym->M : 1;
    const Mat S = sym ? sym->S : Mat::identity(n);
    const double tau = tr.period() / M;

    struct Candidate {
        std::string name;
        std::function<void(double, std::span<double>, std::span<double>)> f;
    };
    std::vector<Candidate> cands;
    if (m.is_autonomous()) {
        cands.push_back({"time_shift", [&tr, &m](double t, std::span<double> g, std::span<double> gd) {
                             const std::size_t k = tr.dim();
                             Vec u(k), v(k);
                             tr.eval(t, u, v);
                             const Vec a = m.acceleration(t, u, v);
                             std::copy(v.begin(), v.end(), g.begin());
                             std::copy(a.begin(), a.end(), gd.begin());
                         }});
    }
    for (const SymmetryGenerator& gen : m.symmetry_generators()) {
        cands.push_back({gen.name, [&tr, gen](double t, std::span<double> g, std::span<double> gd) {
                             const std::size_t k = tr.dim();
                             Vec u(k), v(k);
                             tr.eval(t, u, v);
                             const Vec a = gen.X * u, b = gen.X * v;
                             for (std::size_t i = 0; i < k; ++i) {
                                 g[i] = a[i] + gen.b[i];
                                 gd[i] = b[i];
                             }
                         }});
    }
    std::vector<Vec> values;
    for (const Candidate& c : cands) {
        Vec g(n), gd(n), g2(n), gd2(n);
        double gmax = 0.0, defect = 0.0;
        const std::size_t N = 256;
        for (std::size_t i = 0; i <= N; ++i) {
            const double t = tr.period() * static_cast<double>(i) / static_cast<double>(N);
            c.f(t, g, gd);
            c.f(t + tau, g2, gd2);
            const Vec sg = S * g;
            gmax = std::max(gmax, max_abs(g));
            for (std::size_t k = 0; k < n; ++k) defect = std::max(defect, std::abs(g2[k] - sg[k]));
        }
        if (gmax < 1e-12) continue;
        if (defect > o.tol_generator * (1.0 + gmax)) continue;
        Variation var{c.f, tau, {}};
        info.generators.push_back(c.name);
        info.kernel_values.push_back(quadratic_form(sv, var, o.quad_nodes / std::max(1, M)));
        c.f(0.0, g, gd);
        values.push_back(g);
    }
    info.basis = orthogonal_complement(n, values, 1e-6);
    return info;
}

/// Broken-Jacobi-field witness for a report with an interior conjugate point.
inline WitnessInfo saddle_witness(const Trajectory& tr, const MinimalityReport& report, const ClassifyOpts& o = {}) {
    const auto interior = report.conjugate.interior();
    if (interior.empty()) throw Error(ErrorKind::InvalidArgument, "saddle_witness: no interior conjugate point");
    const SecondVariation sv = second_variation(tr);
    const int M = report.symmetry ? report.symmetry->M : 1;
    const Mat S = report.symmetry ? report.symmetry->S : Mat::identity(tr.dim());
    const ConjoinedBasis p = principal_basis(sv, tr.period() / M, o.integ);
    return conjugate_witness(sv, p, interior.front().t, S, M, o);
}

/// Classifies a periodic critical point (optionally within the loops
/// satisfying u(t + T/M) = S u(t)).
inline MinimalityReport classify(const Trajectory& tr, const std::optional<SymmetrySpec>& sym = std::nullopt,
                                 const ClassifyOpts& o = {}) {
    MinimalityReport rep;
    const std::size_t n = tr.dim();
    rep.dim = n;
    rep.period = tr.period();
    rep.symmetry = sym;
    const int M = sym ? sym->M : 1;
    const Mat S = sym ? sym->S : Mat::identity(n);
    if (sym) {
        if (M < 1 || S.rows() != n || !S.square())
            throw Error(ErrorKind::InvalidArgument, "symmetry spec does not match the configuration dimension");
        if (orthogonality_defect(S) > 1e-10) throw Error(ErrorKind::InvalidArgument, "symmetry matrix is not orthogonal");
        rep.symmetry_defect = symmetry_defect(tr, *sym);
    }
    const double tau = tr.period() / M;
    rep.tau = tau;

    Tolerances& tol = rep.tolerances;
    tol.tol_el = o.tol_el_rel * (1.0 + tr.max_abs_velocity());
    tol.tol_periodic = tr.tol_periodic();
    tol.tol_touch = o.conjugate.tol_touch;
    tol.tol_endpoint = o.conjugate.tol_endpoint;
    tol.tol_definite = o.pointwise.tol_definite;
    tol.tol_riccati = o.sr.tol_riccati;
    tol.tol_witness = o.tol_witness;
    tol.tube_radius = o.pointwise.tube_radius;
    tol.eps_schedule = o.sr.eps_schedule;

    rep.closure_defect = tr.closure_defect();
    if (!tr.periodic())
        throw Error(ErrorKind::NotPeriodic, "closure defect " + num_str(rep.closure_defect) + " exceeds " +
                                                num_str(tol.tol_periodic));
    rep.el_residual = el_residual(tr);
    if (rep.el_residual > tol.tol_el)
        throw Error(ErrorKind::NotCritical, "Euler-Lagrange residual " + num_str(rep.el_residual) +
                                                " exceeds " + num_str(tol.tol_el));
    if (sym && rep.symmetry_defect > 1e-5 * (1.0 + tr.max_abs_position()))
        throw Error(ErrorKind::InvalidArgument, "trajectory does not satisfy the symmetry (defect " +
                                                    num_str(rep.symmetry_defect) + ")");

    const SecondVariation sv = second_variation(tr);
    rep.pointwise = check_pointwise_conditions(sv, o.pointwise);

    const ConjoinedBasis principal = principal_basis(sv, tau, o.integ);
    rep.wronskian_drift = principal.wronskian_drift();
    rep.conjugate = conjugate_points(principal, o.conjugate);
    rep.jacobi_J = rep.conjugate.condition_J();
    rep.jacobi_J_strict = rep.conjugate.condition_J_strict();
    rep.parity = lemma_parity_fastpath(rep.conjugate, n);
    rep.slice = symmetry_slice(sv, sym, o);

    auto try_conjugate_witness = [&]() {
        for (const Zero& z : rep.conjugate.interior()) {
            try {
                rep.witness = conjugate_witness(sv, principal, z.t, S, M, o);
                return true;
            } catch (const Error& e) {
                rep.witness_error = e.what();
            }
        }
        return false;
    };

    if (rep.conjugate.interior_sign_change()) {
        rep.verdict = Verdict::SADDLE;
        rep.reason = "det Y0 changes sign inside the interval";
        try_conjugate_witness();
        return rep;
    }
    if (rep.conjugate.interior_touch()) {
        if (try_conjugate_witness()) {
            rep.verdict = Verdict::SADDLE;
            rep.reason = "interior conjugate point of even multiplicity with a negative witness";
        } else {
            rep.verdict = Verdict::INCONCLUSIVE;
            rep.reason = "interior touching zero of det Y0 without a negative witness";
        }
        return rep;
    }
    if (rep.conjugate.endpoint_degenerate) {
        rep.verdict = Verdict::DEGENERATE;
        rep.reason = "det Y0 vanishes at the end of the interval";
        return rep;
    }
    if (!rep.pointwise.legendre_strict) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.reason = "strengthened Legendre condition fails";
        return rep;
    }

    SrOptions sro = o.sr;
    sro.integ = o.integ;
    if (rep.slice.basis.cols() != n) sro.slice = rep.slice.basis;
    rep.sr = sym ? check_SR_star(sv, S, M, sro) : check_SR(sv, tau, sro);

    const ConjoinedBasis complement = complementary_basis(sv, tau, o.integ);
    const BoundaryForm bf = boundary_form(principal, complement, S);
    const Mat& Pi = rep.slice.basis;
    rep.boundary.computed = true;
    rep.boundary.slice_dim = Pi.cols();
    const Mat restricted = (Pi.transpose() * bf.Gamma * Pi).symmetrized();
    const DefinitenessResult bd = classify_definiteness(restricted, o.tol_boundary);
    rep.boundary.definiteness = bd.kind;
    rep.boundary.min_eig = bd.min_eigenvalue;
    rep.boundary.eigenvalues = restricted.rows() ? symmetric_eigen(restricted).values : Vec{};

    if (rep.sr->holds())
        rep.certificate = rep.sr->status == SrStatus::Holds ? "riccati" : "riccati_slice";
    else if (bd.kind == Definiteness::Positive)
        rep.certificate = "boundary_form";

    if (rep.certificate != "none") {
        rep.dlm_implied = true;
        rep.verdict = rep.pointwise.weierstrass_strict ? Verdict::SLM : Verdict::WLM;
        rep.reason = "second variation positive on the loop class";
        if (!rep.slice.generators.empty()) rep.reason += " modulo symmetry directions";
        return rep;
    }
    if (bd.kind == Definiteness::Indefinite) {
        const SymmetricEigen e = symmetric_eigen(restricted);
        const Vec xi = Pi * e.vectors.col(0);
        try {
            rep.witness = boundary_witness(sv, principal, complement, bf, xi, M, o);
            rep.verdict = Verdict::SADDLE;
            rep.reason = "boundary form is indefinite";
            return rep;
        } catch (const Error& ex) {
            rep.witness_error = ex.what();
        }
    }
    if (!sym && rep.pointwise.regularity == Definiteness::Indefinite) {
        try {
            rep.witness = constant_witness(sv, rep.pointwise.integral_P, o);
            rep.verdict = Verdict::SADDLE;
            rep.reason = "integral of P is indefinite";
            return rep;
        } catch (const Error& ex) {
            rep.witness_error = ex.what();
        }
    }
    rep.verdict = Verdict::INCONCLUSIVE;
    rep.reason = "no certificate and no conjugate point";
    return rep;
}

} // namespace orbmin
