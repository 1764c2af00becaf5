#pragma once

// Matrix Jacobi system, conjugate points, Riccati solutions and the boundary
// tests that certify positivity of the second variation on periodic (or
// symmetric) loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orbmin/celestial.hpp"
#include "orbmin/error.hpp"
#include "orbmin/odeflow.hpp"
#include "orbmin/smallmat.hpp"
#include "orbmin/varcalc.hpp"

namespace orbmin {

inline IntegratorOpts default_basis_opts() {
    IntegratorOpts o;
    o.method = Method::Dp54Adaptive;
    o.step = 0.0;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    return o;
}

/// Matrix solution (Y, Z) of Y' = A Y + B Z, Z' = C Y - A^T Z.
class ConjoinedBasis {
public:
    std::size_t dim() const noexcept { return n_; }
    double t_end() const noexcept { return flow_->t1(); }
    const Mat& Y_init() const noexcept { return Y0_; }
    const Mat& Z_init() const noexcept { return Z0_; }
    const FlowSolution& flow() const noexcept { return *flow_; }

    void eval(double t, Mat& Y, Mat& Z) const {
        State s(2 * n_ * n_);
        flow_->eval(t, s);
        Y = Mat::from_row_major(n_, n_, std::span<const double>(s.data(), n_ * n_));
        Z = Mat::from_row_major(n_, n_, std::span<const double>(s.data() + n_ * n_, n_ * n_));
    }
    Mat Y(double t) const {
        Mat y, z;
        eval(t, y, z);
        return y;
    }
    Mat Z(double t) const {
        Mat y, z;
        eval(t, y, z);
        return z;
    }
    double det_Y(double t) const {
        State s(2 * n_ * n_);
        flow_->eval(t, s);
        return det(Mat::from_row_major(n_, n_, std::span<const double>(s.data(), n_ * n_)));
    }

    /// max over integration nodes of |Y^T Z - Z^T Y - (Y^T Z - Z^T Y)(0)|.
    double wronskian_drift() const noexcept { return wronskian_drift_; }
    /// max over integration nodes of |Z|.
    double max_abs_Z() const noexcept { return max_z_; }

private:
    friend ConjoinedBasis integrate_basis(const SecondVariation&, const Mat&, const Mat&, double, const IntegratorOpts&);

    std::size_t n_ = 0;
    std::shared_ptr<const FlowSolution> flow_;
    Mat Y0_, Z0_;
    double wronskian_drift_ = 0.0;
    double max_z_ = 0.0;
};

inline ConjoinedBasis integrate_basis(const SecondVariation& sv, const Mat& Y0, const Mat& Z0, double t_end,
                                      const IntegratorOpts& opts = default_basis_opts()) {
    const std::size_t n = sv.dim();
    if (Y0.rows() != n || Y0.cols() != n || Z0.rows() != n || Z0.cols() != n)
        throw Error(ErrorKind::InvalidArgument, "basis initial data has wrong shape");
    const std::size_t nn = n * n;
    VectorField f = [&sv, n, nn](double t, std::span<const double> y, std::span<double> dy) {
        const Mat Y = Mat::from_row_major(n, n, y.subspan(0, nn), false);
        const Mat Z = Mat::from_row_major(n, n, y.subspan(nn, nn), false);
        Mat dY, dZ;
        if (sv.mechanical()) {
            dY = Z;
            dZ = sv.P(t) * Y;
        } else {
            const SecondVariation::Jacobi J = sv.jacobi(t);
            dY = J.A * Y + J.B * Z;
            dZ = J.C * Y - J.A.transpose() * Z;
        }
        std::copy(dY.flat().begin(), dY.flat().end(), dy.begin());
        std::copy(dZ.flat().begin(), dZ.flat().end(), dy.begin() + static_cast<std::ptrdiff_t>(nn));
    };
    State s0(Y0.flat().begin(), Y0.flat().end());
    s0.insert(s0.end(), Z0.flat().begin(), Z0.flat().end());
    ConjoinedBasis b;
    b.n_ = n;
    b.Y0_ = Y0;
    b.Z0_ = Z0;
    b.flow_ = std::make_shared<const FlowSolution>(integrate(f, s0, 0.0, t_end, opts));
    const Mat K0 = Y0.transpose() * Z0 - Z0.transpose() * Y0;
    for (std::size_t i = 0; i < b.flow_->size(); ++i) {
        const State& s = b.flow_->node(i);
        const Mat Y = Mat::from_row_major(n, n, std::span<const double>(s.data(), nn));
        const Mat Z = Mat::from_row_major(n, n, std::span<const double>(s.data() + nn, nn));
        b.wronskian_drift_ = std::max(b.wronskian_drift_, (Y.transpose() * Z - Z.transpose() * Y - K0).max_norm());
        b.max_z_ = std::max(b.max_z_, Z.max_norm());
    }
    return b;
}

/// Basis with Y(0) = 0, Z(0) = Id.
inline ConjoinedBasis principal_basis(const SecondVariation& sv, double t_end,
                                      const IntegratorOpts& opts = default_basis_opts()) {
    return integrate_basis(sv, Mat(sv.dim(), sv.dim()), Mat::identity(sv.dim()), t_end, opts);
}

/// Basis with Y(0) = Id, Z(0) = 0.
inline ConjoinedBasis complementary_basis(const SecondVariation& sv, double t_end,
                                          const IntegratorOpts& opts = default_basis_opts()) {
    return integrate_basis(sv, Mat::identity(sv.dim()), Mat(sv.dim(), sv.dim()), t_end, opts);
}

// ---------------------------------------------------------------------------
// Conjugate points

enum class SignSummary { Positive, Negative, Mixed };

constexpr std::string_view to_string(SignSummary s) {
    switch (s) {
    case SignSummary::Positive: return "POSITIVE";
    case SignSummary::Negative: return "NEGATIVE";
    case SignSummary::Mixed: return "MIXED";
    }
    return "?";
}

struct ConjugateOpts {
    std::size_t samples = kDefaultGrid; ///< scan points over [0, t_end]
    double tol_touch = 1e-7;             ///< relative, for interior touch zeros
    double tol_endpoint = 1e-6;          ///< relative, for endpoint degeneracy
    double tol_t = 1e-10;
};

struct ConjugateReport {
    std::vector<Zero> zeros; ///< all zeros of det Y0 in (0, t_end], ascending
    double t_end = 0.0;
    bool endpoint_degenerate = false;
    double det_end = 0.0;
    double det_max = 0.0;
    SignSummary sign = SignSummary::Positive;

    /// Zeros are "at the endpoint" within this window.
    double endpoint_window() const { return 1e-7 * t_end; }
    bool is_interior(const Zero& z) const { return z.t < t_end - endpoint_window(); }
    std::vector<Zero> interior() const {
        std::vector<Zero> out;
        for (const Zero& z : zeros)
            if (is_interior(z)) out.push_back(z);
        return out;
    }
    bool interior_sign_change() const {
        for (const Zero& z : zeros)
            if (is_interior(z) && z.kind == ZeroKind::SignChange) return true;
        return false;
    }
    bool interior_touch() const {
        for (const Zero& z : zeros)
            if (is_interior(z) && z.kind == ZeroKind::Touch) return true;
        return false;
    }
    /// (J): no conjugate point in (0, t_end).
    bool condition_J() const { return interior().empty(); }
    /// (J'): no conjugate point in (0, t_end].
    bool condition_J_strict() const { return condition_J() && !endpoint_degenerate; }
};

inline ConjugateReport conjugate_points(const ConjoinedBasis& basis, const ConjugateOpts& opts = {}) {
    ConjugateReport r;
    r.t_end = basis.t_end();
    const std::size_t N = std::max<std::size_t>(opts.samples, 16);
    bool pos = true, neg = true;
    for (std::size_t i = 1; i <= N; ++i) {
        const double t = r.t_end * static_cast<double>(i) / static_cast<double>(N);
        const double d = basis.det_Y(t);
        r.det_max = std::max(r.det_max, std::abs(d));
        pos = pos && d > 0;
        neg = neg && d < 0;
    }
    r.sign = pos ? SignSummary::Positive : (neg ? SignSummary::Negative : SignSummary::Mixed);
    r.det_end = basis.det_Y(r.t_end);
    r.endpoint_degenerate = std::abs(r.det_end) < opts.tol_endpoint * r.det_max;
    ZeroOpts zo;
    zo.samples = N;
    zo.tol_touch = opts.tol_touch;
    zo.tol_t = opts.tol_t;
    r.zeros = locate_zeros([&basis](double t) { return basis.det_Y(t); }, 0.0, r.t_end, zo);
    if (r.endpoint_degenerate) {
        // Make the endpoint zero explicit and drop duplicates inside the window.
        std::vector<Zero> kept;
        for (const Zero& z : r.zeros)
            if (r.is_interior(z)) kept.push_back(z);
        kept.push_back({r.t_end, ZeroKind::Touch});
        r.zeros = std::move(kept);
    }
    return r;
}

enum class ParityHint { SuggestsSR, Inapplicable };

constexpr std::string_view to_string(ParityHint p) { return p == ParityHint::SuggestsSR ? "SUGGESTS_SR" : "INAPPLICABLE"; }

/// Advisory sign test: det Y0 keeps the sign (-1)^n ... positive for even n,
/// negative for odd n, on (0, t_end].
inline ParityHint lemma_parity_fastpath(const ConjugateReport& report, std::size_t n) {
    if (!report.zeros.empty()) return ParityHint::Inapplicable;
    if (n % 2 == 0 && report.sign == SignSummary::Positive) return ParityHint::SuggestsSR;
    if (n % 2 == 1 && report.sign == SignSummary::Negative) return ParityHint::SuggestsSR;
    return ParityHint::Inapplicable;
}

// ---------------------------------------------------------------------------
// Riccati solutions

/// W(t) = Z(t) Y(t)^-1.
inline Mat riccati_W(const ConjoinedBasis& b, double t) {
    Mat Y, Z;
    b.eval(t, Y, Z);
    return solve(Y.transpose(), Z.transpose()).x.transpose();
}

/// |W' - C + W A + A^T W + W B W|_max at t, with W' by a fourth-order central
/// difference of step h.
inline double riccati_residual(const SecondVariation& sv, const ConjoinedBasis& b, double t, double h) {
    const Mat W = riccati_W(b, t);
    const Mat Wd = (riccati_W(b, t - 2 * h) - 8.0 * riccati_W(b, t - h) + 8.0 * riccati_W(b, t + h) -
                    riccati_W(b, t + 2 * h)) *
                   (1.0 / (12.0 * h));
    const SecondVariation::Jacobi J = sv.jacobi(t);
    return (Wd - J.C + W * J.A + J.A.transpose() * W + W * J.B * W).max_norm();
}

struct RiccatiStats {
    double max_relative_residual = 0.0; ///< residual / (1 + |W|^2)
    double max_residual = 0.0;
    double max_symmetry_defect = 0.0;
};

/// Residual and symmetry of W = Z Y^-1 at interior sample points.
inline RiccatiStats riccati_stats(const SecondVariation& sv, const ConjoinedBasis& b, std::size_t samples = 64) {
    RiccatiStats s;
    const double T = b.t_end();
    const double h0 = 1e-3 * T;
    for (std::size_t i = 1; i < samples; ++i) {
        const double t = 3 * h0 + (T - 6 * h0) * static_cast<double>(i) / static_cast<double>(samples);
        // W has a pole at t = 0 for the principal basis; shrink the step near it.
        const double h = std::min(h0, 1e-2 * t);
        const Mat W = riccati_W(b, t);
        const double r = riccati_residual(sv, b, t, h);
        const double w = W.max_norm();
        s.max_residual = std::max(s.max_residual, r);
        s.max_relative_residual = std::max(s.max_relative_residual, r / (1.0 + w * w));
        s.max_symmetry_defect = std::max(s.max_symmetry_defect, W.asymmetry() / std::max(1.0, w));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Boundary form on a fundamental domain [0, tau]

/// Exact quadratic form of the second variation restricted to Jacobi fields
/// with y(0) = xi and y(tau) = S xi:  Q = xi^T Gamma xi, where
/// Gamma = N' - G' - G'^T,  G' = Y0(tau)^-1 S,  N' = S^T Z0 Y0^-1 S + Y0^-1 Y1.
/// Every variation of the loop class with the same endpoint value has
/// Q >= xi^T Gamma xi when no conjugate point lies in (0, tau].
struct BoundaryForm {
    double tau = 0.0;
    Mat S;
    Mat Y0, Z0, Y1, Z1; ///< principal and complementary bases at tau
    Mat G;              ///< Y0(tau)^-1
    Mat Mtau;           ///< Y0^-1 Y1 (symmetric)
    Mat Nprime, Gprime, Gamma;
};

inline BoundaryForm boundary_form(const ConjoinedBasis& principal, const ConjoinedBasis& complement, const Mat& S) {
    BoundaryForm f;
    f.tau = principal.t_end();
    f.S = S;
    principal.eval(f.tau, f.Y0, f.Z0);
    complement.eval(f.tau, f.Y1, f.Z1);
    f.G = inverse(f.Y0);
    f.Mtau = (f.G * f.Y1).symmetrized();
    const Mat W0 = (f.Z0 * f.G).symmetrized();
    f.Nprime = (S.transpose() * W0 * S + f.Mtau).symmetrized();
    f.Gprime = f.G * S;
    f.Gamma = (f.Nprime - f.Gprime - f.Gprime.transpose()).symmetrized();
    return f;
}

inline DefinitenessResult restricted_definiteness(const Mat& m, const Mat& slice, double tol) {
    return classify_definiteness((slice.transpose() * m * slice).symmetrized(), tol);
}

// ---------------------------------------------------------------------------
// Boundary LMI:  find K > 0 with
//   [[Pi^T (N' - K) Pi, Pi^T G'^T], [G' Pi, K]] > 0,
// equivalently a Riccati solution W with W(0) = K - M(tau) that stays finite on
// [0, tau] and satisfies Pi^T (S^T W(tau) S - W(0)) Pi > 0.

struct LmiResult {
    bool converged = false;
    double margin = 0.0; ///< largest t with F(K) - t I > 0 found
    Mat K;
    int newton_steps = 0;
};

namespace detail {
inline Mat sym_unit(std::size_t n, std::size_t i, std::size_t j) {
    Mat E(n, n);
    E(i, j) = 1.0;
    E(j, i) = 1.0;
    return E;
}

inline std::optional<Mat> chol_inverse(const Mat& H) {
    const auto L = cholesky(H);
    if (!L) return std::nullopt;
    const std::size_t n = H.rows();
    Mat Linv(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == c) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= (*L)(i, k) * Linv(k, c);
            Linv(i, c) = s / (*L)(i, i);
        }
    }
    return Linv.transpose() * Linv;
}

inline double chol_logdet(const Mat& H, bool& ok) {
    const auto L = cholesky(H);
    ok = L.has_value();
    if (!ok) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < H.rows(); ++i) s += 2.0 * std::log((*L)(i, i));
    return s;
}
} // namespace detail

inline LmiResult solve_boundary_lmi(const Mat& Nprime, const Mat& Gprime, const Mat& slice) {
    const std::size_t n = Nprime.rows(), m = slice.cols();
    const std::size_t dF = m + n, dH = dF + n;
    const double kappa = 1e3 * std::max({1.0, Nprime.max_norm(), Gprime.max_norm()});

    // H(x) = H0 + sum_k x_k H_k with x = (upper triangle of K, t).
    std::vector<Mat> Hk;
    Mat H0(dH, dH);
    H0.set_block(0, 0, (slice.transpose() * Nprime * slice).symmetrized());
    const Mat off = Gprime * slice;
    H0.set_block(m, 0, off);
    H0.set_block(0, m, off.transpose());
    for (std::size_t i = 0; i < n; ++i) H0(dF + i, dF + i) = kappa;
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) idx.emplace_back(i, j);
    for (const auto& [i, j] : idx) {
        const Mat E = detail::sym_unit(n, i, j);
        Mat H(dH, dH);
        H.set_block(0, 0, -(slice.transpose() * E * slice));
        H.set_block(m, m, E);
        H.set_block(dF, dF, -E);
        Hk.push_back(H);
    }
    {
        Mat Ht(dH, dH);
        for (std::size_t i = 0; i < dF; ++i) Ht(i, i) = -1.0;
        Hk.push_back(Ht);
    }
    const std::size_t nv = Hk.size();
    auto assemble = [&](const Vec& x) {
        Mat H = H0;
        for (std::size_t k = 0; k < nv; ++k)
            if (x[k] != 0.0) H += x[k] * Hk[k];
        return H;
    };

    // Start from K = kappa/2 Id and t below the smallest eigenvalue.
    Vec x(nv, 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k)
        if (idx[k].first == idx[k].second) x[k] = 0.5 * kappa;
    x[nv - 1] = 0.0;
    {
        Mat F = assemble(x).block(0, 0, dF, dF);
        x[nv - 1] = symmetric_eigen(F).values.front() - 1.0;
    }

    LmiResult res;
    double mu = 1.0;
    auto objective = [&](const Vec& y, bool& ok) {
        const double ld = detail::chol_logdet(assemble(y), ok);
        return -y[nv - 1] - mu * ld;
    };
    for (int outer = 0; outer < 60 && mu > 1e-12; ++outer) {
        for (int it = 0; it < 80; ++it) {
            const auto Hinv = detail::chol_inverse(assemble(x));
            if (!Hinv) break;
            std::vector<Mat> HiHk(nv);
            for (std::size_t k = 0; k < nv; ++k) HiHk[k] = *Hinv * Hk[k];
            Vec g(nv);
            Mat Hess(nv, nv);
            for (std::size_t k = 0; k < nv; ++k) {
                g[k] = -mu * HiHk[k].trace() - (k == nv - 1 ? 1.0 : 0.0);
                for (std::size_t l = k; l < nv; ++l) {
                    double tr = 0.0;
                    for (std::size_t a = 0; a < dH; ++a)
                        for (std::size_t b = 0; b < dH; ++b) tr += HiHk[k](a, b) * HiHk[l](b, a);
                    Hess(k, l) = Hess(l, k) = mu * tr;
                }
            }
            for (std::size_t k = 0; k < nv; ++k) Hess(k, k) += 1e-14 * (1.0 + Hess(k, k));
            Vec step;
            try {
                const Mat d = solve(Hess, Mat::column(g)).x;
                step = d.col(0);
            } catch (const Error&) {
                break;
            }
            const double decrement = dot(step, g);
            if (decrement < 0.5e-10 * std::max(1.0, mu)) break;
            bool ok0 = false;
            const double f0 = objective(x, ok0);
            double a = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vec y = x;
                for (std::size_t k = 0; k < nv; ++k) y[k] -= a * step[k];
                bool ok = false;
                const double f1 = objective(y, ok);
                if (ok && f1 <= f0 - 0.25 * a * decrement) {
                    x = std::move(y);
                    moved = true;
                    break;
                }
                a *= 0.5;
            }
            ++res.newton_steps;
            if (!moved) break;
        }
        mu *= 0.2;
    }
    res.converged = true;
    res.margin = x[nv - 1];
    res.K = Mat(n, n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto [i, j] = idx[k];
        res.K(i, j) = res.K(j, i) = x[k];
    }
    return res;
}

// ---------------------------------------------------------------------------
// Condition (SR) and its symmetric version

enum class EpsStatus { Passed, SingularY, BoundaryNotPositive, RiccatiResidual, AsymmetricW, IntegrationFailed };

constexpr std::string_view to_string(EpsStatus s) {
    switch (s) {
    case EpsStatus::Passed: return "PASSED";
    case EpsStatus::SingularY: return "SINGULAR_Y";
    case EpsStatus::BoundaryNotPositive: return "BOUNDARY_NOT_POSITIVE";
    case EpsStatus::RiccatiResidual: return "RICCATI_RESIDUAL";
    case EpsStatus::AsymmetricW: return "ASYMMETRIC_W";
    case EpsStatus::IntegrationFailed: return "INTEGRATION_FAILED";
    }
    return "?";
}

struct EpsTrial {
    double eps = 0.0;
    EpsStatus status = EpsStatus::IntegrationFailed;
    double singular_time = -1.0;
    double boundary_min_eig = 0.0;
    double riccati_residual = 0.0; ///< relative to 1 + |W|^2
    double symmetry_defect = 0.0;
    std::string detail;
};

struct LmiTrial {
    bool attempted = false;
    bool feasible = false;
    bool verified = false;
    double margin = 0.0;
    std::size_t slice_dim = 0;
    Mat W0;
    double boundary_min_eig = 0.0;
    double riccati_residual = 0.0;
    double min_rel_det_Y = 0.0;
    std::string detail;
};

enum class SrStatus { Holds, HoldsOnSlice, Fails };

constexpr std::string_view to_string(SrStatus s) {
    switch (s) {
    case SrStatus::Holds: return "HOLDS";
    case SrStatus::HoldsOnSlice: return "HOLDS_ON_SLICE";
    case SrStatus::Fails: return "FAILS";
    }
    return "?";
}

struct SRResult {
    SrStatus status = SrStatus::Fails;
    std::string route; ///< "epsilon", "boundary_lmi" or "none"
    double tau = 0.0;
    int M = 1;
    std::vector<EpsTrial> trace;
    LmiTrial lmi;
    bool symmetry_checked = false;
    double momentum_defect = 0.0;
    double equivariance_defect = 0.0;
    std::string reason;

    bool holds() const noexcept { return status != SrStatus::Fails; }
};

struct SrOptions {
    std::vector<double> eps_schedule{1e-2, 3e-3, 1e-3, 3e-4};
    IntegratorOpts integ = default_basis_opts();
    std::size_t samples = kDefaultGrid;
    double tol_definite = 1e-9;
    double tol_riccati = 1e-6; ///< relative to 1 + |W|^2
    double tol_symmetry = 1e-8;
    double tol_equivariance = 1e-8;
    bool try_lmi = true;
    std::optional<Mat> slice; ///< columns spanning the tested subspace (default: all)
};

namespace detail {

inline EpsTrial sr_epsilon_trial(const SecondVariation& sv, double tau, const Mat& S, double eps, const SrOptions& o) {
    const std::size_t n = sv.dim();
    EpsTrial tr;
    tr.eps = eps;
    std::optional<ConjoinedBasis> b;
    try {
        b = integrate_basis(sv, -eps * Mat::identity(n), Mat::identity(n), tau, o.integ);
    } catch (const Error& e) {
        tr.status = EpsStatus::IntegrationFailed;
        tr.detail = e.what();
        return tr;
    }
    ZeroOpts zo;
    zo.samples = o.samples;
    auto dz = locate_zeros([&](double t) { return b->det_Y(t); }, 0.0, tau, zo);
    // The zero of Y = -eps Id + t B near t ~ eps can fall inside the first scan
    // interval; resolve [0, first sample] finely.
    if (dz.empty()) {
        ZeroOpts fine = zo;
        fine.samples = 4096;
        dz = locate_zeros([&](double t) { return b->det_Y(t); }, 0.0, tau / static_cast<double>(o.samples), fine);
    }
    if (!dz.empty()) {
        tr.status = EpsStatus::SingularY;
        tr.singular_time = dz.front().t;
        tr.detail = "det Y_eps vanishes at t=" + num_str(dz.front().t);
        return tr;
    }
    const RiccatiStats rs = riccati_stats(sv, *b);
    tr.riccati_residual = rs.max_relative_residual;
    tr.symmetry_defect = rs.max_symmetry_defect;
    if (rs.max_symmetry_defect > o.tol_symmetry) {
        tr.status = EpsStatus::AsymmetricW;
        return tr;
    }
    if (rs.max_relative_residual > o.tol_riccati) {
        tr.status = EpsStatus::RiccatiResidual;
        return tr;
    }
    const Mat WT = riccati_W(*b, tau).symmetrized();
    const Mat W0 = riccati_W(*b, 0.0).symmetrized();
    const Mat slice = o.slice ? *o.slice : Mat::identity(n);
    const DefinitenessResult d = restricted_definiteness(S.transpose() * WT * S - W0, slice, o.tol_definite);
    tr.boundary_min_eig = d.min_eigenvalue;
    tr.status = d.kind == Definiteness::Positive ? EpsStatus::Passed : EpsStatus::BoundaryNotPositive;
    return tr;
}

inline LmiTrial sr_lmi_trial(const SecondVariation& sv, double tau, const Mat& S, const SrOptions& o) {
    const std::size_t n = sv.dim();
    LmiTrial L;
    L.attempted = true;
    const Mat slice = o.slice ? *o.slice : Mat::identity(n);
    L.slice_dim = slice.cols();
    ConjoinedBasis p = principal_basis(sv, tau, o.integ);
    ConjoinedBasis c = complementary_basis(sv, tau, o.integ);
    BoundaryForm bf;
    try {
        bf = boundary_form(p, c, S);
    } catch (const Error& e) {
        L.detail = std::string("boundary data unavailable: ") + e.what();
        return L;
    }
    const LmiResult r = solve_boundary_lmi(bf.Nprime, bf.Gprime, slice);
    L.margin = r.margin;
    const double scale = 1.0 + std::max(bf.Nprime.max_norm(), bf.Gprime.max_norm());
    L.feasible = r.margin > 1e-8 * scale;
    if (!L.feasible) {
        L.detail = "no feasible initial value found (margin " + std::to_string(r.margin) + ")";
        return L;
    }
    L.W0 = (r.K - bf.Mtau).symmetrized();
    std::optional<ConjoinedBasis> b;
    try {
        b = integrate_basis(sv, Mat::identity(n), L.W0, tau, o.integ);
    } catch (const Error& e) {
        L.detail = e.what();
        return L;
    }
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    bool pos = true, neg = true;
    for (std::size_t i = 0; i <= o.samples; ++i) {
        const double d = b->det_Y(tau * static_cast<double>(i) / static_cast<double>(o.samples));
        dmin = std::min(dmin, std::abs(d));
        dmax = std::max(dmax, std::abs(d));
        pos = pos && d > 0;
        neg = neg && d < 0;
    }
    L.min_rel_det_Y = dmax > 0 ? dmin / dmax : 0.0;
    if (!(pos || neg) || L.min_rel_det_Y < 1e-12) {
        L.detail = "Y becomes singular for the candidate initial value";
        return L;
    }
    const RiccatiStats rs = riccati_stats(sv, *b);
    L.riccati_residual = rs.max_relative_residual;
    const Mat WT = riccati_W(*b, tau).symmetrized();
    const DefinitenessResult d = restricted_definiteness(S.transpose() * WT * S - L.W0, slice, o.tol_definite);
    L.boundary_min_eig = d.min_eigenvalue;
    L.verified = d.kind == Definiteness::Positive && rs.max_relative_residual < o.tol_riccati &&
                 rs.max_symmetry_defect < o.tol_symmetry;
    if (!L.verified) L.detail = "integrated candidate failed the boundary or residual test";
    return L;
}

inline SRResult sr_core(const SecondVariation& sv, double tau, const Mat& S, int M, const SrOptions& o) {
    SRResult r;
    r.tau = tau;
    r.M = M;
    for (double eps : o.eps_schedule) r.trace.push_back(sr_epsilon_trial(sv, tau, S, eps, o));
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
        if (r.trace[i].status == EpsStatus::Passed && r.trace[i + 1].status == EpsStatus::Passed) {
            r.status = o.slice ? SrStatus::HoldsOnSlice : SrStatus::Holds;
            r.route = "epsilon";
            return r;
        }
    }
    if (o.try_lmi) {
        r.lmi = sr_lmi_trial(sv, tau, S, o);
        if (r.lmi.verified) {
            const bool full = !o.slice || o.slice->cols() == sv.dim();
            r.status = full ? SrStatus::Holds : SrStatus::HoldsOnSlice;
            r.route = "boundary_lmi";
            return r;
        }
    }
    r.route = "none";
    r.reason = "no epsilon in the schedule produced a nonsingular Y_eps with a positive boundary term";
    if (r.lmi.attempted) r.reason += "; boundary search: " + r.lmi.detail;
    return r;
}

} // namespace detail

/// Condition (SR) on [0, t_end].
inline SRResult check_SR(const SecondVariation& sv, double t_end, const SrOptions& o = {}) {
    return detail::sr_core(sv, t_end, Mat::identity(sv.dim()), 1, o);
}

/// Symmetric condition S^T W(T/M) S - W(0) > 0 on [0, T/M]. When the second
/// variation carries its trajectory, the momentum matching p(0) = S^T p(T/M)
/// and the equivariance of L are verified too.
inline SRResult check_SR_star(const SecondVariation& sv, const Mat& S, int M, const SrOptions& o = {}) {
    if (M < 1) throw Error(ErrorKind::InvalidArgument, "M must be >= 1");
    if (!S.square() || S.rows() != sv.dim()) throw Error(ErrorKind::InvalidArgument, "S has wrong shape");
    if (orthogonality_defect(S) > 1e-10) throw Error(ErrorKind::InvalidArgument, "S is not orthogonal");
    const double tau = sv.period() / M;
    double mom = 0.0, eqv = 0.0;
    bool checked = false;
    if (sv.trajectory()) {
        const SymmetrySpec spec{M, S};
        mom = momentum_matching_defect(*sv.trajectory(), spec);
        eqv = equivariance_defect(*sv.trajectory(), spec);
        checked = true;
        if (eqv > o.tol_equivariance)
            throw Error(ErrorKind::EquivarianceFailure, "L is not S-equivariant (defect " + num_str(eqv) + ")");
    }
    SRResult r = detail::sr_core(sv, tau, S, M, o);
    r.symmetry_checked = checked;
    r.momentum_defect = mom;
    r.equivariance_defect = eqv;
    return r;
}

} // namespace orbmin
