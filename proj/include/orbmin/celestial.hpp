#pragma once

// Kepler problem with an alpha-homogeneous potential, the planar N-body problem
// with unit masses, and the reference orbits studied with them.

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "orbmin/error.hpp"
#include "orbmin/numeric.hpp"
#include "orbmin/odeflow.hpp"
#include "orbmin/smallmat.hpp"
#include "orbmin/varcalc.hpp"

namespace orbmin {

/// Planar rotation generator [[0,-1],[1,0]].
inline Mat rotation_generator() { return Mat::from_rows({{0.0, -1.0}, {1.0, 0.0}}); }

/// L = |v|^2 / 2 + 1 / |u|^alpha in the plane.
class KeplerAlpha : public MechanicalModel {
public:
    explicit KeplerAlpha(double alpha) : alpha_(alpha) {
        if (!(alpha > 0) || !std::isfinite(alpha))
            throw Error(ErrorKind::AlphaOutOfRange, "alpha must be positive, got " + num_str(alpha));
    }

    double alpha() const noexcept { return alpha_; }
    std::size_t dim() const override { return 2; }
    std::string name() const override { return "kepler_alpha"; }

    double potential(CSpan u) const override { return -std::pow(radius(u), -alpha_); }
    Vec potential_grad(CSpan u) const override {
        const double r = radius(u);
        const double c = alpha_ * std::pow(r, -alpha_ - 2.0);
        return {c * u[0], c * u[1]};
    }
    /// Hessian of U = -r^-alpha:  alpha r^-(alpha+2) Id - alpha (alpha+2) r^-(alpha+4) u u^T.
    Mat potential_hess(CSpan u) const override {
        const double r = radius(u);
        const double a = alpha_ * std::pow(r, -alpha_ - 2.0);
        const double b = alpha_ * (alpha_ + 2.0) * std::pow(r, -alpha_ - 4.0);
        return Mat::from_rows({{a - b * u[0] * u[0], -b * u[0] * u[1]}, {-b * u[1] * u[0], a - b * u[1] * u[1]}});
    }
    bool admissible(double, CSpan u) const override { return radius(u) > 0.0; }
    std::vector<SymmetryGenerator> symmetry_generators() const override {
        return {{"rotation", rotation_generator(), Vec(2, 0.0)}};
    }

private:
    static double radius(CSpan u) { return std::hypot(u[0], u[1]); }
    double alpha_;
};

/// Planar N-body problem with unit masses:  L = sum |v_i|^2 / 2 + sum_{i<j} 1 / |u_i - u_j|.
/// Coordinates are ordered (x1, y1, x2, y2, ...).
class NBodyPlanar : public MechanicalModel {
public:
    explicit NBodyPlanar(std::size_t bodies) : N_(bodies) {
        if (bodies < 2) throw Error(ErrorKind::InvalidArgument, "N-body needs at least two bodies");
    }

    std::size_t bodies() const noexcept { return N_; }
    std::size_t dim() const override { return 2 * N_; }
    std::string name() const override { return "nbody"; }

    double potential(CSpan u) const override {
        double U = 0.0;
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = i + 1; j < N_; ++j) U -= 1.0 / dist(u, i, j);
        return U;
    }
    Vec potential_grad(CSpan u) const override {
        Vec g(dim(), 0.0);
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = i + 1; j < N_; ++j) {
                const double dx = u[2 * i] - u[2 * j], dy = u[2 * i + 1] - u[2 * j + 1];
                const double r = std::hypot(dx, dy);
                const double c = 1.0 / (r * r * r);
                g[2 * i] += c * dx;
                g[2 * i + 1] += c * dy;
                g[2 * j] -= c * dx;
                g[2 * j + 1] -= c * dy;
            }
        return g;
    }
    /// Pair blocks h = I / r^3 - 3 d d^T / r^5 added on the diagonal and
    /// subtracted off the diagonal.
    Mat potential_hess(CSpan u) const override {
        Mat H(dim(), dim());
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = i + 1; j < N_; ++j) {
                const double d[2] = {u[2 * i] - u[2 * j], u[2 * i + 1] - u[2 * j + 1]};
                const double r = std::hypot(d[0], d[1]);
                const double r3 = r * r * r, r5 = r3 * r * r;
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b) {
                        const double h = (a == b ? 1.0 / r3 : 0.0) - 3.0 * d[a] * d[b] / r5;
                        H(2 * i + a, 2 * i + b) += h;
                        H(2 * j + a, 2 * j + b) += h;
                        H(2 * i + a, 2 * j + b) -= h;
                        H(2 * j + a, 2 * i + b) -= h;
                    }
            }
        return H;
    }
    bool admissible(double, CSpan u) const override {
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = i + 1; j < N_; ++j)
                if (!(dist(u, i, j) > 0.0)) return false;
        return true;
    }
    std::vector<SymmetryGenerator> symmetry_generators() const override {
        const std::size_t n = dim();
        Vec ex(n, 0.0), ey(n, 0.0);
        Mat J(n, n);
        for (std::size_t i = 0; i < N_; ++i) {
            ex[2 * i] = 1.0;
            ey[2 * i + 1] = 1.0;
            J(2 * i, 2 * i + 1) = -1.0;
            J(2 * i + 1, 2 * i) = 1.0;
        }
        return {{"translation_x", Mat(n, n), ex}, {"translation_y", Mat(n, n), ey}, {"rotation", J, Vec(n, 0.0)}};
    }

    /// Sum of velocities.
    Vec linear_momentum(CSpan v) const {
        Vec p(2, 0.0);
        for (std::size_t i = 0; i < N_; ++i) {
            p[0] += v[2 * i];
            p[1] += v[2 * i + 1];
        }
        return p;
    }
    /// Sum of u_i x v_i.
    double angular_momentum(CSpan u, CSpan v) const {
        double c = 0.0;
        for (std::size_t i = 0; i < N_; ++i) c += u[2 * i] * v[2 * i + 1] - u[2 * i + 1] * v[2 * i];
        return c;
    }

private:
    static double dist(CSpan u, std::size_t i, std::size_t j) {
        return std::hypot(u[2 * i] - u[2 * j], u[2 * i + 1] - u[2 * j + 1]);
    }
    std::size_t N_;
};

/// Loop symmetry u(t + T/M) = S u(t).
struct SymmetrySpec {
    int M = 1;
    Mat S;
};

// ---------------------------------------------------------------------------
// Circular orbits and closed-form actions

struct CircularParams {
    double omega = 0.0;
    double radius = 0.0;
};

/// omega = 2 pi k / T and radius a = (alpha / omega^2)^(1 / (2 + alpha)).
inline CircularParams circular_params(double alpha, double T, int k) {
    if (!(alpha > 0)) throw Error(ErrorKind::AlphaOutOfRange, "alpha must be positive");
    if (!(T > 0)) throw Error(ErrorKind::InvalidArgument, "period must be positive");
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "winding count must be nonzero");
    const double w = 2.0 * std::numbers::pi * k / T;
    return {w, std::pow(alpha / (w * w), 1.0 / (2.0 + alpha))};
}

/// u(t) = a (cos wt, sin wt), sampled in closed form.
inline Trajectory circular_orbit(double alpha, double T, int k, std::size_t grid = kDefaultGrid) {
    const CircularParams c = circular_params(alpha, T, k);
    auto model = std::make_shared<KeplerAlpha>(alpha);
    return Trajectory::from_sampler(
        model, T,
        [c](double t, std::span<double> u, std::span<double> v) {
            const double ct = std::cos(c.omega * t), st = std::sin(c.omega * t);
            u[0] = c.radius * ct;
            u[1] = c.radius * st;
            v[0] = -c.radius * c.omega * st;
            v[1] = c.radius * c.omega * ct;
        },
        grid);
}

inline void require_alpha_open_0_2(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw Error(ErrorKind::AlphaOutOfRange, "alpha must lie in (0, 2), got " + num_str(alpha));
}

/// Action of the k-circular solution of period T:
/// |k|^(2a/(2+a)) (2+a) (T/2)^((2-a)/(2+a)) (pi^2/a)^(a/(2+a)).
inline double action_k_circular(double alpha, double T, int k) {
    require_alpha_open_0_2(alpha);
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "winding count must be nonzero");
    const double a = alpha, pi = std::numbers::pi;
    return std::pow(std::abs(static_cast<double>(k)), 2 * a / (2 + a)) * (2 + a) * std::pow(T / 2, (2 - a) / (2 + a)) *
           std::pow(pi * pi / a, a / (2 + a));
}

/// int_0^{2 pi} |sin t|^p dt by adaptive Simpson on [0, pi/2] (symmetry x4).
inline double sine_power_integral(double p) {
    const double q = adaptive_simpson([p](double t) { return std::pow(std::sin(t), p); }, 0.0,
                                      0.5 * std::numbers::pi, 1e-14, 60);
    return 4.0 * q;
}

/// Action of the collision-ejection solution of period T:
/// ((2+a)/(2-a)) (2 a^2)^(-a/(2+a)) T^((2-a)/(2+a)) (int_0^{2pi} |sin t|^(2/a) dt)^(2a/(2+a)).
inline double action_collision_ejection(double alpha, double T) {
    require_alpha_open_0_2(alpha);
    const double a = alpha;
    const double I = sine_power_integral(2.0 / a);
    return (2 + a) / (2 - a) * std::pow(2 * a * a, -a / (2 + a)) * std::pow(T, (2 - a) / (2 + a)) *
           std::pow(I, 2 * a / (2 + a));
}

// ---------------------------------------------------------------------------
// Figure-eight choreography

struct FigureEight {
    Trajectory trajectory;
    SymmetrySpec symmetry;
};

inline constexpr double kEightPeriod = 6.32591398292621;

/// Dihedral symmetry matrix of the figure-eight: body i at t + T/6 is body i+1
/// at t reflected by G = diag(-1, 1).
inline Mat figure_eight_symmetry() {
    Mat S(6, 6);
    const Mat G = Mat::diag({-1.0, 1.0});
    S.set_block(0, 2, G);
    S.set_block(2, 4, G);
    S.set_block(4, 0, G);
    return S;
}

inline Vec figure_eight_initial_state() {
    const double x1 = 0.97000435669734, y1 = -0.24308753153583;
    const double vx3 = -0.93240737144104, vy3 = -0.86473146092102;
    return {x1, y1, -x1, -y1, 0.0, 0.0, -vx3 / 2, -vy3 / 2, -vx3 / 2, -vy3 / 2, vx3, vy3};
}

inline FigureEight figure_eight(IntegratorOpts opts = {.method = Method::Dp54Adaptive, .step = 0.0, .rtol = 1e-12,
                                                       .atol = 1e-14},
                                std::size_t grid = kDefaultGrid) {
    const Vec s = figure_eight_initial_state();
    auto model = std::make_shared<NBodyPlanar>(3);
    Trajectory tr = Trajectory::integrate(model, Vec(s.begin(), s.begin() + 6), Vec(s.begin() + 6, s.end()),
                                          kEightPeriod, opts, grid);
    return {std::move(tr), {6, figure_eight_symmetry()}};
}

// ---------------------------------------------------------------------------
// Diagnostics

/// Turns of (u_0, u_1) - center over one period, unwrapped on the grid.
inline int winding_number(const Trajectory& tr, const Vec& center = {0.0, 0.0}) {
    const std::size_t N = tr.grid_size() * 4;
    double prev = 0.0, total = 0.0, min_r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= N; ++i) {
        const Vec u = tr.position(tr.period() * static_cast<double>(i) / static_cast<double>(N));
        const double x = u[0] - center[0], y = u[1] - center[1];
        const double r = std::hypot(x, y);
        min_r = std::min(min_r, r);
        if (r < 1e-12 * (1.0 + tr.max_abs_position()))
            throw Error(ErrorKind::CenterOnPath, "trajectory passes through the center");
        const double ang = std::atan2(y, x);
        if (i > 0) {
            double d = ang - prev;
            while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
            while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
            if (std::abs(d) > 0.5 * std::numbers::pi)
                throw Error(ErrorKind::InvalidArgument, "grid too coarse to unwrap the angle");
            total += d;
        }
        prev = ang;
    }
    return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

/// max_t |u(t + T/M) - S u(t)| on the grid.
inline double symmetry_defect(const Trajectory& tr, const SymmetrySpec& sym) {
    const double shift = tr.period() / sym.M;
    double d = 0.0;
    for (std::size_t i = 0; i <= tr.grid_size(); ++i) {
        const double t = tr.grid_time(i);
        const Vec a = tr.position(t + shift);
        const Vec b = sym.S * tr.position(t);
        for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

/// Defect of the three-body relation u1(t) = u1(-t), u2(t) = u3(-t),
/// u3(t) = u2(-t): time reversal with a body swap and no reflection.
inline double time_reversal_defect(const Trajectory& tr) {
    double d = 0.0;
    for (std::size_t i = 0; i <= tr.grid_size(); ++i) {
        const double t = tr.grid_time(i);
        const Vec a = tr.position(t), b = tr.position(-t);
        const std::size_t map[3] = {0, 2, 1};
        for (std::size_t body = 0; body < 3; ++body)
            for (std::size_t c = 0; c < 2; ++c) d = std::max(d, std::abs(a[2 * body + c] - b[2 * map[body] + c]));
    }
    return d;
}

/// max_t |p(t + T/M) - S p(t)| for p = L_v; zero momentum mismatch at the
/// fundamental-domain boundary means p(0) = S^T p(T/M).
inline double momentum_matching_defect(const Trajectory& tr, const SymmetrySpec& sym) {
    const std::size_t n = tr.dim();
    Vec u(n), v(n);
    tr.eval(0.0, u, v);
    const Vec p0 = tr.model().grad_v(0.0, u, v);
    const double tau = tr.period() / sym.M;
    tr.eval(tau, u, v);
    const Vec p1 = tr.model().grad_v(tau, u, v);
    const Vec back = sym.S.transpose() * p1;
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(p0[k] - back[k]));
    return d;
}

/// max over grid points of |L_v(Su, Sv) - S L_v(u, v)| and |L(Su, Sv) - L(u, v)|.
inline double equivariance_defect(const Trajectory& tr, const SymmetrySpec& sym) {
    const std::size_t n = tr.dim();
    const LagrangianModel& m = tr.model();
    Vec u(n), v(n);
    double d = 0.0;
    const std::size_t N = std::min<std::size_t>(tr.grid_size(), 256);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = tr.period() * static_cast<double>(i) / static_cast<double>(N);
        tr.eval(t, u, v);
        const Vec su = sym.S * u, svv = sym.S * v;
        const Vec lhs = m.grad_v(t, su, svv);
        const Vec rhs = sym.S * m.grad_v(t, u, v);
        for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(lhs[k] - rhs[k]));
        d = std::max(d, std::abs(m.lagrangian(t, su, svv) - m.lagrangian(t, u, v)));
    }
    return d;
}

/// Relative drift max |E(t) - E(0)| / max(1, |E(0)|) of the energy over one period.
inline double energy_drift(const Trajectory& tr) {
    const std::size_t n = tr.dim();
    Vec u(n), v(n);
    tr.eval(0.0, u, v);
    const double e0 = tr.model().energy(0.0, u, v);
    double d = 0.0;
    for (std::size_t i = 0; i <= tr.grid_size(); ++i) {
        const double t = tr.grid_time(i);
        tr.eval(t, u, v);
        d = std::max(d, std::abs(tr.model().energy(t, u, v) - e0));
    }
    return d / std::max(1.0, std::abs(e0));
}

} // namespace orbmin
