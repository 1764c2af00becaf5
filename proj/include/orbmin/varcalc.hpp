#pragma once

// Lagrangian models, periodic trajectories, second-variation coefficients and
// the pointwise tests (Legendre, regularity, Weierstrass) evaluated along them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbmin/error.hpp"
#include "orbmin/numeric.hpp"
#include "orbmin/odeflow.hpp"
#include "orbmin/smallmat.hpp"

namespace orbmin {

using CSpan = std::span<const double>;

/// Affine infinitesimal symmetry g(u) = X u + b of an autonomous Lagrangian.
/// Along a solution u0 it yields the Jacobi field g(t) = X u0(t) + b.
struct SymmetryGenerator {
    std::string name;
    Mat X;
    Vec b;
};

/// Problem definition: L(t, u, v) with analytic first and second derivatives.
/// hess_uv(i, j) = d^2 L / du_i dv_j.
class LagrangianModel {
public:
    virtual ~LagrangianModel() = default;

    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;

    virtual double lagrangian(double t, CSpan u, CSpan v) const = 0;
    virtual Vec grad_u(double t, CSpan u, CSpan v) const = 0;
    virtual Vec grad_v(double t, CSpan u, CSpan v) const = 0;
    virtual Mat hess_uu(double t, CSpan u, CSpan v) const = 0;
    virtual Mat hess_uv(double t, CSpan u, CSpan v) const = 0;
    virtual Mat hess_vv(double t, CSpan u, CSpan v) const = 0;

    /// True when L = |v|^2 / 2 - U(u).
    virtual bool is_mechanical() const { return false; }
    virtual bool is_autonomous() const { return true; }
    /// False where L is undefined (collisions).
    virtual bool admissible(double /*t*/, CSpan /*u*/) const { return true; }
    /// Linear symmetries beyond time translation.
    virtual std::vector<SymmetryGenerator> symmetry_generators() const { return {}; }

    /// Acceleration from the Euler-Lagrange equation of an autonomous L:
    /// L_vv a = L_u - L_vu v.
    virtual Vec acceleration(double t, CSpan u, CSpan v) const {
        const Vec lu = grad_u(t, u, v);
        const Mat luv = hess_uv(t, u, v);
        Vec rhs = lu;
        const Vec corr = luv.transpose() * v;
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= corr[i];
        const Mat x = solve(hess_vv(t, u, v), Mat::column(rhs)).x;
        return x.col(0);
    }

    /// First-order flow on the state (u, v).
    VectorField flow() const {
        return [this](double t, std::span<const double> y, std::span<double> dy) {
            const std::size_t n = dim();
            const CSpan u = y.subspan(0, n), v = y.subspan(n, n);
            const Vec a = acceleration(t, u, v);
            std::copy(v.begin(), v.end(), dy.begin());
            std::copy(a.begin(), a.end(), dy.begin() + static_cast<std::ptrdiff_t>(n));
        };
    }

    /// v . L_v - L.
    double energy(double t, CSpan u, CSpan v) const { return dot(v, grad_v(t, u, v)) - lagrangian(t, u, v); }
};

/// L = |v|^2 / 2 - U(u).
class MechanicalModel : public LagrangianModel {
public:
    virtual double potential(CSpan u) const = 0;
    virtual Vec potential_grad(CSpan u) const = 0;
    virtual Mat potential_hess(CSpan u) const = 0;

    double lagrangian(double, CSpan u, CSpan v) const override { return 0.5 * dot(v, v) - potential(u); }
    Vec grad_u(double, CSpan u, CSpan) const override {
        Vec g = potential_grad(u);
        for (double& x : g) x = -x;
        return g;
    }
    Vec grad_v(double, CSpan, CSpan v) const override { return Vec(v.begin(), v.end()); }
    Mat hess_uu(double, CSpan u, CSpan) const override { return -potential_hess(u); }
    Mat hess_uv(double, CSpan, CSpan) const override { return Mat(dim(), dim()); }
    Mat hess_vv(double, CSpan, CSpan) const override { return Mat::identity(dim()); }
    bool is_mechanical() const override { return true; }
    Vec acceleration(double, CSpan u, CSpan) const override {
        Vec g = potential_grad(u);
        for (double& x : g) x = -x;
        return g;
    }
};

/// L = u.P u / 2 + v.Q u + v.R v / 2 with constant matrices.
class QuadraticModel : public LagrangianModel {
public:
    QuadraticModel(Mat P, Mat Q, Mat R, std::string name = "quadratic")
        : P_(std::move(P)), Q_(std::move(Q)), R_(std::move(R)), name_(std::move(name)) {
        const std::size_t n = P_.rows();
        if (!P_.square() || Q_.rows() != n || Q_.cols() != n || R_.rows() != n || R_.cols() != n)
            throw Error(ErrorKind::InvalidArgument, "quadratic model: inconsistent shapes");
        if (P_.asymmetry() > kTolSym || R_.asymmetry() > kTolSym)
            throw Error(ErrorKind::NotSymmetric, "quadratic model: P and R must be symmetric");
    }

    std::size_t dim() const override { return P_.rows(); }
    std::string name() const override { return name_; }
    double lagrangian(double, CSpan u, CSpan v) const override {
        return 0.5 * dot(u, P_ * u) + dot(v, Q_ * u) + 0.5 * dot(v, R_ * v);
    }
    Vec grad_u(double, CSpan u, CSpan v) const override {
        Vec g = P_ * u;
        const Vec q = Q_.transpose() * v;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += q[i];
        return g;
    }
    Vec grad_v(double, CSpan u, CSpan v) const override {
        Vec g = Q_ * u;
        const Vec r = R_ * v;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += r[i];
        return g;
    }
    Mat hess_uu(double, CSpan, CSpan) const override { return P_; }
    Mat hess_uv(double, CSpan, CSpan) const override { return Q_.transpose(); }
    Mat hess_vv(double, CSpan, CSpan) const override { return R_; }
    bool is_mechanical() const override {
        return Q_.max_norm() == 0.0 && R_ == Mat::identity(dim());
    }

private:
    Mat P_, Q_, R_;
    std::string name_;
};

/// L = |v|^2 / 2 in n dimensions.
inline std::shared_ptr<QuadraticModel> free_particle(std::size_t n) {
    return std::make_shared<QuadraticModel>(Mat(n, n), Mat(n, n), Mat::identity(n), "free_particle");
}

/// L = |v|^2 / 2 - |u|^2 / 2 in n dimensions.
inline std::shared_ptr<QuadraticModel> harmonic_oscillator(std::size_t n) {
    return std::make_shared<QuadraticModel>(-Mat::identity(n), Mat(n, n), Mat::identity(n), "harmonic_oscillator");
}

// ---------------------------------------------------------------------------
// Trajectory

/// Default sample count per period for grids, quadrature and scans.
inline constexpr std::size_t kDefaultGrid = 2048;

/// A T-periodic curve u(t) with velocity, evaluated by a sampler and extended
/// periodically outside [0, T].
class Trajectory {
public:
    using Sampler = std::function<void(double t, std::span<double> u, std::span<double> v)>;

    static Trajectory from_sampler(std::shared_ptr<const LagrangianModel> model, double period, Sampler sampler,
                                   std::size_t grid = kDefaultGrid) {
        if (!model) throw Error(ErrorKind::InvalidArgument, "trajectory: null model");
        if (!(period > 0)) throw Error(ErrorKind::InvalidArgument, "trajectory: period must be positive");
        Trajectory tr;
        tr.model_ = std::move(model);
        tr.period_ = period;
        tr.grid_ = std::max<std::size_t>(grid + grid % 2, 8);
        tr.sampler_ = std::move(sampler);
        tr.finish();
        return tr;
    }

    /// Integrates the model's equation of motion from (u0, v0) over one period.
    static Trajectory integrate(std::shared_ptr<const LagrangianModel> model, const Vec& u0, const Vec& v0,
                                double period, const IntegratorOpts& opts, std::size_t grid = kDefaultGrid) {
        const std::size_t n = model->dim();
        if (u0.size() != n || v0.size() != n) throw Error(ErrorKind::InvalidArgument, "initial data has wrong size");
        State y0(u0);
        y0.insert(y0.end(), v0.begin(), v0.end());
        auto flow = std::make_shared<const FlowSolution>(orbmin::integrate(model->flow(), y0, 0.0, period, opts));
        Trajectory tr = from_sampler(
            model, period,
            [flow, n](double t, std::span<double> u, std::span<double> v) {
                State s(2 * n);
                flow->eval(t, s);
                std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n), u.begin());
                std::copy(s.begin() + static_cast<std::ptrdiff_t>(n), s.end(), v.begin());
            },
            grid);
        tr.flow_ = flow;
        return tr;
    }

    const LagrangianModel& model() const noexcept { return *model_; }
    std::shared_ptr<const LagrangianModel> model_ptr() const noexcept { return model_; }
    std::size_t dim() const noexcept { return model_->dim(); }
    double period() const noexcept { return period_; }
    std::size_t grid_size() const noexcept { return grid_; }
    /// Integrated flow when the trajectory came from integrate(), else null.
    const FlowSolution* flow() const noexcept { return flow_.get(); }

    void eval(double t, std::span<double> u, std::span<double> v) const {
        if (t < 0.0 || t > period_) t -= std::floor(t / period_) * period_;
        sampler_(t, u, v);
    }
    Vec position(double t) const {
        Vec u(dim()), v(dim());
        eval(t, u, v);
        return u;
    }
    Vec velocity(double t) const {
        Vec u(dim()), v(dim());
        eval(t, u, v);
        return v;
    }
    double grid_time(std::size_t i) const {
        return i == grid_ ? period_ : period_ * static_cast<double>(i) / static_cast<double>(grid_);
    }

    /// |u(T) - u(0)| + |u'(T) - u'(0)|.
    double closure_defect() const noexcept { return closure_; }
    /// 1e-7 (1 + max |u|).
    double tol_periodic() const noexcept { return 1e-7 * (1.0 + max_u_); }
    bool periodic() const noexcept { return closure_ < tol_periodic(); }
    double max_abs_position() const noexcept { return max_u_; }
    double max_abs_velocity() const noexcept { return max_v_; }

private:
    void finish() {
        const std::size_t n = dim();
        Vec u0(n), v0(n), u1(n), v1(n);
        sampler_(0.0, u0, v0);
        sampler_(period_, u1, v1);
        double du = 0, dv = 0;
        for (std::size_t i = 0; i < n; ++i) {
            du += (u1[i] - u0[i]) * (u1[i] - u0[i]);
            dv += (v1[i] - v0[i]) * (v1[i] - v0[i]);
        }
        closure_ = std::sqrt(du) + std::sqrt(dv);
        for (std::size_t i = 0; i <= grid_; ++i) {
            sampler_(grid_time(i), u0, v0);
            max_u_ = std::max(max_u_, max_abs(u0));
            max_v_ = std::max(max_v_, max_abs(v0));
        }
    }

    std::shared_ptr<const LagrangianModel> model_;
    std::shared_ptr<const FlowSolution> flow_;
    Sampler sampler_;
    double period_ = 0.0;
    std::size_t grid_ = kDefaultGrid;
    double closure_ = 0.0;
    double max_u_ = 0.0;
    double max_v_ = 0.0;
};

/// Action integral of L over one period (composite Simpson on the grid).
inline double action(const Trajectory& tr) {
    const std::size_t n = tr.dim();
    Vec u(n), v(n);
    return simpson(
        [&](double t) {
            tr.eval(t, u, v);
            return tr.model().lagrangian(t, u, v);
        },
        0.0, tr.period(), tr.grid_size());
}

/// max over the grid of |d/dt L_v - L_u|, with the derivative taken by a
/// sixth-order periodic central difference; the momentum closure defect
/// |L_v(T) - L_v(0)| is folded in.
inline double el_residual(const Trajectory& tr) {
    const std::size_t n = tr.dim(), N = tr.grid_size();
    const double h = tr.period() / static_cast<double>(N);
    const LagrangianModel& m = tr.model();
    std::vector<Vec> p(n, Vec(N)), q(n, Vec(N));
    Vec u(n), v(n);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = tr.grid_time(i);
        tr.eval(t, u, v);
        const Vec lv = m.grad_v(t, u, v), lu = m.grad_u(t, u, v);
        for (std::size_t k = 0; k < n; ++k) {
            p[k][i] = lv[k];
            q[k][i] = lu[k];
        }
    }
    double res = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec dp = periodic_derivative(p[k], h);
        for (std::size_t i = 0; i < N; ++i) res = std::max(res, std::abs(dp[i] - q[k][i]));
    }
    tr.eval(tr.period(), u, v);
    const Vec pT = m.grad_v(tr.period(), u, v);
    for (std::size_t k = 0; k < n; ++k) res = std::max(res, std::abs(pT[k] - p[k][0]));
    return res;
}

// ---------------------------------------------------------------------------
// Second variation

/// Coefficients P, Q, R of  Q(v) = int v.P v + 2 v'.Q v + v'.R v'  and the
/// Jacobi-system matrices A = -R^-1 Q, B = R^-1, C = P - Q^T R^-1 Q.
class SecondVariation {
public:
    using MatFn = std::function<Mat(double)>;

    struct Jacobi {
        Mat A, B, C;
    };

    SecondVariation(std::size_t n, double period, MatFn P, MatFn Q, MatFn R, bool mechanical)
        : n_(n), period_(period), P_(std::move(P)), Q_(std::move(Q)), R_(std::move(R)), mechanical_(mechanical) {}

    std::size_t dim() const noexcept { return n_; }
    double period() const noexcept { return period_; }
    bool mechanical() const noexcept { return mechanical_; }

    Mat P(double t) const { return P_(t); }
    Mat Q(double t) const { return mechanical_ ? Mat(n_, n_) : Q_(t); }
    Mat R(double t) const { return mechanical_ ? Mat::identity(n_) : R_(t); }

    Jacobi jacobi(double t) const {
        if (mechanical_) return {Mat(n_, n_), Mat::identity(n_), P_(t)};
        const Mat R = R_(t), Q = Q_(t);
        const Mat B = inverse(R).symmetrized();
        const Mat A = -(B * Q);
        const Mat C = (P_(t) - Q.transpose() * B * Q).symmetrized();
        return {A, B, C};
    }
    Mat A(double t) const { return jacobi(t).A; }
    Mat B(double t) const { return jacobi(t).B; }
    Mat C(double t) const { return jacobi(t).C; }

    /// Trajectory the coefficients were taken along, if any.
    const std::optional<Trajectory>& trajectory() const noexcept { return traj_; }
    /// Largest symmetry defect of P and R seen on the construction grid.
    double symmetry_defect() const noexcept { return sym_defect_; }

    /// Constant coefficients; used for model problems.
    static SecondVariation constant(const Mat& P, const Mat& Q, const Mat& R, double period) {
        const bool mech = Q.max_norm() == 0.0 && R == Mat::identity(P.rows());
        return SecondVariation(P.rows(), period, [P](double) { return P; }, [Q](double) { return Q; },
                               [R](double) { return R; }, mech);
    }

private:
    friend SecondVariation second_variation(const Trajectory& tr);

    std::size_t n_;
    double period_;
    MatFn P_, Q_, R_;
    bool mechanical_;
    std::optional<Trajectory> traj_;
    double sym_defect_ = 0.0;
};

/// Hessians of L along the trajectory. Throws SingularR if L_vv is singular
/// at a grid sample.
inline SecondVariation second_variation(const Trajectory& tr) {
    const std::size_t n = tr.dim();
    auto hess = [tr, n](double t, int which) {
        Vec u(n), v(n);
        tr.eval(t, u, v);
        const LagrangianModel& m = tr.model();
        if (which == 0) return m.hess_uu(t, u, v);
        if (which == 1) return m.hess_uv(t, u, v).transpose();
        return m.hess_vv(t, u, v);
    };
    SecondVariation sv(
        n, tr.period(), [hess](double t) { return hess(t, 0); }, [hess](double t) { return hess(t, 1); },
        [hess](double t) { return hess(t, 2); }, tr.model().is_mechanical());
    sv.traj_ = tr;
    for (std::size_t i = 0; i <= tr.grid_size(); ++i) {
        const double t = tr.grid_time(i);
        const Mat P = hess(t, 0);
        const Mat R = hess(t, 2);
        sv.sym_defect_ = std::max({sv.sym_defect_, P.asymmetry(), R.asymmetry()});
        try {
            (void)solve(R, Mat::identity(n));
        } catch (const Error&) {
            throw Error(ErrorKind::SingularR, "L_vv singular at t=" + num_str(t));
        }
    }
    return sv;
}

// ---------------------------------------------------------------------------
// Variations and quadratic forms

/// A periodic variation v(t) with derivative; breakpoints mark times where the
/// derivative may be discontinuous (quadrature splits there).
struct Variation {
    std::function<void(double t, std::span<double> v, std::span<double> vdot)> eval;
    double period = 0.0;
    std::vector<double> breakpoints;
};

inline Variation constant_variation(const Vec& c, double period) {
    return {[c](double, std::span<double> v, std::span<double> vd) {
                std::copy(c.begin(), c.end(), v.begin());
                std::fill(vd.begin(), vd.end(), 0.0);
            },
            period,
            {}};
}

namespace detail {
/// Piecewise composite Simpson over [0, T] split at the breakpoints.
template <class F>
double piecewise_simpson(F&& f, double T, const std::vector<double>& breaks, std::size_t nodes) {
    std::vector<double> cuts{0.0, T};
    for (double b : breaks)
        if (b > 0.0 && b < T) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        const auto m = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(nodes * len / T)));
        total += simpson(f, cuts[i], cuts[i + 1], m);
    }
    return total;
}
} // namespace detail

/// Q(v) = int_0^T v.P v + 2 v'.Q v + v'.R v'  over the variation's period.
inline double quadratic_form(const SecondVariation& sv, const Variation& var, std::size_t nodes = 8 * kDefaultGrid) {
    const std::size_t n = sv.dim();
    Vec v(n), vd(n);
    auto integrand = [&](double t) {
        var.eval(t, v, vd);
        const Vec Pv = sv.P(t) * v;
        double s = dot(v, Pv) + dot(vd, sv.R(t) * vd);
        if (!sv.mechanical()) s += 2.0 * dot(vd, sv.Q(t) * v);
        return s;
    };
    return detail::piecewise_simpson(integrand, var.period, var.breakpoints, nodes);
}

struct ProbePoint {
    double s = 0.0;
    double action = 0.0;
};

/// phi(s) = action(u0 + s v) for each s. Throws CollisionOnPath when the
/// perturbed curve leaves the model's domain.
inline std::vector<ProbePoint> directional_probe(const Trajectory& tr, const Variation& var, std::span<const double> s_grid,
                                                 std::size_t nodes = 8 * kDefaultGrid) {
    const std::size_t n = tr.dim();
    const LagrangianModel& m = tr.model();
    std::vector<ProbePoint> out;
    Vec u(n), ud(n), v(n), vd(n), us(n), uds(n);
    for (double s : s_grid) {
        auto integrand = [&](double t) {
            tr.eval(t, u, ud);
            var.eval(t, v, vd);
            for (std::size_t i = 0; i < n; ++i) {
                us[i] = u[i] + s * v[i];
                uds[i] = ud[i] + s * vd[i];
            }
            if (!m.admissible(t, us)) throw Error(ErrorKind::CollisionOnPath, "perturbed curve hits a singularity");
            const double L = m.lagrangian(t, us, uds);
            if (!std::isfinite(L)) throw Error(ErrorKind::CollisionOnPath, "integrand not finite");
            return L;
        };
        std::vector<double> breaks = var.breakpoints;
        out.push_back({s, detail::piecewise_simpson(integrand, tr.period(), breaks, nodes)});
    }
    return out;
}

/// Weierstrass excess L(t,y,w) - L(t,y,v) - (w-v).L_v(t,y,v).
inline double excess(const LagrangianModel& m, double t, CSpan y, CSpan v, CSpan w) {
    const Vec lv = m.grad_v(t, y, v);
    double s = m.lagrangian(t, y, w) - m.lagrangian(t, y, v);
    for (std::size_t i = 0; i < lv.size(); ++i) s -= (w[i] - v[i]) * lv[i];
    return s;
}

// ---------------------------------------------------------------------------
// Pointwise conditions

struct PointwiseOpts {
    double tol_definite = 1e-9;  ///< definiteness band for R(t) and int P
    double tube_radius = 1e-2;   ///< restricted tube for the excess test
    std::size_t tube_t = 10, tube_y = 10, tube_w = 20;
    double tol_excess = 1e-12;
};

struct ConditionFlags {
    bool legendre_strict = false;
    double legendre_min_eig = 0.0;
    Definiteness regularity = Definiteness::Indefinite;
    Mat integral_P;
    double regularity_min_eig = 0.0;
    bool weierstrass_strict = false;
    std::string weierstrass_basis;
    double weierstrass_min_excess = 0.0;
};

namespace detail {
/// Deterministic, well-spread unit vectors.
inline Vec spread_direction(std::size_t n, std::size_t j) {
    Vec d(n);
    for (std::size_t k = 0; k < n; ++k)
        d[k] = std::sin(1.6180339887498949 * static_cast<double>((j + 1) * (k + 1)) + 0.7 * static_cast<double>(k));
    const double nd = norm2(d);
    for (double& x : d) x /= nd;
    return d;
}
} // namespace detail

/// Integral of P over [0, T] by composite Simpson on the grid.
inline Mat integral_P(const SecondVariation& sv, std::size_t intervals = kDefaultGrid) {
    return simpson([&](double t) { return sv.P(t); }, 0.0, sv.period(), intervals).symmetrized();
}

inline ConditionFlags check_pointwise_conditions(const SecondVariation& sv, const PointwiseOpts& opts = {}) {
    ConditionFlags f;
    const std::size_t N = sv.trajectory() ? sv.trajectory()->grid_size() : kDefaultGrid;
    const double T = sv.period();
    f.legendre_strict = true;
    f.legendre_min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(N);
        const DefinitenessResult r = classify_definiteness(sv.R(t).symmetrized(), opts.tol_definite);
        f.legendre_min_eig = std::min(f.legendre_min_eig, r.min_eigenvalue);
        if (r.kind != Definiteness::Positive) f.legendre_strict = false;
    }
    f.integral_P = integral_P(sv, N);
    const DefinitenessResult reg = classify_definiteness(f.integral_P, opts.tol_definite);
    f.regularity = reg.kind;
    f.regularity_min_eig = reg.min_eigenvalue;

    if (sv.mechanical()) {
        f.weierstrass_strict = true;
        f.weierstrass_basis = "mechanical";
        f.weierstrass_min_excess = 0.0;
        return f;
    }
    if (!sv.trajectory()) {
        f.weierstrass_strict = false;
        f.weierstrass_basis = "unavailable";
        return f;
    }
    const Trajectory& tr = *sv.trajectory();
    const LagrangianModel& m = tr.model();
    const std::size_t n = tr.dim();
    double min_e = std::numeric_limits<double>::infinity();
    Vec u(n), ud(n), y(n), v(n), w(n);
    const double wscale = 1.0 + tr.max_abs_velocity();
    for (std::size_t it = 0; it < opts.tube_t; ++it) {
        const double t = T * (static_cast<double>(it) + 0.5) / static_cast<double>(opts.tube_t);
        tr.eval(t, u, ud);
        for (std::size_t iy = 0; iy < opts.tube_y; ++iy) {
            const Vec dy = detail::spread_direction(n, iy);
            const Vec dv = detail::spread_direction(n, iy + 97);
            const double r = opts.tube_radius * static_cast<double>(iy) / static_cast<double>(opts.tube_y);
            for (std::size_t k = 0; k < n; ++k) {
                y[k] = u[k] + r * dy[k];
                v[k] = ud[k] + r * dv[k];
            }
            if (!m.admissible(t, y)) continue;
            for (std::size_t iw = 0; iw < opts.tube_w; ++iw) {
                const Vec dw = detail::spread_direction(n, iw + 311);
                const double rw = wscale * static_cast<double>(iw + 1) / static_cast<double>(opts.tube_w);
                for (std::size_t k = 0; k < n; ++k) w[k] = v[k] + rw * dw[k];
                min_e = std::min(min_e, excess(m, t, y, v, w));
            }
        }
    }
    f.weierstrass_min_excess = min_e;
    f.weierstrass_strict = min_e >= -opts.tol_excess;
    f.weierstrass_basis = "tube sampling";
    return f;
}

} // namespace orbmin
