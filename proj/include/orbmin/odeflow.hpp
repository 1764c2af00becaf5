#pragma once

// Explicit Runge-Kutta integration with dense output, and zero location for
// scalar functionals evaluated along a solution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orbmin/error.hpp"

namespace orbmin {

using State = std::vector<double>;

/// Right-hand side y' = f(t, y), written into dy (same length as y).
using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

enum class Method { Rk4Fixed, Dp54Adaptive };

constexpr std::string_view to_string(Method m) {
    return m == Method::Rk4Fixed ? "rk4_fixed" : "dp54_adaptive";
}

struct IntegratorOpts {
    Method method = Method::Dp54Adaptive;
    double step = 1e-3;   ///< fixed step (rk4) or initial step hint (dp54, 0 = automatic)
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_min_rel = 1e-13; ///< adaptive step floor, relative to the integration span
    std::size_t max_steps = 5'000'000;
};

/// Solution of an initial value problem with piecewise-polynomial dense output.
class FlowSolution {
public:
    std::size_t dim() const noexcept { return dim_; }
    double t0() const noexcept { return times_.front(); }
    double t1() const noexcept { return times_.back(); }
    const std::vector<double>& times() const noexcept { return times_; }
    const State& node(std::size_t i) const noexcept { return states_[i]; }
    std::size_t size() const noexcept { return times_.size(); }
    Method method() const noexcept { return method_; }

    /// Dense-output value at t (clamped to [t0, t1]); exact at stored nodes.
    State operator()(double t) const {
        State y(dim_);
        eval(t, y);
        return y;
    }

    void eval(double t, std::span<double> out) const {
        t = std::clamp(t, t0(), t1());
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        if (i == 0) i = 1;
        if (i >= times_.size()) i = times_.size() - 1;
        --i; // segment [times_[i], times_[i+1]]
        if (t == times_[i]) {
            std::copy(states_[i].begin(), states_[i].end(), out.begin());
            return;
        }
        if (t == times_[i + 1]) {
            std::copy(states_[i + 1].begin(), states_[i + 1].end(), out.begin());
            return;
        }
        const double h = times_[i + 1] - times_[i];
        const double th = (t - times_[i]) / h;
        const double th1 = 1.0 - th;
        const double* c = &coeffs_[i * 5 * dim_];
        if (method_ == Method::Dp54Adaptive) {
            for (std::size_t k = 0; k < dim_; ++k)
                out[k] = c[k] + th * (c[dim_ + k] + th1 * (c[2 * dim_ + k] + th * (c[3 * dim_ + k] + th1 * c[4 * dim_ + k])));
        } else {
            // Cubic Hermite from node values c0, c1 and scaled slopes h*f0, h*f1.
            const double h00 = (1 + 2 * th) * th1 * th1, h10 = th * th1 * th1;
            const double h01 = th * th * (3 - 2 * th), h11 = -th * th * th1;
            for (std::size_t k = 0; k < dim_; ++k)
                out[k] = h00 * c[k] + h10 * c[2 * dim_ + k] + h01 * c[dim_ + k] + h11 * c[3 * dim_ + k];
        }
    }

private:
    friend FlowSolution integrate(const VectorField&, const State&, double, double, const IntegratorOpts&);

    Method method_ = Method::Dp54Adaptive;
    std::size_t dim_ = 0;
    std::vector<double> times_;
    std::vector<State> states_;
    std::vector<double> coeffs_; ///< five dim-vectors per segment
};

namespace detail {

inline bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Dormand-Prince 5(4) tableau.
struct Dp54 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

} // namespace detail

/// Integrates y' = f(t, y) from t0 to t1.
inline FlowSolution integrate(const VectorField& f, const State& y0, double t0, double t1, const IntegratorOpts& opts) {
    if (!(t1 > t0)) throw Error(ErrorKind::InvalidArgument, "integrate: need t1 > t0");
    if (!detail::finite(y0)) throw Error(ErrorKind::NonFiniteState, "initial state is not finite");
    const std::size_t n = y0.size();
    FlowSolution sol;
    sol.method_ = opts.method;
    sol.dim_ = n;
    sol.times_.push_back(t0);
    sol.states_.push_back(y0);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n);
    State y = y0;
    double t = t0;
    f(t, y, k1);
    if (!detail::finite(k1)) throw Error(ErrorKind::NonFiniteState, "vector field not finite at t0");

    if (opts.method == Method::Rk4Fixed) {
        if (!(opts.step > 0)) throw Error(ErrorKind::InvalidArgument, "rk4: step must be positive");
        const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / opts.step - 1e-9));
        const double h = (t1 - t0) / static_cast<double>(steps);
        sol.coeffs_.reserve(steps * 5 * n);
        for (std::size_t s = 0; s < steps; ++s) {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            f(t + 0.5 * h, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            f(t + 0.5 * h, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            f(t + h, tmp, k4);
            for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            const double tn = (s + 1 == steps) ? t1 : t0 + h * static_cast<double>(s + 1);
            if (!detail::finite(y1)) throw Error(ErrorKind::NonFiniteState, "state not finite at t=" + num_str(tn));
            f(tn, y1, k7);
            if (!detail::finite(k7)) throw Error(ErrorKind::NonFiniteState, "vector field not finite at t=" + num_str(tn));
            const double hs = tn - t;
            sol.coeffs_.insert(sol.coeffs_.end(), y.begin(), y.end());
            sol.coeffs_.insert(sol.coeffs_.end(), y1.begin(), y1.end());
            for (std::size_t i = 0; i < n; ++i) sol.coeffs_.push_back(hs * k1[i]);
            for (std::size_t i = 0; i < n; ++i) sol.coeffs_.push_back(hs * k7[i]);
            for (std::size_t i = 0; i < n; ++i) sol.coeffs_.push_back(0.0);
            t = tn;
            y = y1;
            k1 = k7;
            sol.times_.push_back(t);
            sol.states_.push_back(y);
        }
        return sol;
    }

    using D = detail::Dp54;
    const double span = t1 - t0;
    const double h_min = opts.h_min_rel * span;
    double h = opts.step > 0 ? std::min(opts.step, span) : 1e-3 * span;
    bool last_rejected = false;
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > opts.max_steps) throw Error(ErrorKind::StepUnderflow, "maximum step count exceeded");
        bool final_step = false;
        if (t + h >= t1 || t + 1.01 * h >= t1) {
            h = t1 - t;
            final_step = true;
        }
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * D::a21 * k1[i];
        f(t + D::c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (D::a31 * k1[i] + D::a32 * k2[i]);
        f(t + D::c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
        f(t + D::c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] + D::a54 * k4[i]);
        f(t + D::c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] + D::a64 * k4[i] + D::a65 * k5[i]);
        const double tn = final_step ? t1 : t + h;
        f(tn, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (D::a71 * k1[i] + D::a73 * k3[i] + D::a74 * k4[i] + D::a75 * k5[i] + D::a76 * k6[i]);
        bool ok = detail::finite(y1);
        if (ok) {
            f(tn, y1, k7);
            ok = detail::finite(k7);
        }
        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double sk = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                const double e = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] + D::e6 * k6[i] +
                                      D::e7 * k7[i]) / sk;
                acc += e * e;
            }
            err = std::sqrt(acc / static_cast<double>(n));
            if (!std::isfinite(err)) ok = false;
        }
        if (!ok) {
            h *= 0.2;
            if (h < h_min)
                throw Error(ErrorKind::NonFiniteState, "non-finite state near t=" + num_str(t));
            last_rejected = true;
            continue;
        }
        if (err <= 1.0) {
            const std::size_t base = sol.coeffs_.size();
            sol.coeffs_.resize(base + 5 * n);
            double* c = &sol.coeffs_[base];
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                c[i] = y[i];
                c[n + i] = ydiff;
                c[2 * n + i] = bspl;
                c[3 * n + i] = ydiff - h * k7[i] - bspl;
                c[4 * n + i] = h * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] + D::d5 * k5[i] + D::d6 * k6[i] +
                                    D::d7 * k7[i]);
            }
            t = tn;
            y = y1;
            k1 = k7;
            sol.times_.push_back(t);
            sol.states_.push_back(y);
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            h *= fac;
            last_rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
        }
        if (t < t1 && h < h_min)
            throw Error(ErrorKind::StepUnderflow, "step size below h_min at t=" + num_str(t));
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Zero location

enum class ZeroKind { SignChange, Touch };

constexpr std::string_view to_string(ZeroKind k) { return k == ZeroKind::SignChange ? "SIGN_CHANGE" : "TOUCH"; }

struct Zero {
    double t = 0.0;
    ZeroKind kind = ZeroKind::SignChange;
};

struct ZeroOpts {
    std::size_t samples = 2048; ///< scan resolution over [t0, t1]
    double tol_touch = 1e-7;    ///< relative to max |g| on the scan
    double tol_t = 1e-10;
};

/// Zeros of a scalar function of time on (t0, t1].
inline std::vector<Zero> locate_zeros(const std::function<double(double)>& g, double t0, double t1,
                                      const ZeroOpts& opts = {}) {
    const std::size_t N = std::max<std::size_t>(opts.samples, 4);
    std::vector<double> ts(N + 1), gs(N + 1);
    double gmax = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        ts[i] = (i == N) ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(N);
        gs[i] = g(ts[i]);
        if (std::isfinite(gs[i])) gmax = std::max(gmax, std::abs(gs[i]));
    }
    std::vector<Zero> out;
    if (gmax == 0.0) return out;
    const double touch = opts.tol_touch * gmax;
    auto sgn = [](double v) { return (v > 0) - (v < 0); };

    auto bisect = [&](double a, double b, double ga) {
        while (b - a > opts.tol_t) {
            const double m = 0.5 * (a + b);
            const double gm = g(m);
            if (gm == 0.0) return m;
            if (sgn(gm) == sgn(ga)) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };

    // Minimizes s*g on [a, b] where s is the local sign: golden section, then
    // bisection on a difference quotient to resolve flat minima.
    auto refine_min = [&](double a, double b, int s) {
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = s * g(x1), f2 = s * g(x2);
        double lo = a, hi = b;
        while (hi - lo > 1e-6 * (t1 - t0)) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = s * g(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = s * g(x2);
            }
        }
        // widen slightly so the true minimizer stays bracketed
        lo = std::max(a, lo - 1e-6 * (t1 - t0));
        hi = std::min(b, hi + 1e-6 * (t1 - t0));
        const double hd = std::max(1e-7 * (t1 - t0), 4 * opts.tol_t);
        auto slope = [&](double x) { return s * (g(x + hd) - g(x - hd)); };
        if (slope(hi) < 0) return hi;
        if (slope(lo) > 0) return lo;
        while (hi - lo > opts.tol_t) {
            const double m = 0.5 * (lo + hi);
            if (slope(m) < 0)
                lo = m;
            else
                hi = m;
        }
        return 0.5 * (lo + hi);
    };

    for (std::size_t i = 1; i <= N; ++i) {
        const int s0 = sgn(gs[i - 1]), s1 = sgn(gs[i]);
        if (s1 == 0) {
            const int sn = (i < N) ? sgn(gs[i + 1]) : s0;
            out.push_back({ts[i], (s0 != 0 && sn != 0 && s0 != sn) ? ZeroKind::SignChange : ZeroKind::Touch});
            continue;
        }
        if (s0 != 0 && s0 != s1) {
            out.push_back({bisect(ts[i - 1], ts[i], gs[i - 1]), ZeroKind::SignChange});
            continue;
        }
        // Local minimum of |g| without a sign change on either side.
        const double a = std::abs(gs[i]);
        const bool left_ok = a <= std::abs(gs[i - 1]);
        const bool right_ok = (i == N) || (a <= std::abs(gs[i + 1]) && sgn(gs[i + 1]) == s1);
        if (!left_ok || !right_ok || s0 == 0) continue;
        const double lo = ts[i - 1], hi = (i == N) ? ts[N] : ts[i + 1];
        const double tm = refine_min(lo, hi, s1);
        const double gm = g(tm);
        if (sgn(gm) != s1 && gm != 0.0) {
            // Refinement exposed a pair of nearby sign changes.
            out.push_back({bisect(lo, tm, gs[i - 1]), ZeroKind::SignChange});
            out.push_back({bisect(tm, hi, gm), ZeroKind::SignChange});
            continue;
        }
        if (std::abs(gm) <= touch) out.push_back({tm, ZeroKind::Touch});
    }
    std::sort(out.begin(), out.end(), [](const Zero& a, const Zero& b) { return a.t < b.t; });
    std::vector<Zero> uniq;
    for (const Zero& z : out)
        if (uniq.empty() || z.t - uniq.back().t > 10 * opts.tol_t) uniq.push_back(z);
    return uniq;
}

/// Zeros of g(t, sol(t)) on (sol.t0, sol.t1].
inline std::vector<Zero> locate_zeros(const FlowSolution& sol,
                                      const std::function<double(double, std::span<const double>)>& g,
                                      const ZeroOpts& opts = {}) {
    State buf(sol.dim());
    auto scalar = [&](double t) {
        sol.eval(t, buf);
        return g(t, buf);
    };
    return locate_zeros(scalar, sol.t0(), sol.t1(), opts);
}

} // namespace orbmin
