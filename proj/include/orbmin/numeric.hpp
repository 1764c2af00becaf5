#pragma once

// Quadrature and finite-difference helpers shared by the analysis modules.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "orbmin/error.hpp"

namespace orbmin {

/// Composite Simpson rule on uniformly spaced samples (odd sample count).
inline double simpson_samples(std::span<const double> f, double h) {
    if (f.size() < 3 || f.size() % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "Simpson needs an odd number (>= 3) of samples");
    double s = f.front() + f.back();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

/// Composite Simpson rule of f on [a, b] with `intervals` subintervals (rounded up to even).
/// Works for any value type supporting +, += and scalar *.
template <class F>
auto simpson(F&& f, double a, double b, std::size_t intervals) {
    if (intervals < 2) intervals = 2;
    if (intervals % 2) ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    auto acc = f(a);
    acc += f(b);
    for (std::size_t i = 1; i < intervals; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    }
    return (h / 3.0) * acc;
}

namespace detail {
inline double adaptive_simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 50) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Fourth-order central difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Sixth-order central-difference weights for offsets -3..3.
inline constexpr double kCentral6[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};

/// Derivative of periodic uniform samples f_0..f_{N-1} (f_N = f_0 implied).
inline std::vector<double> periodic_derivative(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = -3; k <= 3; ++k) {
            const std::size_t j = (i + n * 4 + static_cast<std::size_t>(k + 3) - 3) % n;
            s += kCentral6[k + 3] * f[j];
        }
        d[i] = s / h;
    }
    return d;
}

} // namespace orbmin
