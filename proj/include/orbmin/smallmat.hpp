#pragma once

// Dense real matrices for the small systems that appear in second-variation
// analysis (a handful of rows). Storage is row-major; every operation is a pure
// function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbmin/error.hpp"

namespace orbmin {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Builds a matrix from nested rows; rejects ragged or non-finite input.
    static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        Mat m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw Error(ErrorKind::InvalidArgument, "ragged matrix rows");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        m.require_finite();
        return m;
    }

    /// Row-major construction from a flat buffer.
    static Mat from_row_major(std::size_t rows, std::size_t cols, std::span<const double> values,
                              bool check_finite = true) {
        if (values.size() != rows * cols)
            throw Error(ErrorKind::InvalidArgument, "row-major buffer has wrong length");
        Mat m(rows, cols);
        std::copy(values.begin(), values.end(), m.data_.begin());
        if (check_finite) m.require_finite();
        return m;
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Mat diag(std::span<const double> d) {
        Mat m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
    static Mat diag(std::initializer_list<double> d) { return diag(std::span<const double>(d.begin(), d.size())); }

    /// Column matrix holding a vector.
    static Mat column(std::span<const double> v) { return from_row_major(v.size(), 1, v); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    Vec col(std::size_t j) const {
        Vec v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_col(std::size_t j, std::span<const double> v) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

    bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }
    void require_finite() const {
        if (!all_finite()) throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
    }

    Mat& operator+=(const Mat& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Mat& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend Mat operator*(double s, Mat a) { return a *= s; }
    friend Mat operator-(Mat a) { return a *= -1.0; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw Error(ErrorKind::InvalidArgument, "matrix product shape mismatch");
        Mat c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend Vec operator*(const Mat& a, std::span<const double> x) {
        if (a.cols_ != x.size()) throw Error(ErrorKind::InvalidArgument, "matrix-vector shape mismatch");
        Vec y(a.rows_, 0.0);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    friend Vec operator*(const Mat& a, const Vec& x) { return a * std::span<const double>(x); }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Largest absolute entry.
    double max_norm() const noexcept {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Induced infinity norm (maximum absolute row sum).
    double inf_norm() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    /// Induced one norm (maximum absolute column sum).
    double one_norm() const noexcept { return transpose().inf_norm(); }

    Mat symmetrized() const { return 0.5 * (*this + transpose()); }

    /// max |m_ij - m_ji|.
    double asymmetry() const {
        double d = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j) d = std::max(d, std::abs((*this)(i, j) - (*this)(j, i)));
        return d;
    }

    double trace() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        Mat b(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }
    void set_block(std::size_t r0, std::size_t c0, const Mat& b) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    void check_same(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::InvalidArgument, "matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}
inline Vec axpy(double s, std::span<const double> x, std::span<const double> y) {
    Vec r(y.begin(), y.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * x[i];
    return r;
}
inline Mat outer(std::span<const double> a, std::span<const double> b) {
    Mat m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting

struct LuFactors {
    Mat lu;
    std::vector<std::size_t> perm;
    int sign = 1;
    double min_pivot = std::numeric_limits<double>::infinity();
};

inline LuFactors lu_factor(const Mat& m) {
    if (!m.square()) throw Error(ErrorKind::InvalidArgument, "LU needs a square matrix");
    const std::size_t n = m.rows();
    LuFactors f{m, std::vector<std::size_t>(n), 1, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    Mat& a = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(f.perm[k], f.perm[p]);
            f.sign = -f.sign;
        }
        const double piv = a(k, k);
        f.min_pivot = std::min(f.min_pivot, std::abs(piv));
        if (piv == 0.0) continue;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = a(i, k) / piv;
            a(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
        }
    }
    if (n == 0) f.min_pivot = 0.0;
    return f;
}

/// Determinant: cofactor expansion up to 3x3, pivoted LU beyond.
inline double det(const Mat& m) {
    if (!m.square()) throw Error(ErrorKind::InvalidArgument, "det needs a square matrix");
    switch (m.rows()) {
    case 0: return 1.0;
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: break;
    }
    const LuFactors f = lu_factor(m);
    double d = f.sign;
    for (std::size_t i = 0; i < m.rows(); ++i) d *= f.lu(i, i);
    return d;
}

struct SolveResult {
    Mat x;
    /// One-norm condition estimate ||m||_1 * ||m^-1||_1.
    double condition = 0.0;
};

namespace detail {
inline Mat lu_solve(const LuFactors& f, const Mat& rhs) {
    const std::size_t n = f.lu.rows();
    Mat x(n, rhs.cols());
    for (std::size_t c = 0; c < rhs.cols(); ++c) {
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rhs(f.perm[i], c);
            for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
            y[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x(j, c);
            x(ii, c) = s / f.lu(ii, ii);
        }
    }
    return x;
}
} // namespace detail

/// Solves m X = rhs. Throws Singular when a pivot falls below 1e-13 ||m||_inf.
inline SolveResult solve(const Mat& m, const Mat& rhs) {
    if (!m.square() || rhs.rows() != m.rows())
        throw Error(ErrorKind::InvalidArgument, "solve: shape mismatch");
    const double scale = m.inf_norm();
    const LuFactors f = lu_factor(m);
    if (scale == 0.0 || f.min_pivot <= 1e-13 * scale)
        throw Error(ErrorKind::Singular, "pivot below tolerance (min pivot " + num_str(f.min_pivot) + ")");
    SolveResult r;
    r.x = detail::lu_solve(f, rhs);
    const Mat inv = detail::lu_solve(f, Mat::identity(m.rows()));
    r.condition = m.one_norm() * inv.one_norm();
    return r;
}

inline Mat inverse(const Mat& m) { return solve(m, Mat::identity(m.rows())).x; }

// ---------------------------------------------------------------------------
// Symmetric eigenproblem: Householder tridiagonalization followed by the
// implicit QL iteration.

struct SymmetricEigen {
    Vec values;   ///< ascending
    Mat vectors;  ///< column k pairs with values[k]
};

inline SymmetricEigen symmetric_eigen(const Mat& input) {
    if (!input.square()) throw Error(ErrorKind::InvalidArgument, "eigen: square matrix required");
    const std::size_t n = input.rows();
    Mat V = input.symmetrized();
    Vec d(n), e(n);
    if (n == 0) return {};

    for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0, h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
                V(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                V(j, i) = f;
                g = e[j] + V(j, j) * f;
                for (std::size_t k = j + 1; k <= i - 1; ++k) {
                    g += V(k, j) * d[k];
                    e[k] += V(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        V(n - 1, i) = V(i, i);
        V(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
                for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = V(n - 1, j);
        V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e[0] = 0.0;

    // QL iteration on the tridiagonal (d, e).
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    double f = 0.0, tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 100) throw Error(ErrorKind::InvalidArgument, "eigen: QL did not converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;
                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0, s = 0.0, s2 = 0.0;
                const double el1 = e[l + 1];
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        h = V(k, ii + 1);
                        V(k, ii + 1) = s * V(k, ii) + c * h;
                        V(k, ii) = c * V(k, ii) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort ascending.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    SymmetricEigen out{Vec(n), Mat(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = d[idx[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = V(i, idx[k]);
    }
    return out;
}

enum class Definiteness { Positive, Semidefinite, Indefinite };

constexpr std::string_view to_string(Definiteness d) {
    switch (d) {
    case Definiteness::Positive: return "POSITIVE";
    case Definiteness::Semidefinite: return "SEMIDEFINITE";
    case Definiteness::Indefinite: return "INDEFINITE";
    }
    return "?";
}

/// Relative asymmetry accepted before a matrix is rejected as non-symmetric.
inline constexpr double kTolSym = 1e-9;

struct DefinitenessResult {
    Definiteness kind = Definiteness::Indefinite;
    double min_eigenvalue = 0.0;
    double spectral_radius = 0.0;
};

/// Classifies a (numerically) symmetric matrix by its smallest eigenvalue
/// relative to tol * (1 + spectral radius).
inline DefinitenessResult classify_definiteness(const Mat& m, double tol) {
    if (!m.square()) throw Error(ErrorKind::InvalidArgument, "definiteness: square matrix required");
    const double scale = std::max(1.0, m.max_norm());
    if (m.asymmetry() > kTolSym * scale)
        throw Error(ErrorKind::NotSymmetric, "asymmetry " + num_str(m.asymmetry()));
    DefinitenessResult r;
    if (m.rows() == 0) {
        r.kind = Definiteness::Positive;
        r.min_eigenvalue = std::numeric_limits<double>::infinity();
        return r;
    }
    const SymmetricEigen eig = symmetric_eigen(m);
    r.min_eigenvalue = eig.values.front();
    r.spectral_radius = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
    const double band = tol * (1.0 + r.spectral_radius);
    if (r.min_eigenvalue > band)
        r.kind = Definiteness::Positive;
    else if (r.min_eigenvalue >= -band)
        r.kind = Definiteness::Semidefinite;
    else
        r.kind = Definiteness::Indefinite;
    return r;
}

inline Definiteness is_positive_definite(const Mat& m, double tol) { return classify_definiteness(m, tol).kind; }

/// max |m^T m - I|.
inline double orthogonality_defect(const Mat& m) {
    if (!m.square()) throw Error(ErrorKind::InvalidArgument, "orthogonality_defect: square matrix required");
    return (m.transpose() * m - Mat::identity(m.rows())).max_norm();
}

/// Lower Cholesky factor, or nullopt when m is not numerically positive definite.
inline std::optional<Mat> cholesky(const Mat& m) {
    const std::size_t n = m.rows();
    Mat L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = m(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
        if (!(s > 0.0)) return std::nullopt;
        L(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = m(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
            L(i, j) = t / L(j, j);
        }
    }
    return L;
}

/// Unit vector minimizing |m x| (right singular vector of the smallest singular value).
inline Vec null_direction(const Mat& m) {
    const SymmetricEigen eig = symmetric_eigen(m.transpose() * m);
    Vec v = eig.vectors.col(0);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}

/// Orthonormal basis (columns) of the orthogonal complement of span(vectors),
/// dropping directions whose residual falls below rel_tol.
inline Mat orthogonal_complement(std::size_t n, const std::vector<Vec>& vectors, double rel_tol = 1e-8) {
    std::vector<Vec> basis;
    for (const Vec& v : vectors) {
        Vec w = v;
        const double n0 = norm2(w);
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) w = axpy(-dot(b, w), b, w);
        const double nw = norm2(w);
        if (nw <= rel_tol * n0) continue;
        for (double& x : w) x /= nw;
        basis.push_back(std::move(w));
    }
    const std::size_t k = basis.size();
    Mat out(n, n - k);
    std::size_t col = 0;
    for (std::size_t e = 0; e < n && col < n - k; ++e) {
        Vec w(n, 0.0);
        w[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) w = axpy(-dot(b, w), b, w);
        const double nw = norm2(w);
        if (nw < 1e-6) continue;
        for (double& x : w) x /= nw;
        basis.push_back(w);
        out.set_col(col++, w);
    }
    return out;
}

} // namespace orbmin
