#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace maintvar {

/// Dense row-major matrix of doubles. Only the operations the estimators
/// need; not a general linear-algebra library.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_column(std::size_t j, std::span<const double> values) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
    }

    bool operator==(const Matrix& other) const = default;

    Matrix multiplied_by(const Matrix& rhs) const {
        Matrix out(rows_, rhs.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    void scale(double c) {
        for (double& v : data_) v *= c;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Householder QR in the economy form, factored once and reused for any
/// number of right-hand sides. Layout and recurrences follow the classic
/// JAMA scheme: reflectors stored below the diagonal, R diagonal kept
/// separately.
class QrLeastSquares {
public:
    explicit QrLeastSquares(Matrix a) : qr_(std::move(a)) {
        const std::size_t m = qr_.rows();
        const std::size_t n = qr_.cols();
        rdiag_.resize(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double nrm = 0.0;
            for (std::size_t i = k; i < m; ++i) nrm = std::hypot(nrm, qr_(i, k));
            if (nrm != 0.0) {
                if (qr_(k, k) < 0.0) nrm = -nrm;
                for (std::size_t i = k; i < m; ++i) qr_(i, k) /= nrm;
                qr_(k, k) += 1.0;
                for (std::size_t j = k + 1; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * qr_(i, j);
                    s = -s / qr_(k, k);
                    for (std::size_t i = k; i < m; ++i) qr_(i, j) += s * qr_(i, k);
                }
            }
            rdiag_[k] = -nrm;
        }
    }

    /// Index of the first column whose R pivot collapses, if any.
    std::optional<std::size_t> deficient_column() const {
        double max_abs = 0.0;
        for (double r : rdiag_) max_abs = std::max(max_abs, std::fabs(r));
        const double tol = std::max(static_cast<double>(qr_.rows()), 1.0) * 1e-13 * max_abs;
        for (std::size_t j = 0; j < rdiag_.size(); ++j) {
            if (std::fabs(rdiag_[j]) <= tol) return j;
        }
        return std::nullopt;
    }

    /// Minimum-norm-residual solve for one right-hand side.
    std::vector<double> solve(std::span<const double> b) const {
        Matrix rhs(qr_.rows(), 1);
        for (std::size_t i = 0; i < qr_.rows(); ++i) rhs(i, 0) = b[i];
        Matrix x = solve(rhs);
        std::vector<double> out(qr_.cols());
        for (std::size_t i = 0; i < qr_.cols(); ++i) out[i] = x(i, 0);
        return out;
    }

    /// Solves min ||A X - B||_F column by column; B has one row per sample.
    Matrix solve(Matrix b) const {
        const std::size_t m = qr_.rows();
        const std::size_t n = qr_.cols();
        const std::size_t nx = b.cols();
        // Apply Q' to B.
        for (std::size_t k = 0; k < n; ++k) {
            if (qr_(k, k) == 0.0) continue;
            for (std::size_t j = 0; j < nx; ++j) {
                double s = 0.0;
                for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * b(i, j);
                s = -s / qr_(k, k);
                for (std::size_t i = k; i < m; ++i) b(i, j) += s * qr_(i, k);
            }
        }
        // Back-substitute R X = Q'B.
        Matrix x(n, nx);
        for (std::size_t kk = n; kk-- > 0;) {
            for (std::size_t j = 0; j < nx; ++j) {
                double v = b(kk, j);
                for (std::size_t i = kk + 1; i < n; ++i) v -= qr_(kk, i) * x(i, j);
                x(kk, j) = v / rdiag_[kk];
            }
        }
        return x;
    }

    /// Diagonal of (A'A)^{-1} via R^{-1}, for coefficient standard errors.
    std::vector<double> normal_inverse_diagonal() const {
        const std::size_t n = qr_.cols();
        // Invert R (upper triangular with diagonal rdiag_).
        Matrix rinv(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            rinv(j, j) = 1.0 / rdiag_[j];
            for (std::size_t ii = j; ii-- > 0;) {
                double s = 0.0;
                for (std::size_t k = ii + 1; k <= j; ++k) s += qr_(ii, k) * rinv(k, j);
                rinv(ii, j) = -s / rdiag_[ii];
            }
        }
        std::vector<double> diag(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) diag[i] += rinv(i, j) * rinv(i, j);
        return diag;
    }

private:
    Matrix qr_;
    std::vector<double> rdiag_;
};

/// Lower Cholesky factor of a symmetric positive-definite matrix;
/// nullopt when a pivot is not strictly positive.
inline std::optional<Matrix> cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < n && k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Cholesky-like factor for positive semi-definite matrices: zero pivots
/// produce zero columns instead of failing (a zero covariance is legal
/// for deterministic simulation).
inline Matrix psd_factor(const Matrix& a) {
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a(i, i)));
    const double tol = scale * 1e-12;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= tol) {
            l(j, j) = 0.0;
            continue;
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Spectral radius by Gelfand iteration: repeatedly square the matrix,
/// renormalizing each step, and read the radius off the accumulated
/// log-scale. Accurate to about 1e-3 on the radius, which is all the
/// stability check needs.
inline double spectral_radius_estimate(Matrix a, int doublings = 64) {
    const double norm0 = a.frobenius_norm();
    if (norm0 == 0.0) return 0.0;
    a.scale(1.0 / norm0);
    double log_scale = std::log(norm0);
    double log_pow = 0.0;  // log of ||A^{2^k}|| in the running scale
    double weight = 1.0;   // 1 / 2^k
    for (int k = 0; k < doublings; ++k) {
        a = a.multiplied_by(a);
        const double nrm = a.frobenius_norm();
        if (nrm == 0.0) return 0.0;
        a.scale(1.0 / nrm);
        log_scale = 2.0 * log_scale + std::log(nrm);
        weight *= 0.5;
        log_pow = weight * log_scale;
    }
    return std::exp(log_pow);
}

}  // namespace maintvar
