#include "csmooth/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "csmooth/errors.hpp"

namespace csmooth {

double mean(const Vec& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const Vec& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

double sample_cov(const Vec& x, const Vec& y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw DataError("covariance: length mismatch");
    if (n < 2) return 0.0;
    const double mx = mean(x);
    const double my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(n - 1);
}

double correlation(const Vec& x, const Vec& y) {
    const double vx = sample_var(x);
    const double vy = sample_var(y);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return sample_cov(x, y) / std::sqrt(vx * vy);
}

namespace {

// Cholesky factorization in place; returns false when a pivot falls below the
// relative tolerance (rank deficiency).
bool cholesky(Mat& a, double rel_tol = 1e-12) {
    const std::size_t p = a.rows;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    const double tol = rel_tol * std::max(max_diag, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= tol) return false;
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
    }
    return true;
}

Vec cholesky_solve(const Mat& l, const Vec& b) {
    const std::size_t p = l.rows;
    Vec x(b);
    for (std::size_t i = 0; i < p; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t ii = p; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = x[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

}  // namespace

LeastSquaresFit least_squares(const std::vector<Vec>& columns, const Vec& y) {
    const std::size_t p = columns.size();
    const std::size_t n = y.size();
    if (p == 0) throw SingularDesignError("least squares: no predictors");
    for (const auto& c : columns) {
        if (c.size() != n) throw DataError("least squares: column length mismatch");
    }
    if (n < p + 2) throw SingularDesignError("least squares: too few rows");

    // Center everything; the intercept is recovered afterwards.
    Vec col_means(p);
    for (std::size_t j = 0; j < p; ++j) col_means[j] = mean(columns[j]);
    const double y_mean = mean(y);

    Mat gram(p, p);
    Vec xty(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = j; k < p; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += (columns[j][i] - col_means[j]) * (columns[k][i] - col_means[k]);
            }
            gram(j, k) = s;
            gram(k, j) = s;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += (columns[j][i] - col_means[j]) * (y[i] - y_mean);
        }
        xty[j] = s;
    }

    Mat chol = gram;
    if (!cholesky(chol)) {
        throw SingularDesignError("least squares: design matrix is rank deficient");
    }

    LeastSquaresFit fit;
    fit.coef = cholesky_solve(chol, xty);
    double dot = 0.0;
    for (std::size_t j = 0; j < p; ++j) dot += fit.coef[j] * col_means[j];
    fit.intercept = y_mean - dot;

    fit.fitted.resize(n);
    fit.residuals.resize(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = fit.intercept;
        for (std::size_t j = 0; j < p; ++j) f += fit.coef[j] * columns[j][i];
        fit.fitted[i] = f;
        fit.residuals[i] = y[i] - f;
        rss += fit.residuals[i] * fit.residuals[i];
    }
    fit.sigma2 = rss / static_cast<double>(n - p - 1);

    // (Xc'Xc)^-1 column by column.
    fit.gram_inv = Mat(p, p);
    Vec e(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        e[j] = 1.0;
        Vec col = cholesky_solve(chol, e);
        for (std::size_t i = 0; i < p; ++i) fit.gram_inv(i, j) = col[i];
        e[j] = 0.0;
    }
    fit.std_errors.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.std_errors[j] = std::sqrt(std::max(0.0, fit.sigma2 * fit.gram_inv(j, j)));
    }
    return fit;
}

}  // namespace csmooth
