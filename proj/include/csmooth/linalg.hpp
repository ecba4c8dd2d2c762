#pragma once

#include <cstddef>
#include <vector>

namespace csmooth {

using Vec = std::vector<double>;

// Dense row-major matrix, just enough for the model parameters and the
// normal-equation solves used by the estimators.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

double mean(const Vec& v);
// Sample (n-1) statistics.
double sample_var(const Vec& v);
double sample_cov(const Vec& x, const Vec& y);
// Pearson correlation; 0 when either side is constant.
double correlation(const Vec& x, const Vec& y);

struct LeastSquaresFit {
    Vec coef;         // slope per predictor column
    double intercept = 0.0;
    Vec fitted;
    Vec residuals;
    Vec std_errors;   // classical, per slope
    double sigma2 = 0.0;  // residual variance, RSS / (n - p - 1)
    Mat gram_inv;     // (Xc' Xc)^-1 on centered predictors
};

// OLS of y on the given predictor columns plus an intercept. Solved via
// centered normal equations and Cholesky; columns are centered internally,
// which keeps the binary-instrument case exact to machine precision.
// Throws SingularDesignError on rank deficiency.
LeastSquaresFit least_squares(const std::vector<Vec>& columns, const Vec& y);

}  // namespace csmooth
