#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "drpen/dataset.hpp"

namespace drpen {

inline double expit(double eta) {
    if (eta >= 0) {
        double e = std::exp(-eta);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(eta);
    return e / (1.0 + e);
}

// Unpenalized fit with intercept. Coefficients are on the scale of the
// supplied design (no internal standardization here).
struct GlmFit {
    double intercept = 0.0;
    Vector coef;
    bool converged = true;
    int iterations = 0;
    bool rank_deficient = false;
};

inline Vector glm_linear_predictor(const GlmFit& f, const Matrix& x) {
    return (x * f.coef).array() + f.intercept;
}

inline Vector glm_probabilities(const GlmFit& f, const Matrix& x) {
    Vector eta = glm_linear_predictor(f, x);
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = expit(eta[i]);
    return eta;
}

// Least squares of y on [1, x]. With strict=true a rank-deficient design is
// an error; otherwise the QR least-squares solution is returned and flagged
// (predictions stay well defined, which the Farrell refits rely on).
inline GlmFit ols(const Matrix& x, const Vector& y, bool strict = true) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(1e-10);
    GlmFit fit;
    fit.rank_deficient = qr.rank() < p + 1;
    if (fit.rank_deficient && strict)
        throw std::runtime_error("ols: singular design matrix");
    Vector sol = qr.solve(y);
    fit.intercept = sol[0];
    fit.coef = sol.tail(p);
    return fit;
}

// Logistic maximum likelihood by Newton iterations on [1, x].
// Non-convergence (e.g. separation) is reported through the flag, not an
// exception; the caller decides what diverging probabilities mean.
inline GlmFit logistic_ml(const Matrix& x, const Vector& y, double tol = 1e-8,
                          int max_iter = 100) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Vector beta = Vector::Zero(p + 1);
    GlmFit fit;
    fit.converged = false;
    for (int it = 0; it < max_iter; ++it) {
        Vector eta = design * beta;
        Vector mu(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = expit(eta[i]);
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
        Matrix xtwx = design.transpose() * w.asDiagonal() * design;
        Vector grad = design.transpose() * (y - mu);
        Eigen::LDLT<Matrix> ldlt(xtwx);
        if (ldlt.info() != Eigen::Success) break;
        Vector step = ldlt.solve(grad);
        if (!step.allFinite()) break;
        beta += step;
        fit.iterations = it + 1;
        if (step.cwiseAbs().maxCoeff() < tol) {
            fit.converged = true;
            break;
        }
    }
    fit.intercept = beta[0];
    fit.coef = beta.tail(p);
    return fit;
}

// Column subset helper for fits on a selected covariate set.
inline Matrix select_columns(const Matrix& x, const std::vector<int>& cols) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
    return out;
}

}  // namespace drpen
