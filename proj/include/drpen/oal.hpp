#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "drpen/dataset.hpp"
#include "drpen/glm.hpp"
#include "drpen/penreg.hpp"

namespace drpen {

// Outcome-adaptive lasso for the propensity-score model: penalty weights
// |outcome coefficient|^{-gamma} on a logistic lasso, with the tuning
// constant chosen over candidates lambda = n^kappa.
//
// By default the weight exponent is coupled to the candidate as
// gamma(kappa) = 2*(convergence_factor - kappa + 1), which keeps the
// oracle rate condition lambda_n * n^{gamma/2 - 1} -> infinity satisfied
// with a fixed margin for every candidate. Disabling the coupling uses the
// single `gamma` exponent everywhere.
struct OalConfig {
    enum class Criterion { wamd, cv_deviance };

    double gamma = 2.0;  // fixed weight exponent when coupling is off
    bool couple_gamma = true;
    double gamma_convergence_factor = 2.0;
    std::vector<double> lambda_exponents = {-10.0, -5.0, -2.0, -1.0, -0.75,
                                            -0.5,  -0.25, 0.25, 0.49};
    Criterion criterion = Criterion::wamd;
    double zero_guard = 1e-12;

    double gamma_for(double kappa) const {
        return couple_gamma ? 2.0 * (gamma_convergence_factor - kappa + 1.0) : gamma;
    }

    void validate() const {
        if (!(gamma > 1.0)) throw std::invalid_argument("oal: gamma must exceed 1");
        if (lambda_exponents.empty())
            throw std::invalid_argument("oal: lambda exponent set must be non-empty");
        for (double k : lambda_exponents)
            if (!(gamma_for(k) > 1.0))
                throw std::invalid_argument("oal: derived gamma must exceed 1");
    }
};

struct OalFit {
    Vector outcome_coef;   // weight-generating coefficients, standardized scale
    Vector weights;        // penalty factors |outcome_coef|^{-gamma} at the chosen candidate
    double chosen_lambda = 0.0;
    double chosen_gamma = 0.0;
    std::vector<double> candidate_lambdas;
    std::vector<double> criterion_values;
    FittedModel ps_model;  // logistic, original covariate scale
    bool weight_stage_fallback = false;
};

namespace detail {

// Weighted absolute mean difference over columns of x: per-covariate gap
// between IPW-weighted treated and control means, weighted by the
// magnitude of the outcome coefficient.
inline double wamd_columns(const Matrix& x, const Vector& z, const Vector& ps,
                           const Vector& outcome_coef) {
    const Eigen::Index n = x.rows();
    if (ps.size() != n || z.size() != n || outcome_coef.size() != x.cols())
        throw std::invalid_argument("wamd: size mismatch");
    Vector w1 = Vector::Zero(n), w0 = Vector::Zero(n);
    double s1 = 0.0, s0 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(ps[i] > 0.0 && ps[i] < 1.0))
            throw std::invalid_argument("wamd: propensity must lie strictly inside (0,1)");
        if (z[i] == 1.0) {
            w1[i] = 1.0 / ps[i];
            s1 += w1[i];
        } else {
            w0[i] = 1.0 / (1.0 - ps[i]);
            s0 += w0[i];
        }
    }
    if (s1 <= 0.0 || s0 <= 0.0) throw std::invalid_argument("wamd: an arm is empty");
    w1 /= s1;
    w0 /= s0;
    double total = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double diff = x.col(j).dot(w1) - x.col(j).dot(w0);
        total += std::abs(outcome_coef[j]) * std::abs(diff);
    }
    return total;
}

}  // namespace detail

inline double wamd(const Dataset& d, const Vector& ps, const Vector& outcome_coef) {
    return detail::wamd_columns(d.x, d.z, ps, outcome_coef);
}

// Fits the outcome-adaptive lasso PS model. Stage 1 regresses the outcome
// on treatment plus all covariates (unpenalized when n > p, otherwise a
// lasso-CV fallback, flagged); stage 2 turns outcome coefficients into
// penalty factors; stage 3 solves the weighted logistic lasso at each
// candidate lambda; stage 4 selects by the configured criterion.
inline OalFit fit_oal(const Dataset& d, const OalConfig& cfg, const FitConfig& fit_cfg) {
    cfg.validate();
    d.validate();
    const Eigen::Index n = d.n(), p = d.p();
    if (d.n_treated() == 0 || d.n_control() == 0)
        throw std::invalid_argument("fit_oal: both arms must be non-empty");
    if (p == 0) throw std::invalid_argument("fit_oal: no covariates");

    OalFit fit;
    StandardizationParams sp = standardization_params(d.x);
    std::vector<bool> constant(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j)
        constant[static_cast<std::size_t>(j)] = sp.sd[j] <= 1e-12;

    // stage 1: outcome regression for the weights, treatment unpenalized.
    // Constant columns carry no information and are left out (their weight
    // becomes infinite below).
    std::vector<Eigen::Index> live;
    for (Eigen::Index j = 0; j < p; ++j)
        if (!constant[static_cast<std::size_t>(j)]) live.push_back(j);
    if (n > p) {
        Matrix design(n, static_cast<Eigen::Index>(live.size()) + 1);
        design.col(0) = d.z;
        for (std::size_t k = 0; k < live.size(); ++k) {
            Eigen::Index j = live[k];
            design.col(static_cast<Eigen::Index>(k) + 1) =
                ((d.x.col(j).array() - sp.mean[j]) / sp.sd[j]).matrix();
        }
        GlmFit st1 = ols(design, d.y, /*strict=*/true);
        fit.outcome_coef = Vector::Zero(p);
        for (std::size_t k = 0; k < live.size(); ++k)
            fit.outcome_coef[live[k]] = st1.coef[static_cast<Eigen::Index>(k) + 1];
    } else {
        fit.weight_stage_fallback = true;
        Matrix design(n, p + 1);
        design.col(0) = d.z;
        design.rightCols(p) = d.x;
        Vector factors = Vector::Ones(p + 1);
        factors[0] = 0.0;  // treatment always stays in
        CvResult res = cross_validate(design, d.y, Family::linear,
                                      PenaltySpec::l1_with(factors), fit_cfg);
        Vector sd_design = standardization_params(design).sd;
        fit.outcome_coef.resize(p);
        for (Eigen::Index j = 0; j < p; ++j)
            fit.outcome_coef[j] = res.model.coef[j + 1] * sd_design[j + 1];
    }
    for (Eigen::Index j = 0; j < p; ++j)
        if (constant[static_cast<std::size_t>(j)]) fit.outcome_coef[j] = 0.0;

    // stage 2: penalty weights for a given exponent
    auto weights_for = [&](double gamma) {
        Vector w(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            double a = std::abs(fit.outcome_coef[j]);
            w[j] = a < cfg.zero_guard ? std::numeric_limits<double>::infinity()
                                      : std::pow(a, -gamma);
        }
        return w;
    };

    if (cfg.criterion == OalConfig::Criterion::cv_deviance) {
        // CV runs on the standard grid; the per-candidate coupling does not
        // apply, so the fixed exponent is used.
        fit.weights = weights_for(cfg.gamma);
        fit.chosen_gamma = cfg.gamma;
        CvResult res =
            cross_validate(d.x, d.z, Family::logistic, PenaltySpec::l1_with(fit.weights), fit_cfg);
        fit.ps_model = std::move(res.model);
        fit.chosen_lambda = fit.ps_model.lambda_used;
        fit.candidate_lambdas = res.curve.lambdas;
        fit.criterion_values = res.curve.mean_loss;
        return fit;
    }

    // stage 3: candidate lambdas n^kappa, largest first. The n^kappa
    // parameterization penalizes the unnormalized log-likelihood; the solver
    // works with the (1/n)-scaled loss, so candidate k maps to n^(kappa-1).
    std::vector<double> kappas = cfg.lambda_exponents;
    std::sort(kappas.begin(), kappas.end(), std::greater<double>());
    std::vector<FittedModel> path;
    std::vector<double> gammas;
    for (double kappa : kappas) {
        double lambda_k = std::pow(static_cast<double>(n), kappa - 1.0);
        FitConfig single = fit_cfg;
        single.lambda_grid.explicit_values = {lambda_k};
        std::vector<FittedModel> models = fit_path(
            d.x, d.z, Family::logistic, PenaltySpec::l1_with(weights_for(cfg.gamma_for(kappa))),
            single);
        path.push_back(std::move(models[0]));
        gammas.push_back(cfg.gamma_for(kappa));
    }

    // stage 4: weighted absolute mean difference on standardized covariates
    Matrix xs(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (constant[static_cast<std::size_t>(j)])
            xs.col(j).setZero();
        else
            xs.col(j) = (d.x.col(j).array() - sp.mean[j]) / sp.sd[j];
    }
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    fit.candidate_lambdas.clear();
    fit.criterion_values.clear();
    for (std::size_t k = 0; k < path.size(); ++k) {
        fit.candidate_lambdas.push_back(path[k].lambda_used);
        double value;
        Vector ps = path[k].predict_response(d.x);
        bool interior = true;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(ps[i] > 0.0 && ps[i] < 1.0)) { interior = false; break; }
        if (interior) {
            value = detail::wamd_columns(xs, d.z, ps, fit.outcome_coef);
        } else {
            value = std::numeric_limits<double>::infinity();  // degenerate candidate
        }
        fit.criterion_values.push_back(value);
        if (value < best_value) {  // ties keep the earlier (larger) lambda
            best_value = value;
            best = static_cast<int>(k);
        }
    }
    if (best < 0) throw std::runtime_error("fit_oal: no usable candidate lambda");
    fit.ps_model = path[static_cast<std::size_t>(best)];
    fit.chosen_lambda = fit.ps_model.lambda_used;
    fit.chosen_gamma = gammas[static_cast<std::size_t>(best)];
    fit.weights = weights_for(fit.chosen_gamma);
    return fit;
}

}  // namespace drpen
