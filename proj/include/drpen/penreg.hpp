#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drpen/dataset.hpp"
#include "drpen/glm.hpp"
#include "drpen/penalty.hpp"
#include "drpen/rng.hpp"

namespace drpen {

enum class Family { linear, logistic };
enum class LambdaRule { min, one_se };

// Lambda sequence: either a log-spaced grid below the data-driven
// lambda_max, or explicit values. min_ratio <= 0 selects the default
// (1e-4 when n > p, else 1e-2).
struct LambdaGrid {
    int count = 100;
    double min_ratio = 0.0;
    std::vector<double> explicit_values;
};

struct FitConfig {
    LambdaGrid lambda_grid;
    double tol = 1e-7;          // max coefficient change per sweep
    long max_sweeps = 100000;   // per lambda
    int cv_folds = 10;
    std::uint64_t cv_seed = 0;
    LambdaRule lambda_rule = LambdaRule::one_se;
    int max_irls = 100;         // logistic quadratic-approximation loop cap
    double weight_floor = 1e-5; // working-weight floor
    bool record_objective = false;

    void validate() const {
        if (lambda_grid.count < 1) throw std::invalid_argument("lambda count must be >= 1");
        if (lambda_grid.min_ratio < 0.0 || lambda_grid.min_ratio >= 1.0)
            throw std::invalid_argument("lambda min_ratio must be in (0,1)");
        if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
        if (cv_folds < 2) throw std::invalid_argument("cv_folds must be >= 2");
    }
};

struct FittedModel {
    Family family = Family::linear;
    double intercept = 0.0;
    Vector coef;                 // original covariate scale
    std::vector<int> selected;   // indices of nonzero coefficients
    double lambda_used = 0.0;
    bool converged = true;
    long sweeps = 0;
    bool degenerate = false;     // intercept-only by construction
    // per-sweep penalized objective on the internal standardized problem
    // (linear family, filled when FitConfig::record_objective is set)
    std::vector<double> objective_trace;

    Vector predict_linear(const Matrix& x) const {
        return (x * coef).array() + intercept;
    }
    Vector predict_response(const Matrix& x) const {
        Vector eta = predict_linear(x);
        if (family == Family::logistic)
            for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = expit(eta[i]);
        return eta;
    }
};

namespace detail {

struct SolverState {
    Matrix xs;                // standardized covariates; excluded columns zeroed
    Vector y;
    Family family;
    PenaltySpec pen;
    Vector mean, sd;
    std::vector<bool> excluded;
    Vector col_sq_n;          // <xs_j, xs_j>/n (unweighted)
    Eigen::Index n, p;
};

inline SolverState prepare(const Matrix& x, const Vector& y, Family family,
                           const PenaltySpec& pen, const StandardizationParams* std_override) {
    if (x.rows() != y.size() || x.rows() < 2)
        throw std::invalid_argument("fit: x and y row counts differ or too few rows");
    pen.validate(x.cols());
    if (family == Family::logistic)
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0.0 && y[i] != 1.0)
                throw std::invalid_argument("logistic fit: response must be 0/1");

    SolverState s;
    s.n = x.rows();
    s.p = x.cols();
    s.y = y;
    s.family = family;
    s.pen = pen;
    if (std_override) {
        if (std_override->mean.size() != s.p || std_override->sd.size() != s.p)
            throw std::invalid_argument("standardization override length mismatch");
        s.mean = std_override->mean;
        s.sd = std_override->sd;
    } else {
        auto sp = standardization_params(x);
        s.mean = sp.mean;
        s.sd = sp.sd;
    }
    s.excluded.assign(static_cast<std::size_t>(s.p), false);
    s.xs.resize(s.n, s.p);
    for (Eigen::Index j = 0; j < s.p; ++j) {
        bool excl = s.sd[j] <= 1e-12 || std::isinf(s.pen.factor(j));
        s.excluded[static_cast<std::size_t>(j)] = excl;
        if (excl)
            s.xs.col(j).setZero();  // pinned at zero; harmless in dot products
        else
            s.xs.col(j) = (x.col(j).array() - s.mean[j]) / s.sd[j];
    }
    s.col_sq_n.resize(s.p);
    for (Eigen::Index j = 0; j < s.p; ++j)
        s.col_sq_n[j] = s.xs.col(j).squaredNorm() / static_cast<double>(s.n);
    return s;
}

inline std::vector<double> lambda_sequence(const SolverState& s, const FitConfig& cfg) {
    if (!cfg.lambda_grid.explicit_values.empty()) {
        std::vector<double> v = cfg.lambda_grid.explicit_values;
        std::sort(v.begin(), v.end(), std::greater<double>());
        return v;
    }
    // gradient of the (1/n)-scaled loss at the null model
    const double n = static_cast<double>(s.n);
    double ybar = s.y.mean();
    Vector r0 = s.y.array() - ybar;
    double mixdiv = s.pen.kind == PenaltyKind::elastic_net ? s.pen.mix : 1.0;
    double lmax = 0.0;
    for (Eigen::Index j = 0; j < s.p; ++j) {
        if (s.excluded[static_cast<std::size_t>(j)]) continue;
        double f = s.pen.factor(j);
        if (f <= 0.0) continue;  // unpenalized coordinates do not cap the grid
        double g = std::abs(s.xs.col(j).dot(r0)) / (n * f * mixdiv);
        lmax = std::max(lmax, g);
    }
    if (!(lmax > 0.0) || !std::isfinite(lmax)) lmax = 1.0;
    int count = cfg.lambda_grid.count;
    double min_ratio = cfg.lambda_grid.min_ratio;
    if (min_ratio <= 0.0) min_ratio = s.n > s.p ? 1e-4 : 1e-2;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (int l = 0; l < count; ++l) {
        double t = count == 1 ? 0.0 : static_cast<double>(l) / (count - 1);
        grid.push_back(lmax * std::pow(min_ratio, t));
    }
    return grid;
}

// One coordinate-descent pass over the weighted quadratic problem.
// r is the working residual, w the observation weights (empty = unweighted),
// d_j the per-coordinate curvature. Returns the largest coefficient change.
struct Sweeper {
    const SolverState& s;
    double lambda;
    Vector& beta;
    double& b0;
    Vector& r;
    const Vector* w;      // nullptr for linear family
    const Vector* d;      // curvature per coordinate
    double sum_w_n;       // <w,1>/n (1 for unweighted)

    double pass(bool active_only) {
        const double n = static_cast<double>(s.n);
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < s.p; ++j) {
            if (s.excluded[static_cast<std::size_t>(j)]) continue;
            if (active_only && beta[j] == 0.0) continue;
            double dj = (*d)[j];
            if (dj <= 0.0) continue;
            double u;
            if (w)
                u = (s.xs.col(j).array() * w->array() * r.array()).sum() / n + dj * beta[j];
            else
                u = s.xs.col(j).dot(r) / n + dj * beta[j];
            double lam_j = lambda * s.pen.factor(j);
            double bn = coordinate_update(u, dj, lam_j, s.pen);
            if (bn != beta[j]) {
                double delta = bn - beta[j];
                r -= delta * s.xs.col(j);
                beta[j] = bn;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        // intercept is never penalized
        double num = w ? w->dot(r) / n : r.mean();
        double delta0 = num / sum_w_n;
        if (delta0 != 0.0) {
            b0 += delta0;
            r.array() -= delta0;
            max_change = std::max(max_change, std::abs(delta0));
        }
        return max_change;
    }
};

inline double linear_objective(const SolverState& s, double lambda, const Vector& beta,
                               const Vector& r) {
    double obj = 0.5 * r.squaredNorm() / static_cast<double>(s.n);
    for (Eigen::Index j = 0; j < s.p; ++j) {
        if (s.excluded[static_cast<std::size_t>(j)]) continue;
        obj += penalty_term(beta[j], lambda * s.pen.factor(j), s.pen);
    }
    return obj;
}

// Full coordinate descent at one lambda with active-set cycling.
inline void solve_linear(const SolverState& s, double lambda, const FitConfig& cfg,
                         Vector& beta, double& b0, Vector& r, FittedModel& out) {
    Sweeper sw{s, lambda, beta, b0, r, nullptr, &s.col_sq_n, 1.0};
    long sweeps = 0;
    bool converged = false;
    while (sweeps < cfg.max_sweeps) {
        double ch = sw.pass(false);
        ++sweeps;
        if (cfg.record_objective)
            out.objective_trace.push_back(linear_objective(s, lambda, beta, r));
        if (ch < cfg.tol) { converged = true; break; }
        while (sweeps < cfg.max_sweeps) {
            double ach = sw.pass(true);
            ++sweeps;
            if (cfg.record_objective)
                out.objective_trace.push_back(linear_objective(s, lambda, beta, r));
            if (ach < cfg.tol) break;
        }
    }
    out.converged = converged;
    out.sweeps = sweeps;
}

inline void solve_logistic(const SolverState& s, double lambda, const FitConfig& cfg,
                           Vector& beta, double& b0, FittedModel& out) {
    const double n = static_cast<double>(s.n);
    long sweeps = 0;
    bool converged = false;
    Vector w(s.n), wr(s.n), d(s.p);
    for (int outer = 0; outer < cfg.max_irls; ++outer) {
        Vector eta = (s.xs * beta).array() + b0;
        double sum_w = 0.0;
        double deviance = 0.0;
        for (Eigen::Index i = 0; i < s.n; ++i) {
            double mu = expit(eta[i]);
            double wi = std::max(mu * (1.0 - mu), cfg.weight_floor);
            w[i] = wi;
            wr[i] = (s.y[i] - mu) / wi;  // working residual: z_i - eta_i with z working response
            sum_w += wi;
            double pc = std::clamp(mu, 1e-10, 1.0 - 1e-10);
            deviance += s.y[i] == 1.0 ? -2.0 * std::log(pc) : -2.0 * std::log(1.0 - pc);
        }
        // saturated fit: the quadratic approximation degenerates, stop here
        if (deviance <= 1e-3 * n) { converged = true; break; }
        for (Eigen::Index j = 0; j < s.p; ++j)
            d[j] = s.excluded[static_cast<std::size_t>(j)]
                       ? 0.0
                       : (s.xs.col(j).array().square() * w.array()).sum() / n;
        Vector beta_before = beta;
        double b0_before = b0;
        Sweeper sw{s, lambda, beta, b0, wr, &w, &d, sum_w / n};
        while (sweeps < cfg.max_sweeps) {
            double ch = sw.pass(false);
            ++sweeps;
            if (ch < cfg.tol) break;
            while (sweeps < cfg.max_sweeps) {
                double ach = sw.pass(true);
                ++sweeps;
                if (ach < cfg.tol) break;
            }
        }
        double outer_change =
            std::max((beta - beta_before).cwiseAbs().maxCoeff(), std::abs(b0 - b0_before));
        if (outer_change < cfg.tol) { converged = true; break; }
        if (sweeps >= cfg.max_sweeps) break;
    }
    out.converged = converged;
    out.sweeps = sweeps;
}

inline FittedModel finalize_model(const SolverState& s, double lambda, const Vector& beta,
                                  double b0, FittedModel&& partial) {
    FittedModel m = std::move(partial);
    m.family = s.family;
    m.lambda_used = lambda;
    m.coef = Vector::Zero(s.p);
    double adjust = 0.0;
    for (Eigen::Index j = 0; j < s.p; ++j) {
        if (s.excluded[static_cast<std::size_t>(j)] || beta[j] == 0.0) continue;
        m.coef[j] = beta[j] / s.sd[j];
        adjust += m.coef[j] * s.mean[j];
        m.selected.push_back(static_cast<int>(j));
    }
    m.intercept = b0 - adjust;
    m.degenerate = std::all_of(s.excluded.begin(), s.excluded.end(), [](bool b) { return b; });
    return m;
}

}  // namespace detail

// Pathwise solver: one fit per lambda, warm-started from large to small.
// Covariates are standardized internally (or with the supplied full-sample
// parameters) and coefficients returned on the original scale; constant
// columns and infinite-factor coordinates are pinned at zero.
inline std::vector<FittedModel> fit_path(const Matrix& x, const Vector& y, Family family,
                                         const PenaltySpec& penalty, const FitConfig& cfg,
                                         const StandardizationParams* std_override = nullptr) {
    cfg.validate();
    detail::SolverState s = detail::prepare(x, y, family, penalty, std_override);
    std::vector<double> grid = detail::lambda_sequence(s, cfg);

    Vector beta = Vector::Zero(s.p);
    double b0;
    Vector r;
    if (family == Family::linear) {
        b0 = s.y.mean();
        r = s.y.array() - b0;
    } else {
        double pbar = std::clamp(s.y.mean(), 1e-12, 1.0 - 1e-12);
        b0 = std::log(pbar / (1.0 - pbar));
    }

    std::vector<FittedModel> path;
    path.reserve(grid.size());
    for (double lambda : grid) {
        FittedModel work;
        if (family == Family::linear)
            detail::solve_linear(s, lambda, cfg, beta, b0, r, work);
        else
            detail::solve_logistic(s, lambda, cfg, beta, b0, work);
        path.push_back(detail::finalize_model(s, lambda, beta, b0, std::move(work)));
    }
    return path;
}

struct CvCurve {
    std::vector<double> lambdas;
    std::vector<double> mean_loss;
    std::vector<double> se_loss;
    int min_index = -1;
    int chosen_index = -1;
};

struct CvResult {
    FittedModel model;
    CvCurve curve;
};

namespace detail {

inline std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k,
                                                         std::uint64_t seed) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng = make_rng(derive_seed(seed, 0x0f01d5));
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < perm.size(); ++i)
        folds[i % static_cast<std::size_t>(k)].push_back(perm[i]);
    return folds;
}

inline bool folds_ok_for_logistic(const std::vector<std::vector<Eigen::Index>>& folds,
                                  const Vector& y) {
    double total_ones = y.sum();
    double total_zeros = static_cast<double>(y.size()) - total_ones;
    for (const auto& fold : folds) {
        double ones = 0;
        for (auto i : fold) ones += y[i];
        double zeros = static_cast<double>(fold.size()) - ones;
        // training part = everything outside this fold
        if (total_ones - ones <= 0.0 || total_zeros - zeros <= 0.0) return false;
    }
    return true;
}

inline double validation_loss(Family family, const FittedModel& m, const Matrix& xv,
                              const Vector& yv) {
    if (family == Family::linear) {
        Vector pred = m.predict_linear(xv);
        return (yv - pred).squaredNorm() / static_cast<double>(yv.size());
    }
    Vector prob = m.predict_response(xv);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < yv.size(); ++i) {
        double p = std::clamp(prob[i], 1e-10, 1.0 - 1e-10);
        dev += yv[i] == 1.0 ? -2.0 * std::log(p) : -2.0 * std::log(1.0 - p);
    }
    return dev / static_cast<double>(yv.size());
}

}  // namespace detail

// K-fold cross validation over the pathwise fit. Folds come from a seeded
// permutation (sizes differ by at most one); the model refit on the full
// data at the rule-selected lambda is returned together with the curve.
inline CvResult cross_validate(const Matrix& x, const Vector& y, Family family,
                               const PenaltySpec& penalty, const FitConfig& cfg,
                               const StandardizationParams* std_override = nullptr) {
    cfg.validate();
    const Eigen::Index n = x.rows();
    if (n < cfg.cv_folds) throw std::invalid_argument("cross_validate: fewer rows than folds");

    std::vector<FittedModel> full_path = fit_path(x, y, family, penalty, cfg, std_override);
    std::vector<double> grid;
    grid.reserve(full_path.size());
    for (const auto& m : full_path) grid.push_back(m.lambda_used);

    auto folds = detail::make_folds(n, cfg.cv_folds, cfg.cv_seed);
    if (family == Family::logistic && !detail::folds_ok_for_logistic(folds, y)) {
        folds = detail::make_folds(n, cfg.cv_folds, cfg.cv_seed + 1);
        if (!detail::folds_ok_for_logistic(folds, y))
            throw std::runtime_error("cross_validate: fold with a single treatment class");
    }

    FitConfig fold_cfg = cfg;
    fold_cfg.lambda_grid.explicit_values = grid;
    fold_cfg.record_objective = false;

    const std::size_t L = grid.size();
    Matrix losses(static_cast<Eigen::Index>(folds.size()), static_cast<Eigen::Index>(L));
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& val_rows = folds[f];
        std::vector<char> in_val(static_cast<std::size_t>(n), 0);
        for (auto i : val_rows) in_val[static_cast<std::size_t>(i)] = 1;
        Eigen::Index ntr = n - static_cast<Eigen::Index>(val_rows.size());
        Matrix xtr(ntr, x.cols()), xv(static_cast<Eigen::Index>(val_rows.size()), x.cols());
        Vector ytr(ntr), yv(static_cast<Eigen::Index>(val_rows.size()));
        Eigen::Index a = 0, b = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (in_val[static_cast<std::size_t>(i)]) {
                xv.row(b) = x.row(i);
                yv[b] = y[i];
                ++b;
            } else {
                xtr.row(a) = x.row(i);
                ytr[a] = y[i];
                ++a;
            }
        }
        std::vector<FittedModel> fold_path =
            fit_path(xtr, ytr, family, penalty, fold_cfg, std_override);
        for (std::size_t l = 0; l < L; ++l)
            losses(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(l)) =
                detail::validation_loss(family, fold_path[l], xv, yv);
    }

    CvCurve curve;
    curve.lambdas = grid;
    curve.mean_loss.resize(L);
    curve.se_loss.resize(L);
    const double K = static_cast<double>(folds.size());
    for (std::size_t l = 0; l < L; ++l) {
        double m = losses.col(static_cast<Eigen::Index>(l)).mean();
        double ss = (losses.col(static_cast<Eigen::Index>(l)).array() - m).square().sum();
        curve.mean_loss[l] = m;
        curve.se_loss[l] = K > 1 ? std::sqrt(ss / (K - 1.0)) / std::sqrt(K) : 0.0;
    }
    int min_index = 0;
    for (std::size_t l = 1; l < L; ++l)
        if (curve.mean_loss[l] < curve.mean_loss[static_cast<std::size_t>(min_index)])
            min_index = static_cast<int>(l);
    curve.min_index = min_index;
    int chosen = min_index;
    if (cfg.lambda_rule == LambdaRule::one_se) {
        double cutoff = curve.mean_loss[static_cast<std::size_t>(min_index)] +
                        curve.se_loss[static_cast<std::size_t>(min_index)];
        for (std::size_t l = 0; l < L; ++l) {
            if (curve.mean_loss[l] <= cutoff) { chosen = static_cast<int>(l); break; }
        }
    }
    curve.chosen_index = chosen;
    return CvResult{full_path[static_cast<std::size_t>(chosen)], std::move(curve)};
}

namespace detail {

// Penalty weights on the solver's internal (standardized) scale, so that
// scaling a raw column leaves the fit's predictions unchanged.
inline Vector standardized_scale_coef(const FittedModel& m, const Matrix& x,
                                      const StandardizationParams* std_override) {
    Vector sd;
    if (std_override) sd = std_override->sd;
    else sd = standardization_params(x).sd;
    Vector out = m.coef;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= sd[j];
    return out;
}

inline Vector inverse_abs_factors(const Vector& coef, double power, double zero_guard) {
    Vector f(coef.size());
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
        double a = std::abs(coef[j]);
        f[j] = a < zero_guard ? std::numeric_limits<double>::infinity()
                              : std::pow(a, -power);
    }
    return f;
}

}  // namespace detail

// Adaptive lasso: penalty factors 1/|initial coefficient| from an
// unpenalized fit (OLS for the linear family, logistic ML otherwise),
// then an L1 cross-validated fit with those factors.
inline FittedModel fit_adaptive_lasso(const Matrix& x, const Vector& y, Family family,
                                      const FitConfig& cfg,
                                      const StandardizationParams* std_override = nullptr) {
    if (x.cols() >= x.rows())
        throw std::invalid_argument("adaptive weights require an initial unpenalized fit");
    detail::SolverState s =
        detail::prepare(x, y, family, PenaltySpec::l1_with(), std_override);
    GlmFit init = family == Family::linear ? ols(s.xs, y, true) : logistic_ml(s.xs, y);
    PenaltySpec pen = PenaltySpec::l1_with(detail::inverse_abs_factors(init.coef, 1.0, 1e-12));
    return cross_validate(x, y, family, pen, cfg, std_override).model;
}

inline FittedModel fit_elastic_net(const Matrix& x, const Vector& y, Family family,
                                   const FitConfig& cfg, double mix = 0.5,
                                   const StandardizationParams* std_override = nullptr) {
    PenaltySpec pen;
    pen.kind = PenaltyKind::elastic_net;
    pen.mix = mix;
    pen.validate(x.cols());
    return cross_validate(x, y, family, pen, cfg, std_override).model;
}

// Two-stage adaptive elastic net: for each mixing value, a first EN fit
// supplies inverse-magnitude penalty factors for a second EN fit; the
// (mix, lambda) pair with the smallest CV loss at the selected lambda wins.
inline FittedModel fit_adaptive_elastic_net(const Matrix& x, const Vector& y, Family family,
                                            const FitConfig& cfg,
                                            const std::vector<double>& mix_grid = {0.2, 0.4,
                                                                                   0.6, 0.8},
                                            const StandardizationParams* std_override = nullptr) {
    if (mix_grid.empty()) throw std::invalid_argument("adaptive elastic net: empty mix grid");
    std::optional<FittedModel> best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double mix : mix_grid) {
        PenaltySpec stage1;
        stage1.kind = PenaltyKind::elastic_net;
        stage1.mix = mix;
        stage1.validate(x.cols());
        CvResult first = cross_validate(x, y, family, stage1, cfg, std_override);
        Vector std_coef = detail::standardized_scale_coef(first.model, x, std_override);
        PenaltySpec stage2 = stage1;
        stage2.factors = detail::inverse_abs_factors(std_coef, 1.0, 1e-12);
        CvResult second = cross_validate(x, y, family, stage2, cfg, std_override);
        double loss = second.curve.mean_loss[static_cast<std::size_t>(second.curve.chosen_index)];
        if (loss < best_loss) {
            best_loss = loss;
            best = std::move(second.model);
        }
    }
    return *best;
}

// Log-sum penalty via reweighted L1: start from unit weights and refresh
// them as 1/(|coef| + delta) between rounds.
inline FittedModel fit_lsp(const Matrix& x, const Vector& y, Family family,
                           const FitConfig& cfg, double delta = 0.0001, int l_max = 4,
                           const StandardizationParams* std_override = nullptr) {
    if (delta <= 0.0) throw std::invalid_argument("lsp: delta must be positive");
    int rounds = std::max(1, l_max);
    Vector w = Vector::Ones(x.cols());
    FittedModel model;
    for (int l = 0; l < rounds; ++l) {
        model = cross_validate(x, y, family, PenaltySpec::l1_with(w), cfg, std_override).model;
        if (l + 1 < rounds) {
            Vector std_coef = detail::standardized_scale_coef(model, x, std_override);
            for (Eigen::Index j = 0; j < w.size(); ++j)
                w[j] = 1.0 / (std::abs(std_coef[j]) + delta);
        }
    }
    return model;
}

}  // namespace drpen
