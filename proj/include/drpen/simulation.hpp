#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drpen/dataset.hpp"
#include "drpen/estimators.hpp"
#include "drpen/parallel.hpp"
#include "drpen/rng.hpp"

namespace drpen {

enum class Confounding { strong, weak };
enum class CovariateType { continuous, binary };
enum class Misspec { none, ps, outcome, both };

inline std::string to_string(Confounding c) { return c == Confounding::strong ? "strong" : "weak"; }
inline std::string to_string(CovariateType c) {
    return c == CovariateType::continuous ? "continuous" : "binary";
}
inline std::string to_string(Misspec m) {
    switch (m) {
        case Misspec::none: return "none";
        case Misspec::ps: return "ps";
        case Misspec::outcome: return "outcome";
        case Misspec::both: return "both";
    }
    return "?";
}

inline Confounding parse_confounding(const std::string& s) {
    if (s == "strong") return Confounding::strong;
    if (s == "weak") return Confounding::weak;
    throw std::invalid_argument("unknown confounding level '" + s + "'");
}
inline CovariateType parse_covariate_type(const std::string& s) {
    if (s == "continuous") return CovariateType::continuous;
    if (s == "binary") return CovariateType::binary;
    throw std::invalid_argument("unknown covariate type '" + s + "'");
}
inline Misspec parse_misspec(const std::string& s) {
    if (s == "none") return Misspec::none;
    if (s == "ps") return Misspec::ps;
    if (s == "outcome") return Misspec::outcome;
    if (s == "both") return Misspec::both;
    throw std::invalid_argument("unknown misspecification mode '" + s + "'");
}

inline constexpr double kTrueAte = 0.5;

struct ScenarioConfig {
    std::string id;
    int n = 200;
    int p = 80;
    double rho = 0.0;
    Confounding confounding = Confounding::strong;
    CovariateType covariate_type = CovariateType::continuous;
    Misspec misspec = Misspec::none;
    int reps = 1000;
    std::uint64_t seed = 0;
    std::vector<EstimatorSpec> estimators;

    void validate() const {
        if (n < 2) throw std::invalid_argument("scenario: n must be >= 2");
        if (p < 7) throw std::invalid_argument("scenario: p must be >= 7");
        if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("scenario: rho must be in [0,1)");
        if (rho != 0.0 && misspec != Misspec::none)
            throw std::invalid_argument("scenario: rho != 0 requires misspec = none");
        if (reps < 1) throw std::invalid_argument("scenario: reps must be >= 1");
        if (estimators.empty()) throw std::invalid_argument("scenario: no estimators configured");
    }
};

// Equicorrelated standard normal covariates: sqrt(rho)*g_i + sqrt(1-rho)*e_ij.
inline Matrix gen_covariates(int n, int p, double rho, Rng& rng) {
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("gen_covariates: rho must be in [0,1)");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, p);
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    for (int i = 0; i < n; ++i) {
        double g = rho > 0.0 ? normal(rng) : 0.0;
        for (int j = 0; j < p; ++j) x(i, j) = a * g + b * normal(rng);
    }
    return x;
}

// 1 if the entry is positive, otherwise -1.
inline Matrix binarize(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) > 0.0 ? 1.0 : -1.0;
    return out;
}

// Nonlinear transform of the first six columns; the rest pass through.
inline Matrix transform_u(const Matrix& x) {
    if (x.cols() < 7) throw std::invalid_argument("transform_u: needs at least 7 columns");
    Matrix u = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double x1 = x(i, 0), x2 = x(i, 1), x3 = x(i, 2), x4 = x(i, 3), x5 = x(i, 4), x6 = x(i, 5);
        u(i, 0) = 3.0 * x1 / (1.0 + std::exp(x2));
        u(i, 1) = 5.0 * std::sin(x2);
        u(i, 2) = x3 * x3 * x3 / 3.0;
        u(i, 3) = 5.0 * std::sin(x4);
        u(i, 4) = (x5 + x6) / std::sqrt(2.0);
        u(i, 5) = 5.0 * std::sin(x6);
    }
    return u;
}

// DGP coefficient vectors; confounders {1,2}, outcome predictors {3,4},
// instruments {5,6}, spurious {7..p} (1-based).
inline Vector alpha_vector(Confounding c, int p) {
    Vector a = Vector::Zero(p);
    double lead = c == Confounding::strong ? 1.0 : 0.4;
    a[0] = lead;
    a[1] = lead;
    a[4] = 1.0;
    a[5] = 1.0;
    return a;
}

inline Vector beta_vector(Confounding c, int p) {
    Vector b = Vector::Zero(p);
    double lead = c == Confounding::strong ? 0.6 : 0.2;
    b[0] = lead;
    b[1] = lead;
    b[2] = 0.6;
    b[3] = 0.6;
    return b;
}

// Bernoulli(expit(v alpha)); no intercept in the treatment model.
inline Vector gen_treatment(const Matrix& v, const Vector& alpha, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector eta = v * alpha;
    Vector z(v.rows());
    for (Eigen::Index i = 0; i < v.rows(); ++i) z[i] = unif(rng) < expit(eta[i]) ? 1.0 : 0.0;
    return z;
}

// y = 0.5 z + v beta + eps; noise_sd = 0 is a test hook for exact outcomes.
inline Vector gen_outcome(const Matrix& v, const Vector& z, const Vector& beta, Rng& rng,
                          double noise_sd = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector y = kTrueAte * z + v * beta;
    if (noise_sd > 0.0)
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise_sd * normal(rng);
    return y;
}

// One simulated dataset. The estimand-facing covariates are always the raw
// (or binarized) X; the transformed U exists only inside the generators.
inline Dataset make_replication(const ScenarioConfig& cfg, int rep_index,
                                std::uint64_t base_seed) {
    Rng rng = make_rng(derive_seed(base_seed, static_cast<std::uint64_t>(rep_index)));
    Matrix x = gen_covariates(cfg.n, cfg.p, cfg.rho, rng);
    if (cfg.covariate_type == CovariateType::binary) x = binarize(x);

    const bool need_u = cfg.misspec != Misspec::none;
    Matrix u;
    if (need_u) u = transform_u(x);
    const Matrix& v_treat = (cfg.misspec == Misspec::ps || cfg.misspec == Misspec::both) ? u : x;
    const Matrix& v_out = (cfg.misspec == Misspec::outcome || cfg.misspec == Misspec::both) ? u : x;

    Dataset d;
    d.z = gen_treatment(v_treat, alpha_vector(cfg.confounding, cfg.p), rng);
    d.y = gen_outcome(v_out, d.z, beta_vector(cfg.confounding, cfg.p), rng);
    d.x = std::move(x);
    d.col_names.reserve(static_cast<std::size_t>(cfg.p));
    for (int j = 0; j < cfg.p; ++j) d.col_names.push_back("x" + std::to_string(j + 1));
    d.col_kinds.assign(static_cast<std::size_t>(cfg.p),
                       cfg.covariate_type == CovariateType::binary ? ColKind::binary
                                                                   : ColKind::continuous);
    return d;
}

struct ReplicationResult {
    // one entry per configured estimator; nullopt = failed replication
    std::vector<std::optional<double>> theta;
    std::vector<bool> extreme;
    std::vector<std::vector<int>> ps_selected;
    std::vector<std::string> errors;
};

struct EstimatorMetrics {
    std::string estimator;
    std::optional<double> bias;
    std::optional<double> se;
    std::optional<double> rmse;
    int n_valid = 0;
    int n_extreme = 0;
};

struct MetricsSummary {
    std::vector<EstimatorMetrics> rows;
};

struct ScenarioResult {
    std::vector<ReplicationResult> replications;
    MetricsSummary metrics;
};

namespace detail {

inline MetricsSummary summarize(const ScenarioConfig& cfg,
                                const std::vector<ReplicationResult>& reps) {
    MetricsSummary summary;
    for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
        EstimatorMetrics m;
        m.estimator = estimator_name(cfg.estimators[k].id);
        double sum = 0.0;
        std::vector<double> values;
        for (const auto& rep : reps) {
            if (rep.extreme[k]) {
                ++m.n_extreme;
                continue;
            }
            if (!rep.theta[k]) continue;
            values.push_back(*rep.theta[k]);
            sum += *rep.theta[k];
        }
        m.n_valid = static_cast<int>(values.size());
        if (m.n_valid >= 1) {
            double mean = sum / m.n_valid;
            double bias = mean - kTrueAte;
            if (std::abs(bias) <= kExtremeThreshold) m.bias = bias;
            if (m.n_valid >= 2) {
                double ss = 0.0;
                for (double v : values) ss += (v - mean) * (v - mean);
                double se = std::sqrt(ss / (m.n_valid - 1));
                if (m.bias && se <= kExtremeThreshold) {
                    m.se = se;
                    m.rmse = std::sqrt(bias * bias + se * se);
                }
            }
        }
        summary.rows.push_back(std::move(m));
    }
    return summary;
}

}  // namespace detail

// Runs every configured estimator on `reps` simulated datasets and
// aggregates bias / SE / RMSE. Extreme-flagged estimates are excluded from
// the moments and counted; per-estimator failures are recorded as missing.
// Replications are independent and run on up to `jobs` threads; the
// aggregation is a deterministic reduction over replication index.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned jobs = 1) {
    cfg.validate();
    std::vector<EstimatorSpec> specs = cfg.estimators;
    for (auto& s : specs) {
        if (s.id == EstimatorId::aipw_targ && !s.known_sets)
            s.known_sets = std::vector<int>{0, 1, 2, 3};  // C u P, zero-based
    }

    ScenarioResult result;
    result.replications.resize(static_cast<std::size_t>(cfg.reps));
    parallel_for(static_cast<std::size_t>(cfg.reps), jobs, [&](std::size_t r) {
        Dataset d = make_replication(cfg, static_cast<int>(r), cfg.seed);
        RunConfigs cfgs;
        cfgs.fit.cv_seed = derive_seed(cfg.seed, r, 0xc5eed);
        std::vector<EstimateOutcome> outcomes = run_estimator_set(specs, d, cfgs);
        ReplicationResult rep;
        rep.theta.resize(specs.size());
        rep.extreme.assign(specs.size(), false);
        rep.ps_selected.resize(specs.size());
        rep.errors.resize(specs.size());
        for (std::size_t k = 0; k < specs.size(); ++k) {
            if (outcomes[k].estimate) {
                const AteEstimate& e = *outcomes[k].estimate;
                rep.extreme[k] = e.extreme;
                if (!e.extreme) rep.theta[k] = e.theta_hat;
                else if (std::isfinite(e.theta_hat)) rep.theta[k] = e.theta_hat;
                rep.ps_selected[k] = e.diagnostics.ps_selected;
            } else {
                rep.errors[k] = outcomes[k].error;
            }
        }
        result.replications[r] = std::move(rep);
    });
    result.metrics = detail::summarize(cfg, result.replications);
    return result;
}

// The full experiment grid: {strong, weak} x {continuous, binary} x three
// (n,p) sizes x (four misspecification modes at rho = 0, plus rho in
// {0.2, 0.5} with both models correct) = 72 settings.
inline std::vector<ScenarioConfig> paper_grid(int reps, std::uint64_t base_seed,
                                              const std::vector<EstimatorSpec>& estimators) {
    static const std::pair<int, int> sizes[] = {{200, 80}, {500, 200}, {1000, 400}};
    static const std::pair<Misspec, double> settings[] = {
        {Misspec::none, 0.0}, {Misspec::ps, 0.0},   {Misspec::outcome, 0.0},
        {Misspec::both, 0.0}, {Misspec::none, 0.2}, {Misspec::none, 0.5},
    };
    std::vector<ScenarioConfig> grid;
    int index = 0;
    for (Confounding conf : {Confounding::strong, Confounding::weak}) {
        for (CovariateType cov : {CovariateType::continuous, CovariateType::binary}) {
            for (auto [n, p] : sizes) {
                for (auto [mis, rho] : settings) {
                    ScenarioConfig cfg;
                    cfg.n = n;
                    cfg.p = p;
                    cfg.rho = rho;
                    cfg.confounding = conf;
                    cfg.covariate_type = cov;
                    cfg.misspec = mis;
                    cfg.reps = reps;
                    cfg.estimators = estimators;
                    cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(index), 0x5ce);
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "s%02d_n%d_p%d_%s_%s_%s_rho%g", index, n, p,
                                  to_string(conf).c_str(), to_string(cov).c_str(),
                                  to_string(mis).c_str(), rho);
                    cfg.id = buf;
                    grid.push_back(std::move(cfg));
                    ++index;
                }
            }
        }
    }
    return grid;
}

inline std::vector<EstimatorSpec> all_estimators() {
    std::vector<EstimatorSpec> specs;
    for (const auto& [id, name] : estimator_names()) specs.push_back(EstimatorSpec{id});
    return specs;
}

}  // namespace drpen
