#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drpen/dataset.hpp"
#include "drpen/glm.hpp"
#include "drpen/oal.hpp"
#include "drpen/penreg.hpp"

namespace drpen {

// Magnitudes above this are reported with the hyphen sentinel and excluded
// from Monte Carlo aggregation.
inline constexpr double kExtremeThreshold = 1e8;

enum class EstimatorId {
    naive,
    ipw_oal,
    gcomp_adl,
    aipw_targ,
    aipw_las_las,
    aipw_oal_las,
    aipw_oal_en,
    aipw_oal_adl,
    aipw_oal_aen,
    aipw_oal_scad,
    aipw_oal_lsp,
    aipw_oal_mcp,
    aipw_farrell,
};

inline const std::vector<std::pair<EstimatorId, std::string>>& estimator_names() {
    static const std::vector<std::pair<EstimatorId, std::string>> names = {
        {EstimatorId::naive, "naive"},
        {EstimatorId::ipw_oal, "IPW-OAL"},
        {EstimatorId::gcomp_adl, "gComp-AdL"},
        {EstimatorId::aipw_targ, "AIPW-Targ"},
        {EstimatorId::aipw_las_las, "AIPW-Las-Las"},
        {EstimatorId::aipw_oal_las, "AIPW-OAL-Las"},
        {EstimatorId::aipw_oal_en, "AIPW-OAL-EN"},
        {EstimatorId::aipw_oal_adl, "AIPW-OAL-AdL"},
        {EstimatorId::aipw_oal_aen, "AIPW-OAL-AEN"},
        {EstimatorId::aipw_oal_scad, "AIPW-OAL-SCAD"},
        {EstimatorId::aipw_oal_lsp, "AIPW-OAL-LSP"},
        {EstimatorId::aipw_oal_mcp, "AIPW-OAL-MCP"},
        {EstimatorId::aipw_farrell, "AIPW-Farrell"},
    };
    return names;
}

inline std::string estimator_name(EstimatorId id) {
    for (const auto& [eid, name] : estimator_names())
        if (eid == id) return name;
    return "?";
}

inline EstimatorId parse_estimator(const std::string& name) {
    for (const auto& [eid, ename] : estimator_names())
        if (ename == name) return eid;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

struct EstimatorSpec {
    EstimatorId id = EstimatorId::naive;
    std::optional<double> ps_clip;              // epsilon in (0, 0.5); default: none
    std::optional<std::vector<int>> known_sets; // C u P indices, AIPW-Targ only
    bool farrell_pooled = false;                // pool selected sets into both refits
};

struct AteDiagnostics {
    std::vector<int> ps_selected;
    std::vector<int> m1_selected;
    std::vector<int> m0_selected;
    std::vector<std::string> notes;
};

struct AteEstimate {
    double theta_hat = 0.0;
    std::optional<Vector> ps;
    std::optional<Vector> m1;
    std::optional<Vector> m0;
    bool extreme = false;
    AteDiagnostics diagnostics;
};

struct RunConfigs {
    FitConfig fit;
    OalConfig oal;
};

namespace detail {

inline void require_both_arms(const Dataset& d) {
    if (d.n_treated() == 0 || d.n_control() == 0)
        throw std::invalid_argument("estimator requires both treatment arms to be non-empty");
}

inline void require_interior_ps(const Vector& ps) {
    for (Eigen::Index i = 0; i < ps.size(); ++i)
        if (!(ps[i] > 0.0 && ps[i] < 1.0))
            throw std::invalid_argument("propensity scores must lie strictly inside (0,1)");
}

inline bool flag_extreme(AteEstimate& e) {
    e.extreme = !std::isfinite(e.theta_hat) || std::abs(e.theta_hat) > kExtremeThreshold;
    return e.extreme;
}

// Raw AIPW sum without validation; IEEE semantics so boundary propensities
// overflow into the extreme-value pathway instead of throwing.
inline double aipw_value(const Dataset& d, const Vector& ps, const Vector& m1,
                         const Vector& m0) {
    const double n = static_cast<double>(d.n());
    double treated = 0.0, control = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        double e = ps[i];
        double zi = d.z[i];
        treated += zi * d.y[i] / e - (zi - e) / e * m1[i];
        control += (1.0 - zi) * d.y[i] / (1.0 - e) + (zi - e) / (1.0 - e) * m0[i];
    }
    return treated / n - control / n;
}

inline Vector clip_ps(Vector ps, double eps) {
    for (Eigen::Index i = 0; i < ps.size(); ++i)
        ps[i] = std::clamp(ps[i], eps, 1.0 - eps);
    return ps;
}

}  // namespace detail

inline AteEstimate estimate_naive(const Dataset& d) {
    detail::require_both_arms(d);
    double s1 = 0.0, s0 = 0.0, n1 = 0.0, n0 = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.z[i] == 1.0) { s1 += d.y[i]; n1 += 1.0; }
        else { s0 += d.y[i]; n0 += 1.0; }
    }
    AteEstimate e;
    e.theta_hat = s1 / n1 - s0 / n0;
    detail::flag_extreme(e);
    return e;
}

// Hajek-normalized inverse propensity weighting.
inline AteEstimate estimate_ipw(const Dataset& d, const Vector& ps) {
    detail::require_both_arms(d);
    if (ps.size() != d.n()) throw std::invalid_argument("estimate_ipw: ps length mismatch");
    detail::require_interior_ps(ps);
    double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.z[i] == 1.0) {
            num1 += d.y[i] / ps[i];
            den1 += 1.0 / ps[i];
        } else {
            num0 += d.y[i] / (1.0 - ps[i]);
            den0 += 1.0 / (1.0 - ps[i]);
        }
    }
    AteEstimate e;
    e.theta_hat = num1 / den1 - num0 / den0;
    e.ps = ps;
    detail::flag_extreme(e);
    return e;
}

// Fits one arm's outcome model; receives that arm's rows plus the
// full-sample standardization parameters.
using ArmFitter = std::function<FittedModel(const Matrix& x_arm, const Vector& y_arm,
                                            const StandardizationParams* full_sample)>;

struct OutcomeModels {
    Vector m1, m0;  // predictions for every row
    std::vector<int> m1_selected, m0_selected;
};

// Per-arm fits, predictions over the full sample. Covariates are
// standardized with full-sample parameters so predictions stay defined for
// rows outside the fitted arm.
inline OutcomeModels fit_outcome_models(const Dataset& d, const ArmFitter& fit_arm) {
    detail::require_both_arms(d);
    StandardizationParams sp = standardization_params(d.x);
    OutcomeModels out;
    for (double arm : {1.0, 0.0}) {
        auto rows = d.arm_rows(arm);
        if (rows.size() < 2)
            throw std::invalid_argument("outcome model: arm has fewer than 2 rows");
        Matrix xa(static_cast<Eigen::Index>(rows.size()), d.p());
        Vector ya(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            xa.row(static_cast<Eigen::Index>(k)) = d.x.row(rows[k]);
            ya[static_cast<Eigen::Index>(k)] = d.y[rows[k]];
        }
        FittedModel m = fit_arm(xa, ya, &sp);
        if (arm == 1.0) {
            out.m1 = m.predict_linear(d.x);
            out.m1_selected = m.selected;
        } else {
            out.m0 = m.predict_linear(d.x);
            out.m0_selected = m.selected;
        }
    }
    return out;
}

inline AteEstimate estimate_gcomp(const Dataset& d, const ArmFitter& fit_outcome) {
    OutcomeModels om = fit_outcome_models(d, fit_outcome);
    AteEstimate e;
    e.theta_hat = om.m1.mean() - om.m0.mean();
    e.m1 = std::move(om.m1);
    e.m0 = std::move(om.m0);
    e.diagnostics.m1_selected = std::move(om.m1_selected);
    e.diagnostics.m0_selected = std::move(om.m0_selected);
    detail::flag_extreme(e);
    return e;
}

inline AteEstimate estimate_aipw(const Dataset& d, const Vector& ps, const Vector& m1,
                                 const Vector& m0) {
    detail::require_both_arms(d);
    if (ps.size() != d.n() || m1.size() != d.n() || m0.size() != d.n())
        throw std::invalid_argument("estimate_aipw: input length mismatch");
    detail::require_interior_ps(ps);
    AteEstimate e;
    e.theta_hat = detail::aipw_value(d, ps, m1, m0);
    e.ps = ps;
    e.m1 = m1;
    e.m0 = m0;
    detail::flag_extreme(e);
    return e;
}

// Farrell-style AIPW: lasso picks the covariates, unpenalized refits supply
// the propensities and outcome predictions. Degenerate refits flow into the
// extreme-value pathway; nothing is clipped.
inline AteEstimate estimate_farrell(const Dataset& d, const FitConfig& fit_cfg,
                                    bool pooled = false) {
    detail::require_both_arms(d);
    AteEstimate e;

    CvResult ps_cv = cross_validate(d.x, d.z, Family::logistic, PenaltySpec::l1_with(), fit_cfg);
    std::vector<int> s_ps = ps_cv.model.selected;

    StandardizationParams sp = standardization_params(d.x);
    std::vector<int> s_arm[2];
    for (int arm = 0; arm <= 1; ++arm) {
        auto rows = d.arm_rows(static_cast<double>(arm));
        Matrix xa(static_cast<Eigen::Index>(rows.size()), d.p());
        Vector ya(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            xa.row(static_cast<Eigen::Index>(k)) = d.x.row(rows[k]);
            ya[static_cast<Eigen::Index>(k)] = d.y[rows[k]];
        }
        CvResult cv = cross_validate(xa, ya, Family::linear, PenaltySpec::l1_with(), fit_cfg, &sp);
        s_arm[arm] = cv.model.selected;
    }

    if (pooled) {
        std::vector<int> all = s_ps;
        all.insert(all.end(), s_arm[0].begin(), s_arm[0].end());
        all.insert(all.end(), s_arm[1].begin(), s_arm[1].end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        s_ps = all;
        s_arm[0] = all;
        s_arm[1] = all;
        e.diagnostics.notes.push_back("farrell: pooled selection");
    }

    GlmFit ps_refit = logistic_ml(select_columns(d.x, s_ps), d.z);
    if (!ps_refit.converged)
        e.diagnostics.notes.push_back("farrell: propensity refit did not converge");
    Vector ps = glm_probabilities(ps_refit, select_columns(d.x, s_ps));

    Vector m[2];
    for (int arm = 0; arm <= 1; ++arm) {
        auto rows = d.arm_rows(static_cast<double>(arm));
        Matrix xa(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s_arm[arm].size()));
        Vector ya(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t c = 0; c < s_arm[arm].size(); ++c)
                xa(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
                    d.x(rows[k], s_arm[arm][c]);
            ya[static_cast<Eigen::Index>(k)] = d.y[rows[k]];
        }
        GlmFit refit = ols(xa, ya, /*strict=*/false);
        if (refit.rank_deficient)
            e.diagnostics.notes.push_back("farrell: rank-deficient outcome refit");
        m[arm] = glm_linear_predictor(refit, select_columns(d.x, s_arm[arm]));
    }

    e.theta_hat = detail::aipw_value(d, ps, m[1], m[0]);
    e.ps = std::move(ps);
    e.m1 = std::move(m[1]);
    e.m0 = std::move(m[0]);
    e.diagnostics.ps_selected = std::move(s_ps);
    e.diagnostics.m1_selected = std::move(s_arm[1]);
    e.diagnostics.m0_selected = std::move(s_arm[0]);
    detail::flag_extreme(e);
    return e;
}

namespace detail {

enum class PsMethod { none, oal, lasso, known };
enum class OutcomeMethod { none, las, en, adl, aen, scad, lsp, mcp, known };

struct TableEntry {
    PsMethod ps;
    OutcomeMethod outcome;
};

inline TableEntry table1_entry(EstimatorId id) {
    switch (id) {
        case EstimatorId::naive: return {PsMethod::none, OutcomeMethod::none};
        case EstimatorId::ipw_oal: return {PsMethod::oal, OutcomeMethod::none};
        case EstimatorId::gcomp_adl: return {PsMethod::none, OutcomeMethod::adl};
        case EstimatorId::aipw_targ: return {PsMethod::known, OutcomeMethod::known};
        case EstimatorId::aipw_las_las: return {PsMethod::lasso, OutcomeMethod::las};
        case EstimatorId::aipw_oal_las: return {PsMethod::oal, OutcomeMethod::las};
        case EstimatorId::aipw_oal_en: return {PsMethod::oal, OutcomeMethod::en};
        case EstimatorId::aipw_oal_adl: return {PsMethod::oal, OutcomeMethod::adl};
        case EstimatorId::aipw_oal_aen: return {PsMethod::oal, OutcomeMethod::aen};
        case EstimatorId::aipw_oal_scad: return {PsMethod::oal, OutcomeMethod::scad};
        case EstimatorId::aipw_oal_lsp: return {PsMethod::oal, OutcomeMethod::lsp};
        case EstimatorId::aipw_oal_mcp: return {PsMethod::oal, OutcomeMethod::mcp};
        case EstimatorId::aipw_farrell: return {PsMethod::lasso, OutcomeMethod::las};
    }
    return {PsMethod::none, OutcomeMethod::none};
}

inline ArmFitter make_arm_fitter(OutcomeMethod method, const FitConfig& cfg) {
    switch (method) {
        case OutcomeMethod::las:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                return cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg, sp).model;
            };
        case OutcomeMethod::en:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                return fit_elastic_net(x, y, Family::linear, cfg, 0.5, sp);
            };
        case OutcomeMethod::adl:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                return fit_adaptive_lasso(x, y, Family::linear, cfg, sp);
            };
        case OutcomeMethod::aen:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                return fit_adaptive_elastic_net(x, y, Family::linear, cfg, {0.2, 0.4, 0.6, 0.8}, sp);
            };
        case OutcomeMethod::scad:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                PenaltySpec pen;
                pen.kind = PenaltyKind::scad;
                return cross_validate(x, y, Family::linear, pen, cfg, sp).model;
            };
        case OutcomeMethod::lsp:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                return fit_lsp(x, y, Family::linear, cfg, 0.0001, 4, sp);
            };
        case OutcomeMethod::mcp:
            return [cfg](const Matrix& x, const Vector& y, const StandardizationParams* sp) {
                PenaltySpec pen;
                pen.kind = PenaltyKind::mcp;
                return cross_validate(x, y, Family::linear, pen, cfg, sp).model;
            };
        default:
            throw std::invalid_argument("no outcome model for this estimator");
    }
}

struct PsFit {
    Vector ps;
    std::vector<int> selected;
};

inline PsFit fit_ps(PsMethod method, const Dataset& d, const RunConfigs& cfgs,
                    const EstimatorSpec& spec) {
    PsFit out;
    switch (method) {
        case PsMethod::oal: {
            OalFit oal = fit_oal(d, cfgs.oal, cfgs.fit);
            out.ps = oal.ps_model.predict_response(d.x);
            out.selected = oal.ps_model.selected;
            break;
        }
        case PsMethod::lasso: {
            CvResult cv =
                cross_validate(d.x, d.z, Family::logistic, PenaltySpec::l1_with(), cfgs.fit);
            out.ps = cv.model.predict_response(d.x);
            out.selected = cv.model.selected;
            break;
        }
        case PsMethod::known: {
            if (!spec.known_sets)
                throw std::invalid_argument(
                    "AIPW-Targ requires known confounder/predictor sets (simulation only)");
            Matrix xk = select_columns(d.x, *spec.known_sets);
            GlmFit fit = logistic_ml(xk, d.z);
            out.ps = glm_probabilities(fit, xk);
            out.selected = *spec.known_sets;
            break;
        }
        default:
            throw std::invalid_argument("estimator has no propensity model");
    }
    return out;
}

inline OutcomeModels fit_known_outcome(const Dataset& d, const std::vector<int>& sets) {
    OutcomeModels out;
    Matrix xk = select_columns(d.x, sets);
    for (double arm : {1.0, 0.0}) {
        auto rows = d.arm_rows(arm);
        if (rows.size() < 2)
            throw std::invalid_argument("outcome model: arm has fewer than 2 rows");
        Matrix xa(static_cast<Eigen::Index>(rows.size()), xk.cols());
        Vector ya(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            xa.row(static_cast<Eigen::Index>(k)) = xk.row(rows[k]);
            ya[static_cast<Eigen::Index>(k)] = d.y[rows[k]];
        }
        GlmFit fit = ols(xa, ya, /*strict=*/true);
        Vector pred = glm_linear_predictor(fit, xk);
        if (arm == 1.0) { out.m1 = pred; out.m1_selected = sets; }
        else { out.m0 = pred; out.m0_selected = sets; }
    }
    return out;
}

}  // namespace detail

// Dispatches one Table-1 estimator on a dataset.
inline AteEstimate run_estimator(const EstimatorSpec& spec, const Dataset& d,
                                 const RunConfigs& cfgs) {
    if (spec.ps_clip && !(*spec.ps_clip > 0.0 && *spec.ps_clip < 0.5))
        throw std::invalid_argument("ps_clip must lie in (0, 0.5)");
    if (spec.id == EstimatorId::naive) return estimate_naive(d);
    if (d.p() == 0) throw std::invalid_argument("estimator requires at least one covariate");

    if (spec.id == EstimatorId::aipw_farrell) {
        AteEstimate e = estimate_farrell(d, cfgs.fit, spec.farrell_pooled);
        return e;
    }

    detail::TableEntry entry = detail::table1_entry(spec.id);
    if (spec.id == EstimatorId::gcomp_adl) {
        return estimate_gcomp(d, detail::make_arm_fitter(entry.outcome, cfgs.fit));
    }

    detail::PsFit ps = detail::fit_ps(entry.ps, d, cfgs, spec);
    if (spec.ps_clip) ps.ps = detail::clip_ps(std::move(ps.ps), *spec.ps_clip);

    if (spec.id == EstimatorId::ipw_oal) {
        AteEstimate e = estimate_ipw(d, ps.ps);
        e.diagnostics.ps_selected = std::move(ps.selected);
        if (spec.ps_clip) e.diagnostics.notes.push_back("ps clipped");
        return e;
    }

    OutcomeModels om = spec.id == EstimatorId::aipw_targ
                           ? detail::fit_known_outcome(d, *spec.known_sets)
                           : fit_outcome_models(d, detail::make_arm_fitter(entry.outcome, cfgs.fit));
    AteEstimate e = estimate_aipw(d, ps.ps, om.m1, om.m0);
    e.diagnostics.ps_selected = std::move(ps.selected);
    e.diagnostics.m1_selected = std::move(om.m1_selected);
    e.diagnostics.m0_selected = std::move(om.m0_selected);
    if (spec.ps_clip) e.diagnostics.notes.push_back("ps clipped");
    return e;
}

struct EstimateOutcome {
    std::optional<AteEstimate> estimate;
    std::string error;
};

// Runs several estimators on the same dataset, sharing the expensive model
// fits (the OAL propensity model, the lasso propensity model, per-method
// outcome models). Per-estimator failures are captured, not thrown.
inline std::vector<EstimateOutcome> run_estimator_set(const std::vector<EstimatorSpec>& specs,
                                                      const Dataset& d, const RunConfigs& cfgs) {
    using detail::OutcomeMethod;
    using detail::PsMethod;
    std::map<PsMethod, std::string> ps_err;
    std::map<PsMethod, detail::PsFit> ps_cache;
    std::map<OutcomeMethod, OutcomeModels> om_cache;
    std::map<OutcomeMethod, std::string> om_err;

    auto get_ps = [&](PsMethod m, const EstimatorSpec& spec) -> const detail::PsFit& {
        auto it = ps_cache.find(m);
        if (it != ps_cache.end()) return it->second;
        auto eit = ps_err.find(m);
        if (eit != ps_err.end()) throw std::runtime_error(eit->second);
        try {
            return ps_cache.emplace(m, detail::fit_ps(m, d, cfgs, spec)).first->second;
        } catch (const std::exception& ex) {
            ps_err[m] = ex.what();
            throw;
        }
    };
    auto get_outcome = [&](OutcomeMethod m) -> const OutcomeModels& {
        auto it = om_cache.find(m);
        if (it != om_cache.end()) return it->second;
        auto eit = om_err.find(m);
        if (eit != om_err.end()) throw std::runtime_error(eit->second);
        try {
            return om_cache.emplace(m, fit_outcome_models(d, detail::make_arm_fitter(m, cfgs.fit)))
                .first->second;
        } catch (const std::exception& ex) {
            om_err[m] = ex.what();
            throw;
        }
    };

    std::vector<EstimateOutcome> out(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const EstimatorSpec& spec = specs[k];
        try {
            if (spec.id == EstimatorId::naive || spec.id == EstimatorId::aipw_farrell ||
                spec.id == EstimatorId::aipw_targ) {
                out[k].estimate = run_estimator(spec, d, cfgs);
                continue;
            }
            if (d.p() == 0) throw std::invalid_argument("estimator requires at least one covariate");
            detail::TableEntry entry = detail::table1_entry(spec.id);
            if (spec.id == EstimatorId::gcomp_adl) {
                const OutcomeModels& om = get_outcome(entry.outcome);
                AteEstimate e;
                e.theta_hat = om.m1.mean() - om.m0.mean();
                e.m1 = om.m1;
                e.m0 = om.m0;
                e.diagnostics.m1_selected = om.m1_selected;
                e.diagnostics.m0_selected = om.m0_selected;
                detail::flag_extreme(e);
                out[k].estimate = std::move(e);
                continue;
            }
            detail::PsFit ps = get_ps(entry.ps, spec);
            Vector psv = spec.ps_clip ? detail::clip_ps(ps.ps, *spec.ps_clip) : ps.ps;
            AteEstimate e;
            if (spec.id == EstimatorId::ipw_oal) {
                e = estimate_ipw(d, psv);
            } else {
                const OutcomeModels& om = get_outcome(entry.outcome);
                e = estimate_aipw(d, psv, om.m1, om.m0);
                e.diagnostics.m1_selected = om.m1_selected;
                e.diagnostics.m0_selected = om.m0_selected;
            }
            e.diagnostics.ps_selected = ps.selected;
            if (spec.ps_clip) e.diagnostics.notes.push_back("ps clipped");
            out[k].estimate = std::move(e);
        } catch (const std::exception& ex) {
            out[k].error = ex.what();
        }
    }
    return out;
}

}  // namespace drpen
