#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drpen/dataset.hpp"
#include "drpen/estimators.hpp"
#include "drpen/parallel.hpp"
#include "drpen/rng.hpp"

namespace drpen {

inline constexpr double kNormalQuantile975 = 1.959964;

struct BootstrapResult {
    double theta_hat = 0.0;  // estimate on the original dataset
    double se = 0.0;         // sd of bootstrap estimates
    double ci_low = 0.0;
    double ci_high = 0.0;
    int b_requested = 0;
    int b_valid = 0;
};

// Nonparametric bootstrap: b row resamples with replacement, the full
// pipeline (variable selection included) rerun on each. The normal
// 95% interval is centered at the original-data estimate. Resamples with an
// empty arm are redrawn (at most 10 attempts); failed or extreme resamples
// are dropped and counted. The resample index -> RNG stream mapping is
// fixed, so results do not depend on execution order.
inline BootstrapResult bootstrap_ci(const Dataset& d, const EstimatorSpec& spec, int b,
                                    std::uint64_t seed, const RunConfigs& cfgs,
                                    unsigned jobs = 1) {
    if (b < 2) throw std::invalid_argument("bootstrap_ci: b must be >= 2");
    d.validate();

    BootstrapResult out;
    out.b_requested = b;
    out.theta_hat = run_estimator(spec, d, cfgs).theta_hat;

    const Eigen::Index n = d.n();
    std::vector<std::optional<double>> estimates(static_cast<std::size_t>(b));
    parallel_for(static_cast<std::size_t>(b), jobs, [&](std::size_t r) {
        for (int attempt = 0; attempt < 10; ++attempt) {
            Rng rng = make_rng(derive_seed(seed, r + 1, static_cast<std::uint64_t>(attempt)));
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
            for (auto& idx : rows) idx = pick(rng);
            Dataset res = d.subset_rows(rows);
            if (res.n_treated() == 0 || res.n_control() == 0) continue;  // redraw
            try {
                RunConfigs rc = cfgs;
                rc.fit.cv_seed = derive_seed(seed, r + 1, 0xb007);
                AteEstimate e = run_estimator(spec, res, rc);
                if (!e.extreme && std::isfinite(e.theta_hat)) estimates[r] = e.theta_hat;
            } catch (const std::exception&) {
                // failed resample: dropped and counted below
            }
            return;
        }
    });

    double sum = 0.0;
    std::vector<double> valid;
    for (const auto& v : estimates)
        if (v) { valid.push_back(*v); sum += *v; }
    out.b_valid = static_cast<int>(valid.size());
    if (out.b_valid < 2)
        throw std::runtime_error("bootstrap_ci: fewer than 2 valid resample estimates");
    double mean = sum / out.b_valid;
    double ss = 0.0;
    for (double v : valid) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(ss / (out.b_valid - 1));
    out.ci_low = out.theta_hat - kNormalQuantile975 * out.se;
    out.ci_high = out.theta_hat + kNormalQuantile975 * out.se;
    return out;
}

}  // namespace drpen
