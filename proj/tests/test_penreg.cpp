#include <catch_amalgamated.hpp>

#include <random>

#include "drpen/penreg.hpp"

using namespace drpen;

namespace {

Matrix random_matrix(int n, int p, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    Matrix x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
    return x;
}

// y = x b + noise
Vector linear_response(const Matrix& x, const Vector& b, std::uint64_t seed, double noise = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise);
    Vector y = x * b;
    if (noise > 0)
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += normal(rng);
    return y;
}

Matrix standardized_copy(const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double m = x.col(j).mean();
        double s = std::sqrt((x.col(j).array() - m).square().sum() / x.rows());
        out.col(j) = (x.col(j).array() - m) / s;
    }
    return out;
}

FitConfig quick_cfg() {
    FitConfig cfg;
    cfg.lambda_grid.count = 40;
    cfg.cv_folds = 5;
    return cfg;
}

}  // namespace

TEST_CASE("lasso path: all penalized coefficients vanish at lambda_max") {
    Matrix x = random_matrix(60, 8, 21);
    Vector b = Vector::Zero(8);
    b[0] = 1.0;
    b[3] = -0.7;
    Vector y = linear_response(x, b, 22);
    for (PenaltyKind kind : {PenaltyKind::l1, PenaltyKind::elastic_net}) {
        PenaltySpec pen;
        pen.kind = kind;
        FitConfig cfg;
        cfg.lambda_grid.count = 5;
        auto path = fit_path(x, y, Family::linear, pen, cfg);
        REQUIRE(path.size() == 5);
        CHECK(path[0].selected.empty());
        CHECK(path[0].coef.cwiseAbs().maxCoeff() == 0.0);
        // further down the path something should enter
        CHECK_FALSE(path[4].selected.empty());
    }
}

TEST_CASE("lasso at lambda = 0 equals OLS (normal-equations oracle)") {
    const int n = 50, p = 5;
    Matrix x = random_matrix(n, p, 31);
    Vector b(p);
    b << 1.0, -0.5, 0.0, 2.0, 0.25;
    Vector y = linear_response(x, b, 32);

    FitConfig cfg;
    cfg.lambda_grid.explicit_values = {0.5, 0.1, 0.0};
    cfg.tol = 1e-10;
    auto path = fit_path(x, y, Family::linear, PenaltySpec::l1_with(), cfg);

    // independent oracle: least squares with intercept via normal equations
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Vector sol = (design.transpose() * design).ldlt().solve(design.transpose() * y);

    const FittedModel& m = path.back();
    CHECK(m.lambda_used == 0.0);
    CHECK_THAT(m.intercept, Catch::Matchers::WithinAbs(sol[0], 1e-6));
    for (int j = 0; j < p; ++j)
        CHECK_THAT(m.coef[j], Catch::Matchers::WithinAbs(sol[j + 1], 1e-6));
}

TEST_CASE("single standardized covariate: lasso equals soft-thresholded correlation") {
    const int n = 80;
    Matrix x = standardized_copy(random_matrix(n, 1, 41));
    Vector y = linear_response(x, Vector::Constant(1, 0.8), 42, 0.5);
    double rho = x.col(0).dot(y) / n;  // y need not be centered: x is
    double lambda = 0.3 * std::abs(rho);
    FitConfig cfg;
    cfg.lambda_grid.explicit_values = {lambda};
    cfg.tol = 1e-12;
    auto path = fit_path(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    CHECK_THAT(path[0].coef[0],
               Catch::Matchers::WithinAbs(soft_threshold(rho, lambda), 1e-8));
}

TEST_CASE("KKT conditions hold along the lasso path") {
    const int n = 70, p = 10;
    Matrix x = standardized_copy(random_matrix(n, p, 51));
    Vector b = Vector::Zero(p);
    b[1] = 1.2;
    b[4] = -0.6;
    b[7] = 0.3;
    Vector y = linear_response(x, b, 52);
    FitConfig cfg;
    cfg.lambda_grid.count = 30;
    auto path = fit_path(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    for (const auto& m : path) {
        Vector resid = y - m.predict_linear(x);
        for (int j = 0; j < p; ++j) {
            double g = x.col(j).dot(resid) / n;
            if (m.coef[j] == 0.0) {
                CHECK(std::abs(g) <= m.lambda_used + 1e-4);
            } else {
                double sign = m.coef[j] > 0 ? 1.0 : -1.0;
                CHECK_THAT(g, Catch::Matchers::WithinAbs(sign * m.lambda_used, 1e-4));
            }
        }
    }
}

TEST_CASE("objective is non-increasing over coordinate-descent sweeps") {
    const int n = 60, p = 12;
    Matrix x = random_matrix(n, p, 61);
    Vector b = Vector::Zero(p);
    b.head(4).setConstant(0.8);
    Vector y = linear_response(x, b, 62);
    for (PenaltyKind kind : {PenaltyKind::l1, PenaltyKind::elastic_net}) {
        PenaltySpec pen;
        pen.kind = kind;
        FitConfig cfg;
        cfg.lambda_grid.count = 25;
        cfg.record_objective = true;
        auto path = fit_path(x, y, Family::linear, pen, cfg);
        long checked = 0;
        for (const auto& m : path) {
            for (std::size_t s = 1; s < m.objective_trace.size(); ++s) {
                REQUIRE(m.objective_trace[s] <= m.objective_trace[s - 1] + 1e-10);
                ++checked;
            }
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("elastic net ties duplicated covariates together") {
    const int n = 50;
    Matrix base = random_matrix(n, 3, 71);
    Matrix x(n, 4);
    x.col(0) = base.col(0);
    x.col(1) = base.col(0);  // exact duplicate
    x.col(2) = base.col(1);
    x.col(3) = base.col(2);
    Vector b(4);
    b << 1.0, 0.0, -0.5, 0.25;
    Vector y = linear_response(x, b, 72, 0.3);
    PenaltySpec pen;
    pen.kind = PenaltyKind::elastic_net;
    pen.mix = 0.5;
    FitConfig cfg;
    cfg.lambda_grid.count = 12;
    cfg.lambda_grid.min_ratio = 0.05;  // keep the quadratic term active
    cfg.tol = 1e-10;
    auto path = fit_path(x, y, Family::linear, pen, cfg);
    bool saw_active_pair = false;
    for (const auto& m : path) {
        if (m.coef[0] != 0.0 || m.coef[1] != 0.0) {
            CHECK_THAT(m.coef[0], Catch::Matchers::WithinAbs(m.coef[1], 1e-6));
            saw_active_pair = true;
        }
    }
    CHECK(saw_active_pair);
}

TEST_CASE("elastic net near mix = 1 matches the lasso") {
    const int n = 60, p = 6;
    Matrix x = random_matrix(n, p, 81);
    Vector b = Vector::Zero(p);
    b[0] = 1.0;
    b[2] = -0.8;
    Vector y = linear_response(x, b, 82, 0.4);
    FitConfig cfg;
    cfg.lambda_grid.explicit_values = {0.05, 0.02};
    cfg.tol = 1e-10;
    auto lasso = fit_path(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    PenaltySpec en;
    en.kind = PenaltyKind::elastic_net;
    en.mix = 0.999;
    auto almost = fit_path(x, y, Family::linear, en, cfg);
    for (std::size_t k = 0; k < lasso.size(); ++k)
        CHECK((lasso[k].coef - almost[k].coef).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("fit_elastic_net validates the mixing parameter") {
    Matrix x = random_matrix(30, 3, 91);
    Vector y = linear_response(x, Vector::Zero(3), 92);
    CHECK_THROWS_AS(fit_elastic_net(x, y, Family::linear, quick_cfg(), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_elastic_net(x, y, Family::linear, quick_cfg(), 1.0),
                    std::invalid_argument);
}

TEST_CASE("cross_validate is deterministic") {
    Matrix x = random_matrix(45, 6, 101);
    Vector b = Vector::Zero(6);
    b[0] = 1.0;
    Vector y = linear_response(x, b, 102);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 17;
    auto r1 = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    auto r2 = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    CHECK(r1.model.lambda_used == r2.model.lambda_used);
    CHECK((r1.model.coef - r2.model.coef).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("leave-one-out CV at lambda = 0 matches the direct oracle") {
    const int n = 6, p = 2;
    Matrix x(n, p);
    x << 0.8, -1.2, -0.3, 0.4, 1.5, 0.9, -0.7, -0.2, 0.1, 1.1, -1.4, -1.0;
    Vector y(n);
    y << 1.0, -0.4, 2.2, -0.9, 1.3, -2.0;

    FitConfig cfg;
    cfg.lambda_grid.explicit_values = {0.0};
    cfg.cv_folds = n;
    cfg.cv_seed = 5;
    cfg.tol = 1e-13;
    auto res = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);

    // oracle: per-i OLS on the other 5 points via normal equations
    double loo = 0.0;
    for (int i = 0; i < n; ++i) {
        Matrix design(n - 1, p + 1);
        Vector yt(n - 1);
        int r = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            design(r, 0) = 1.0;
            design(r, 1) = x(k, 0);
            design(r, 2) = x(k, 1);
            yt[r] = y[k];
            ++r;
        }
        Vector sol = (design.transpose() * design).ldlt().solve(design.transpose() * yt);
        double pred = sol[0] + sol[1] * x(i, 0) + sol[2] * x(i, 1);
        loo += (y[i] - pred) * (y[i] - pred);
    }
    loo /= n;
    CHECK_THAT(res.curve.mean_loss[0], Catch::Matchers::WithinAbs(loo, 1e-10));
}

TEST_CASE("CV fold sizes differ by at most one") {
    for (int n : {25, 30, 37}) {
        auto folds = drpen::detail::make_folds(n, 10, 7);
        std::size_t lo = folds[0].size(), hi = folds[0].size();
        std::size_t total = 0;
        for (const auto& f : folds) {
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
            total += f.size();
        }
        CHECK(hi - lo <= 1);
        CHECK(total == static_cast<std::size_t>(n));
    }
}

TEST_CASE("logistic CV redraws folds containing a whole class") {
    // 12 rows, 3 ones; with 4 folds a bad draw can isolate all ones.
    // The contract: either folds are fine or the redraw handles it; a
    // two-class-per-fold impossibility throws.
    Matrix x = random_matrix(8, 2, 111);
    Vector y = Vector::Zero(8);
    y[0] = 1.0;  // a single positive cannot be split across folds' training sets
    FitConfig cfg;
    cfg.cv_folds = 8;
    cfg.lambda_grid.count = 5;
    CHECK_THROWS_WITH(cross_validate(x, y, Family::logistic, PenaltySpec::l1_with(), cfg),
                      Catch::Matchers::ContainsSubstring("single treatment class"));
}

TEST_CASE("logistic lasso recovers a strong signal direction") {
    const int n = 300, p = 6;
    Matrix x = random_matrix(n, p, 121);
    Vector eta = 2.0 * x.col(0) - 1.5 * x.col(3);
    std::mt19937_64 rng(122);
    std::uniform_real_distribution<double> unif(0, 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = unif(rng) < expit(eta[i]) ? 1.0 : 0.0;
    FitConfig cfg = quick_cfg();
    cfg.lambda_rule = LambdaRule::min;
    auto res = cross_validate(x, y, Family::logistic, PenaltySpec::l1_with(), cfg);
    REQUIRE_FALSE(res.model.selected.empty());
    CHECK(res.model.coef[0] > 0.5);
    CHECK(res.model.coef[3] < -0.3);
}

TEST_CASE("adaptive lasso with uniform initial magnitudes equals plain lasso selection") {
    // orthonormal-ish design with symmetric +-1 coefficients
    const int n = 64, p = 4;
    Matrix x = standardized_copy(random_matrix(n, p, 131));
    Vector b(p);
    b << 0.9, -0.9, 0.9, -0.9;
    Vector y = linear_response(x, b, 132, 0.5);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 3;
    FittedModel adl = fit_adaptive_lasso(x, y, Family::linear, cfg);
    // uniform factors only rescale lambda: selection must match plain lasso
    auto plain = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    // magnitudes are not exactly uniform (noise), so compare supports loosely:
    // every strong true coefficient is kept by both
    for (int j = 0; j < p; ++j) {
        CHECK(adl.coef[j] * b[j] >= 0.0);
    }
    CHECK(adl.selected.size() >= 3);
    CHECK_FALSE(plain.model.selected.empty());
}

TEST_CASE("adaptive lasso: exactly-zero initial coefficient excludes the covariate") {
    // construct x so column 2 is orthogonal to y and the other columns
    const int n = 8;
    Matrix x(n, 3);
    // columns from a Hadamard-style orthogonal pattern
    x.col(0) << 1, 1, 1, 1, -1, -1, -1, -1;
    x.col(1) << 1, 1, -1, -1, 1, 1, -1, -1;
    x.col(2) << 1, -1, 1, -1, 1, -1, 1, -1;
    Vector y = 2.0 * x.col(0) - 1.0 * x.col(1);  // exactly orthogonal to col 2
    FitConfig cfg;
    cfg.lambda_grid.count = 20;
    cfg.cv_folds = 4;
    FittedModel m = fit_adaptive_lasso(x, y, Family::linear, cfg);
    CHECK(m.coef[2] == 0.0);
    for (int j : m.selected) CHECK(j != 2);
}

TEST_CASE("adaptive lasso requires n > p") {
    Matrix x = random_matrix(5, 7, 141);
    Vector y = linear_response(x, Vector::Zero(7), 142);
    CHECK_THROWS_WITH(fit_adaptive_lasso(x, y, Family::linear, quick_cfg()),
                      Catch::Matchers::ContainsSubstring("initial unpenalized fit"));
}

TEST_CASE("adaptive elastic net selects true support on a 4-covariate toy") {
    const int n = 120;
    Matrix x = random_matrix(n, 4, 151);
    Vector b(4);
    b << 1.5, 0.0, -1.2, 0.0;
    Vector y = linear_response(x, b, 152, 0.5);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 9;
    FittedModel m = fit_adaptive_elastic_net(x, y, Family::linear, cfg);
    CHECK(m.coef[0] > 0.5);
    CHECK(m.coef[2] < -0.5);

    // brute-force two-stage oracle over the same (mix, lambda) grids:
    // our API call with a single-element grid must agree with the direct
    // two-stage composition at that mix
    FittedModel single = fit_adaptive_elastic_net(x, y, Family::linear, cfg, {0.4});
    PenaltySpec s1;
    s1.kind = PenaltyKind::elastic_net;
    s1.mix = 0.4;
    CvResult first = cross_validate(x, y, Family::linear, s1, cfg);
    Vector sd = standardization_params(x).sd;
    Vector f(4);
    for (int j = 0; j < 4; ++j) {
        double c = std::abs(first.model.coef[j] * sd[j]);
        f[j] = c < 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / c;
    }
    PenaltySpec s2 = s1;
    s2.factors = f;
    CvResult second = cross_validate(x, y, Family::linear, s2, cfg);
    CHECK(single.lambda_used == second.model.lambda_used);
    CHECK((single.coef - second.model.coef).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adaptive elastic net with empty stage-1 selection degrades to intercept-only") {
    const int n = 40, p = 3;
    Matrix x = random_matrix(n, p, 161);
    Vector y = Vector::Ones(n);  // constant response: nothing to select
    FitConfig cfg = quick_cfg();
    FittedModel m = fit_adaptive_elastic_net(x, y, Family::linear, cfg);
    CHECK(m.selected.empty());
    CHECK(m.degenerate);
    CHECK_THAT(m.intercept, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("LSP with l_max = 0 is the plain lasso CV fit") {
    Matrix x = random_matrix(50, 5, 171);
    Vector b = Vector::Zero(5);
    b[1] = 1.0;
    Vector y = linear_response(x, b, 172);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 13;
    FittedModel lsp = fit_lsp(x, y, Family::linear, cfg, 1e-4, 0);
    auto plain = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    CHECK(lsp.lambda_used == plain.model.lambda_used);
    CHECK((lsp.coef - plain.model.coef).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("LSP reweighting never revives an excluded strong-zero") {
    // after round one, a zero coefficient gets weight 1/delta = 1e4
    Matrix x = random_matrix(100, 6, 181);
    Vector b = Vector::Zero(6);
    b[0] = 2.0;
    b[1] = 1.5;
    Vector y = linear_response(x, b, 182, 0.5);
    FitConfig cfg = quick_cfg();
    FittedModel m = fit_lsp(x, y, Family::linear, cfg);
    CHECK(m.coef[0] > 1.0);
    CHECK(m.coef[1] > 0.75);
    // spurious coordinates should be heavily suppressed
    for (int j = 2; j < 6; ++j) CHECK(std::abs(m.coef[j]) < 0.2);
}

TEST_CASE("prediction invariance under positive column rescaling") {
    const int n = 60, p = 5;
    Matrix x = random_matrix(n, p, 191);
    Vector b = Vector::Zero(p);
    b[0] = 1.0;
    b[2] = -0.7;
    Vector y = linear_response(x, b, 192, 0.4);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 23;
    auto res = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);
    Matrix x2 = x;
    x2.col(2) *= 37.5;
    auto res2 = cross_validate(x2, y, Family::linear, PenaltySpec::l1_with(), cfg);
    Vector p1 = res.model.predict_linear(x);
    Vector p2 = res2.model.predict_linear(x2);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-8);
    if (res.model.coef[2] != 0.0)
        CHECK_THAT(res2.model.coef[2] * 37.5, Catch::Matchers::WithinAbs(res.model.coef[2], 1e-8));
}

TEST_CASE("column permutation leaves selection and predictions unchanged") {
    const int n = 60, p = 5;
    Matrix x = random_matrix(n, p, 201);
    Vector b = Vector::Zero(p);
    b[1] = 1.2;
    b[4] = -0.9;
    Vector y = linear_response(x, b, 202, 0.4);
    FitConfig cfg = quick_cfg();
    cfg.cv_seed = 29;
    auto res = cross_validate(x, y, Family::linear, PenaltySpec::l1_with(), cfg);

    std::vector<int> perm = {3, 0, 4, 1, 2};
    Matrix xp(n, p);
    for (int j = 0; j < p; ++j) xp.col(j) = x.col(perm[j]);
    auto resp = cross_validate(xp, y, Family::linear, PenaltySpec::l1_with(), cfg);

    CHECK(res.model.lambda_used == resp.model.lambda_used);
    Vector p1 = res.model.predict_linear(x);
    Vector p2 = resp.model.predict_linear(xp);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("all-infinite factors produce intercept-only models") {
    Matrix x = random_matrix(30, 3, 211);
    Vector y = linear_response(x, Vector::Zero(3), 212);
    Vector f = Vector::Constant(3, std::numeric_limits<double>::infinity());
    FitConfig cfg;
    cfg.lambda_grid.count = 3;
    auto path = fit_path(x, y, Family::linear, PenaltySpec::l1_with(f), cfg);
    for (const auto& m : path) {
        CHECK(m.selected.empty());
        CHECK(m.degenerate);
        CHECK_THAT(m.intercept, Catch::Matchers::WithinAbs(y.mean(), 1e-9));
    }
}

TEST_CASE("SCAD and MCP paths flow from soft to unbiased estimates") {
    const int n = 200, p = 8;
    Matrix x = standardized_copy(random_matrix(n, p, 221));
    Vector b = Vector::Zero(p);
    b[0] = 2.0;
    Vector y = linear_response(x, b, 222, 0.5);
    for (PenaltyKind kind : {PenaltyKind::scad, PenaltyKind::mcp}) {
        PenaltySpec pen;
        pen.kind = kind;
        FitConfig cfg;
        cfg.lambda_grid.count = 30;
        auto path = fit_path(x, y, Family::linear, pen, cfg);
        CHECK(path.front().selected.empty());
        // at small lambda the strong coefficient is essentially unshrunk
        CHECK_THAT(path.back().coef[0], Catch::Matchers::WithinAbs(2.0, 0.15));
    }
}
