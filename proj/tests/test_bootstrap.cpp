#include <catch_amalgamated.hpp>

#include <random>

#include "drpen/bootstrap.hpp"
#include "drpen/numfmt.hpp"
#include "drpen/simulation.hpp"

using namespace drpen;

namespace {

Dataset noise_dataset(int n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0, sd);
    Dataset d;
    d.x = Matrix::Zero(n, 0);
    d.z.resize(n);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.z[i] = i % 2 == 0 ? 1.0 : 0.0;
        d.y[i] = normal(rng) + d.z[i];
    }
    return d;
}

}  // namespace

TEST_CASE("bootstrap CI arithmetic reproduces the published naive row") {
    // 0.213 +- 1.959964 * 0.027 -> (0.160, 0.266) at 3 decimals
    double theta = 0.213, se = 0.027;
    CHECK(format_round(theta - kNormalQuantile975 * se, 3) == "0.160");
    CHECK(format_round(theta + kNormalQuantile975 * se, 3) == "0.266");
}

TEST_CASE("bootstrap result satisfies the CI identity and is deterministic") {
    Dataset d = noise_dataset(60, 777);
    RunConfigs cfgs;
    EstimatorSpec spec{EstimatorId::naive};
    BootstrapResult a = bootstrap_ci(d, spec, 50, 101, cfgs, 1);
    BootstrapResult b = bootstrap_ci(d, spec, 50, 101, cfgs, 2);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.se == b.se);
    CHECK(a.b_valid == b.b_valid);
    CHECK_THAT(a.ci_low, Catch::Matchers::WithinAbs(a.theta_hat - 1.959964 * a.se, 1e-9));
    CHECK_THAT(a.ci_high, Catch::Matchers::WithinAbs(a.theta_hat + 1.959964 * a.se, 1e-9));
    CHECK(a.b_requested == 50);
    CHECK(a.b_valid <= a.b_requested);
}

TEST_CASE("constant outcome gives a degenerate interval") {
    Dataset d;
    const int n = 20;
    d.x = Matrix::Zero(n, 0);
    d.z.resize(n);
    d.y = Vector::Constant(n, 3.0);
    for (int i = 0; i < n; ++i) d.z[i] = i < n / 2 ? 1.0 : 0.0;
    RunConfigs cfgs;
    BootstrapResult r = bootstrap_ci(d, EstimatorSpec{EstimatorId::naive}, 40, 5, cfgs);
    CHECK(r.theta_hat == 0.0);
    CHECK(r.se == 0.0);
    CHECK(r.ci_low == r.theta_hat);
    CHECK(r.ci_high == r.theta_hat);
}

TEST_CASE("b = 3 resampling matches a hand-enumerated oracle") {
    // six-row toy; the documented resampling rule is reproduced inline
    Dataset d;
    d.x = Matrix::Zero(6, 0);
    d.z.resize(6);
    d.z << 1, 1, 1, 0, 0, 0;
    d.y.resize(6);
    d.y << 1.0, 2.0, 4.0, 0.5, 1.5, 2.5;
    const std::uint64_t seed = 2024;
    RunConfigs cfgs;
    BootstrapResult r = bootstrap_ci(d, EstimatorSpec{EstimatorId::naive}, 3, seed, cfgs);

    std::vector<double> oracle;
    for (std::uint64_t b = 0; b < 3; ++b) {
        for (int attempt = 0; attempt < 10; ++attempt) {
            Rng rng = make_rng(derive_seed(seed, b + 1, static_cast<std::uint64_t>(attempt)));
            std::uniform_int_distribution<Eigen::Index> pick(0, 5);
            double s1 = 0, n1 = 0, s0 = 0, n0 = 0;
            std::vector<Eigen::Index> rows(6);
            for (auto& idx : rows) idx = pick(rng);
            for (auto idx : rows) {
                if (d.z[idx] == 1.0) { s1 += d.y[idx]; n1 += 1; }
                else { s0 += d.y[idx]; n0 += 1; }
            }
            if (n1 == 0 || n0 == 0) continue;
            oracle.push_back(s1 / n1 - s0 / n0);
            break;
        }
    }
    REQUIRE(oracle.size() == 3);
    double mean = (oracle[0] + oracle[1] + oracle[2]) / 3.0;
    double ss = 0;
    for (double v : oracle) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / 2.0);
    CHECK_THAT(r.se, Catch::Matchers::WithinAbs(sd, 1e-12));
    CHECK(r.b_valid == 3);
}

TEST_CASE("bootstrap rejects b < 2") {
    Dataset d = noise_dataset(10, 1);
    RunConfigs cfgs;
    CHECK_THROWS_AS(bootstrap_ci(d, EstimatorSpec{EstimatorId::naive}, 1, 1, cfgs),
                    std::invalid_argument);
}

TEST_CASE("empty-arm resamples are redrawn") {
    // two treated in twelve rows: empty-arm draws occur but redraws recover
    Dataset d;
    const int n = 12;
    d.x = Matrix::Zero(n, 0);
    d.z = Vector::Zero(n);
    d.z[0] = 1.0;
    d.z[1] = 1.0;
    d.y.resize(n);
    for (int i = 0; i < n; ++i) d.y[i] = static_cast<double>(i);
    RunConfigs cfgs;
    BootstrapResult r = bootstrap_ci(d, EstimatorSpec{EstimatorId::naive}, 100, 7, cfgs);
    CHECK(r.b_valid == 100);
    CHECK(r.se > 0.0);
}

TEST_CASE("bootstrap SE of the naive estimator approaches the two-sample formula", "[mc]") {
    Dataset d = noise_dataset(5000, 31337, 1.5);
    RunConfigs cfgs;
    BootstrapResult r = bootstrap_ci(d, EstimatorSpec{EstimatorId::naive}, 200, 99, cfgs, 2);
    double s1 = 0, s0 = 0, n1 = 0, n0 = 0, m1 = 0, m0 = 0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.z[i] == 1.0) { m1 += d.y[i]; n1 += 1; }
        else { m0 += d.y[i]; n0 += 1; }
    }
    m1 /= n1;
    m0 /= n0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.z[i] == 1.0) s1 += (d.y[i] - m1) * (d.y[i] - m1);
        else s0 += (d.y[i] - m0) * (d.y[i] - m0);
    }
    double formula = std::sqrt(s1 / (n1 - 1) / n1 + s0 / (n0 - 1) / n0);
    CHECK(std::abs(r.se - formula) / formula < 0.10);
}
