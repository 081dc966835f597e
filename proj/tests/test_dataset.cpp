#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "drpen/dataset.hpp"

using namespace drpen;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

Dataset tiny_dataset(Matrix x, std::vector<ColKind> kinds) {
    Dataset d;
    d.x = std::move(x);
    d.z = Vector::Zero(d.x.rows());
    for (Eigen::Index i = 0; i < d.x.rows() / 2; ++i) d.z[i] = 1.0;
    d.y = Vector::Ones(d.x.rows());
    for (Eigen::Index j = 0; j < d.x.cols(); ++j)
        d.col_names.push_back("c" + std::to_string(j));
    d.col_kinds = std::move(kinds);
    return d;
}

}  // namespace

TEST_CASE("standardize matches hand computation for (1,2,3)") {
    Matrix x(3, 1);
    x << 1, 2, 3;
    Dataset d = tiny_dataset(x, {ColKind::continuous});
    auto [xs, params] = standardize(d);
    // population sd of (1,2,3) = sqrt(2/3)
    CHECK_THAT(params.mean[0], Catch::Matchers::WithinAbs(2.0, 1e-14));
    CHECK_THAT(params.sd[0], Catch::Matchers::WithinAbs(0.816496580927726, 1e-12));
    CHECK_THAT(xs(0, 0), Catch::Matchers::WithinAbs(-1.224744871391589, 1e-12));
    CHECK_THAT(xs(1, 0), Catch::Matchers::WithinAbs(0.0, 1e-14));
    CHECK_THAT(xs(2, 0), Catch::Matchers::WithinAbs(1.224744871391589, 1e-12));
}

TEST_CASE("standardize is idempotent and round-trips") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(3.0, 2.5);
    Matrix x(40, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
    Dataset d = tiny_dataset(x, {ColKind::continuous, ColKind::continuous, ColKind::continuous});
    auto [xs, params] = standardize(d);

    Dataset d2 = d;
    d2.x = xs;
    auto [xs2, params2] = standardize(d2);
    CHECK((xs2 - xs).cwiseAbs().maxCoeff() < 1e-12);

    // destandardize reproduces the original
    Matrix back = xs;
    for (Eigen::Index j = 0; j < back.cols(); ++j)
        back.col(j) = back.col(j).array() * params.sd[j] + params.mean[j];
    CHECK((back - d.x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("standardize rejects a constant column") {
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    Dataset d = tiny_dataset(x, {ColKind::continuous, ColKind::continuous});
    CHECK_THROWS_WITH(standardize(d), Catch::Matchers::ContainsSubstring("c1"));
}

TEST_CASE("filter_rare_binaries removes only rare binary columns") {
    const int n = 1000;
    Matrix x = Matrix::Zero(n, 3);
    for (int i = 0; i < n; ++i) x(i, 0) = i < 2 ? 1.0 : 0.0;    // 0.002 minority: removed
    for (int i = 0; i < n; ++i) x(i, 1) = i < 5 ? 1.0 : 0.0;    // exactly 0.005: kept
    for (int i = 0; i < n; ++i) x(i, 2) = i < 3 ? 1000.0 : 0.001 * i;  // skewed continuous: kept
    Dataset d = tiny_dataset(x, {ColKind::binary, ColKind::binary, ColKind::continuous});
    auto [filtered, removed] = filter_rare_binaries(d, 0.005);
    CHECK(removed == std::vector<std::string>{"c0"});
    CHECK(filtered.p() == 2);
    CHECK(filtered.col_names == std::vector<std::string>{"c1", "c2"});

    // idempotent
    auto [again, removed2] = filter_rare_binaries(filtered, 0.005);
    CHECK(removed2.empty());
    CHECK(again.p() == filtered.p());
}

TEST_CASE("load_csv drops missing outcomes and reports the count") {
    auto path = write_temp("drpen_t1.csv", "y,z,x1,x2\n1,0,0.5,2\n2,1,0.25,3\nNA,1,0.5,4\n");
    LoadReport report;
    Dataset d = load_csv(path, "y", "z", {}, &report);
    CHECK(d.n() == 2);
    CHECK(report.rows_dropped_missing_outcome == 1);
    CHECK(d.col_names == std::vector<std::string>{"x1", "x2"});  // file order
    std::remove(path.c_str());
}

TEST_CASE("load_csv infers binary kinds from two distinct values") {
    auto path = write_temp("drpen_t2.csv", "y,z,b,c\n1,0,-1,0.5\n2,1,1,0.75\n3,1,-1,0.25\n");
    Dataset d = load_csv(path, "y", "z");
    REQUIRE(d.p() == 2);
    CHECK(d.col_kinds[0] == ColKind::binary);
    CHECK(d.col_kinds[1] == ColKind::continuous);
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects non-binary treatment") {
    auto path = write_temp("drpen_t3.csv", "y,z,x1\n1,0,0.5\n2,2,0.25\n");
    CHECK_THROWS_WITH(load_csv(path, "y", "z"),
                      Catch::Matchers::ContainsSubstring("treatment not binary"));
    std::remove(path.c_str());
}

TEST_CASE("load_csv names missing columns and covariate NAs") {
    auto path = write_temp("drpen_t4.csv", "y,z,x1\n1,0,0.5\n2,1,NA\n");
    CHECK_THROWS_WITH(load_csv(path, "y", "zz"), Catch::Matchers::ContainsSubstring("zz"));
    CHECK_THROWS_WITH(load_csv(path, "y", "z"),
                      Catch::Matchers::ContainsSubstring("missing covariate"));
    std::remove(path.c_str());
}

TEST_CASE("load_csv honors an explicit covariate list") {
    auto path = write_temp("drpen_t5.csv", "y,z,x1,x2,x3\n1,0,1,2,3\n2,1,4,5,6\n");
    Dataset d = load_csv(path, "y", "z", {"x3", "x1"});
    CHECK(d.col_names == std::vector<std::string>{"x3", "x1"});
    CHECK(d.x(0, 0) == 3.0);
    CHECK(d.x(0, 1) == 1.0);
    std::remove(path.c_str());
}
