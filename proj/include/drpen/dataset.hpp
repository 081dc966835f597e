#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "drpen/csv.hpp"

namespace drpen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ColKind { continuous, binary };

// Observational dataset: covariate matrix x (n x p), binary treatment z
// (0 = control, 1 = treatment) and continuous outcome y.
struct Dataset {
    Matrix x;
    Vector z;
    Vector y;
    std::vector<std::string> col_names;
    std::vector<ColKind> col_kinds;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }

    void validate() const {
        if (x.rows() != z.size() || x.rows() != y.size())
            throw std::invalid_argument("dataset: x, z, y row counts differ");
        if (x.rows() < 2) throw std::invalid_argument("dataset: need at least 2 rows");
        if (col_names.size() != static_cast<std::size_t>(x.cols()) ||
            col_kinds.size() != static_cast<std::size_t>(x.cols()))
            throw std::invalid_argument("dataset: column metadata length mismatch");
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (z[i] != 0.0 && z[i] != 1.0)
                throw std::invalid_argument("dataset: treatment not binary");
            if (!std::isfinite(y[i])) throw std::invalid_argument("dataset: non-finite outcome");
        }
        if (!x.allFinite()) throw std::invalid_argument("dataset: non-finite covariate");
    }

    Eigen::Index n_treated() const { return static_cast<Eigen::Index>(z.sum()); }
    Eigen::Index n_control() const { return z.size() - n_treated(); }

    // Rows of one arm, original order.
    std::vector<Eigen::Index> arm_rows(double arm) const {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            if (z[i] == arm) idx.push_back(i);
        return idx;
    }

    Dataset subset_rows(const std::vector<Eigen::Index>& rows) const {
        Dataset d;
        d.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
        d.z.resize(static_cast<Eigen::Index>(rows.size()));
        d.y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            d.x.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
            d.z[static_cast<Eigen::Index>(k)] = z[rows[k]];
            d.y[static_cast<Eigen::Index>(k)] = y[rows[k]];
        }
        d.col_names = col_names;
        d.col_kinds = col_kinds;
        return d;
    }
};

// Per-column mean and standard deviation (population convention, denominator n).
struct StandardizationParams {
    Vector mean;
    Vector sd;
};

inline StandardizationParams standardization_params(const Matrix& x) {
    StandardizationParams sp;
    const auto n = static_cast<double>(x.rows());
    sp.mean = x.colwise().mean();
    sp.sd.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double ss = (x.col(j).array() - sp.mean[j]).square().sum() / n;
        sp.sd[j] = std::sqrt(ss);
    }
    return sp;
}

// Z-score normalization of every covariate column. Constant columns are an
// error; the caller must remove them first.
inline std::pair<Matrix, StandardizationParams> standardize(const Dataset& d) {
    StandardizationParams sp = standardization_params(d.x);
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        if (sp.sd[j] <= 0.0)
            throw std::invalid_argument("standardize: constant column '" +
                                        d.col_names[static_cast<std::size_t>(j)] + "'");
    }
    Matrix out = d.x;
    for (Eigen::Index j = 0; j < d.p(); ++j)
        out.col(j) = (out.col(j).array() - sp.mean[j]) / sp.sd[j];
    return {std::move(out), std::move(sp)};
}

// Drops binary covariates whose minority-category proportion is strictly
// below min_minority_prop. Continuous columns are untouched.
inline std::pair<Dataset, std::vector<std::string>> filter_rare_binaries(
    const Dataset& d, double min_minority_prop = 0.005) {
    const auto n = static_cast<double>(d.n());
    std::vector<Eigen::Index> keep;
    std::vector<std::string> removed;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        bool drop = false;
        if (d.col_kinds[static_cast<std::size_t>(j)] == ColKind::binary) {
            double lo = d.x.col(j).minCoeff();
            Eigen::Index n_lo = (d.x.col(j).array() == lo).count();
            double minority = std::min(static_cast<double>(n_lo), n - static_cast<double>(n_lo)) / n;
            drop = minority < min_minority_prop;
        }
        if (drop) removed.push_back(d.col_names[static_cast<std::size_t>(j)]);
        else keep.push_back(j);
    }
    Dataset out;
    out.z = d.z;
    out.y = d.y;
    out.x.resize(d.n(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.x.col(static_cast<Eigen::Index>(k)) = d.x.col(keep[k]);
        out.col_names.push_back(d.col_names[static_cast<std::size_t>(keep[k])]);
        out.col_kinds.push_back(d.col_kinds[static_cast<std::size_t>(keep[k])]);
    }
    return {std::move(out), std::move(removed)};
}

struct LoadReport {
    Eigen::Index rows_dropped_missing_outcome = 0;
};

namespace detail {

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

inline double parse_number(const std::string& s, const std::string& col, std::size_t row) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("column '" + col + "', row " + std::to_string(row + 1) +
                                 ": cannot parse '" + s + "' as a number");
    }
}

}  // namespace detail

// Loads a dataset from an RFC-4180 CSV with a header row. "NA" or an empty
// cell is missing. Rows with a missing outcome are dropped (counted in the
// report); missing treatment or covariate values are rejected.
// covariate_cols empty means "all remaining columns" in file order.
inline Dataset load_csv(const std::string& path, const std::string& outcome_col,
                        const std::string& treatment_col,
                        const std::vector<std::string>& covariate_cols = {},
                        LoadReport* report = nullptr) {
    CsvTable t = read_csv_file(path);
    int yi = t.col_index(outcome_col);
    if (yi < 0) throw std::runtime_error("missing column '" + outcome_col + "' in " + path);
    int zi = t.col_index(treatment_col);
    if (zi < 0) throw std::runtime_error("missing column '" + treatment_col + "' in " + path);

    std::vector<int> xcols;
    std::vector<std::string> xnames;
    if (covariate_cols.empty()) {
        for (std::size_t j = 0; j < t.header.size(); ++j) {
            if (static_cast<int>(j) == yi || static_cast<int>(j) == zi) continue;
            xcols.push_back(static_cast<int>(j));
            xnames.push_back(t.header[j]);
        }
    } else {
        for (const auto& name : covariate_cols) {
            int j = t.col_index(name);
            if (j < 0) throw std::runtime_error("missing column '" + name + "' in " + path);
            xcols.push_back(j);
            xnames.push_back(name);
        }
    }

    // pass 1: keep rows with an observed outcome
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (!detail::is_missing(t.rows[r][static_cast<std::size_t>(yi)])) keep.push_back(r);
    }
    if (report)
        report->rows_dropped_missing_outcome =
            static_cast<Eigen::Index>(t.rows.size() - keep.size());
    if (keep.empty()) throw std::runtime_error("no usable rows in " + path);

    Dataset d;
    const auto n = static_cast<Eigen::Index>(keep.size());
    const auto p = static_cast<Eigen::Index>(xcols.size());
    d.x.resize(n, p);
    d.z.resize(n);
    d.y.resize(n);
    d.col_names = xnames;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = t.rows[keep[static_cast<std::size_t>(i)]];
        d.y[i] = detail::parse_number(row[static_cast<std::size_t>(yi)], outcome_col,
                                      keep[static_cast<std::size_t>(i)]);
        const std::string& zs = row[static_cast<std::size_t>(zi)];
        if (detail::is_missing(zs)) throw std::runtime_error("treatment not binary (missing value)");
        double zv = detail::parse_number(zs, treatment_col, keep[static_cast<std::size_t>(i)]);
        if (zv != 0.0 && zv != 1.0) throw std::runtime_error("treatment not binary");
        d.z[i] = zv;
        for (Eigen::Index j = 0; j < p; ++j) {
            const std::string& cs = row[static_cast<std::size_t>(xcols[static_cast<std::size_t>(j)])];
            if (detail::is_missing(cs))
                throw std::runtime_error("missing covariate value in column '" +
                                         xnames[static_cast<std::size_t>(j)] + "'");
            d.x(i, j) = detail::parse_number(cs, xnames[static_cast<std::size_t>(j)],
                                             keep[static_cast<std::size_t>(i)]);
        }
    }
    // kind inference: binary iff exactly two distinct values
    d.col_kinds.resize(static_cast<std::size_t>(p), ColKind::continuous);
    for (Eigen::Index j = 0; j < p; ++j) {
        std::set<double> vals;
        for (Eigen::Index i = 0; i < n && vals.size() <= 2; ++i) vals.insert(d.x(i, j));
        if (vals.size() == 2) d.col_kinds[static_cast<std::size_t>(j)] = ColKind::binary;
    }
    d.validate();
    return d;
}

}  // namespace drpen
