#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "drpen/bootstrap.hpp"
#include "drpen/csv.hpp"
#include "drpen/dataset.hpp"
#include "drpen/estimators.hpp"
#include "drpen/numfmt.hpp"
#include "drpen/simulation.hpp"

#ifndef DRPEN_VERSION
#define DRPEN_VERSION "0.0.0"
#endif

namespace drpen::cli {

// Exit-code contract: 0 success, 2 configuration error, 3 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Flat key-value sections: keys before the first [scenario] are globals.
struct KvSection {
    std::map<std::string, std::string> kv;
    bool has(const std::string& k) const { return kv.count(k) > 0; }
    std::string get(const std::string& k, const std::string& fallback = "") const {
        auto it = kv.find(k);
        return it == kv.end() ? fallback : it->second;
    }
};

struct KvConfig {
    KvSection globals;
    std::vector<KvSection> scenarios;
};

inline KvConfig parse_kv_config(std::istream& in) {
    KvConfig cfg;
    KvSection* current = &cfg.globals;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t != "[scenario]")
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": only [scenario] sections are supported");
            cfg.scenarios.emplace_back();
            current = &cfg.scenarios.back();
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        current->kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return cfg;
}

template <typename T>
T parse_number_or(const std::string& s, const std::string& what) {
    try {
        if constexpr (std::is_integral_v<T>) return static_cast<T>(std::stoll(s));
        else return static_cast<T>(std::stod(s));
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " value '" + s + "'");
    }
}

inline std::vector<EstimatorSpec> parse_estimator_list(const std::vector<std::string>& names,
                                                       std::optional<double> clip) {
    std::vector<EstimatorSpec> specs;
    for (const auto& name : names) {
        EstimatorSpec spec;
        try {
            spec.id = parse_estimator(name);
        } catch (const std::exception& ex) {
            throw ConfigError(ex.what());
        }
        spec.ps_clip = clip;
        specs.push_back(spec);
    }
    if (specs.empty()) throw ConfigError("empty estimator list");
    return specs;
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? format_full(*v) : "";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string config_path;    // key-value scenario file
    bool use_paper_grid = false;
    std::string from_manifest;  // rerun a previous manifest verbatim
    int reps_override = 0;      // > 0 overrides per-scenario reps
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    std::optional<double> clip;
    std::string out_dir = ".";
};

namespace detail {

inline ScenarioConfig scenario_from_section(const KvSection& sec, const KvSection& globals,
                                            int index, std::uint64_t base_seed,
                                            std::optional<double> clip) {
    auto field = [&](const std::string& k, const std::string& fallback) {
        if (sec.has(k)) return sec.get(k);
        if (globals.has(k)) return globals.get(k);
        return fallback;
    };
    ScenarioConfig cfg;
    cfg.n = parse_number_or<int>(field("n", "200"), "n");
    cfg.p = parse_number_or<int>(field("p", "80"), "p");
    cfg.rho = parse_number_or<double>(field("rho", "0"), "rho");
    cfg.confounding = parse_confounding(field("confounding", "strong"));
    cfg.covariate_type = parse_covariate_type(field("covariates", "continuous"));
    cfg.misspec = parse_misspec(field("misspec", "none"));
    cfg.reps = parse_number_or<int>(field("reps", "1000"), "reps");
    std::vector<std::string> est_names = split_list(field(
        "estimators", "naive,IPW-OAL,gComp-AdL,AIPW-Targ,AIPW-Las-Las,AIPW-OAL-Las,AIPW-OAL-EN,"
                      "AIPW-OAL-AdL,AIPW-OAL-AEN,AIPW-OAL-SCAD,AIPW-OAL-LSP,AIPW-OAL-MCP,"
                      "AIPW-Farrell"));
    cfg.estimators = parse_estimator_list(est_names, clip);
    if (sec.has("seed")) cfg.seed = parse_number_or<std::uint64_t>(sec.get("seed"), "seed");
    else cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(index), 0x5ce);
    std::string name = sec.get("name");
    if (name.empty()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "s%02d_n%d_p%d_%s_%s_%s_rho%g", index, cfg.n, cfg.p,
                      to_string(cfg.confounding).c_str(), to_string(cfg.covariate_type).c_str(),
                      to_string(cfg.misspec).c_str(), cfg.rho);
        name = buf;
    }
    cfg.id = name;
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("scenario '") + cfg.id + "': " + ex.what());
    }
    return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["id"] = cfg.id;
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["rho"] = cfg.rho;
    j["confounding"] = to_string(cfg.confounding);
    j["covariate_type"] = to_string(cfg.covariate_type);
    j["misspec"] = to_string(cfg.misspec);
    j["reps"] = cfg.reps;
    j["seed"] = cfg.seed;
    std::vector<std::string> names;
    for (const auto& s : cfg.estimators) names.push_back(estimator_name(s.id));
    j["estimators"] = names;
    if (!cfg.estimators.empty() && cfg.estimators.front().ps_clip)
        j["ps_clip"] = *cfg.estimators.front().ps_clip;
    return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    cfg.id = j.at("id").get<std::string>();
    cfg.n = j.at("n").get<int>();
    cfg.p = j.at("p").get<int>();
    cfg.rho = j.at("rho").get<double>();
    cfg.confounding = parse_confounding(j.at("confounding").get<std::string>());
    cfg.covariate_type = parse_covariate_type(j.at("covariate_type").get<std::string>());
    cfg.misspec = parse_misspec(j.at("misspec").get<std::string>());
    cfg.reps = j.at("reps").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    std::optional<double> clip;
    if (j.contains("ps_clip")) clip = j.at("ps_clip").get<double>();
    cfg.estimators =
        parse_estimator_list(j.at("estimators").get<std::vector<std::string>>(), clip);
    cfg.validate();
    return cfg;
}

}  // namespace detail

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& log = std::cerr) {
    std::vector<ScenarioConfig> scenarios;
    std::vector<std::string> warnings;

    if (!opt.from_manifest.empty()) {
        std::ifstream in(opt.from_manifest);
        if (!in) throw ConfigError("cannot open manifest: " + opt.from_manifest);
        nlohmann::json m = nlohmann::json::parse(in, nullptr, true, true);
        for (const auto& js : m.at("scenarios")) scenarios.push_back(detail::scenario_from_json(js));
    } else if (opt.use_paper_grid) {
        int reps = opt.reps_override > 0 ? opt.reps_override : 1000;
        std::vector<EstimatorSpec> specs = all_estimators();
        if (opt.clip)
            for (auto& s : specs) s.ps_clip = opt.clip;
        scenarios = paper_grid(reps, opt.seed, specs);
    } else if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot open config: " + opt.config_path);
        detail::KvConfig kv = detail::parse_kv_config(in);
        if (kv.scenarios.empty())
            throw ConfigError("config has no [scenario] section: " + opt.config_path);
        for (std::size_t i = 0; i < kv.scenarios.size(); ++i)
            scenarios.push_back(detail::scenario_from_section(
                kv.scenarios[i], kv.globals, static_cast<int>(i), opt.seed, opt.clip));
    } else {
        throw ConfigError("simulate requires --config, --paper-grid, or --from-manifest");
    }
    if (opt.reps_override > 0 && opt.from_manifest.empty())
        for (auto& s : scenarios) s.reps = opt.reps_override;
    if (opt.clip) warnings.push_back("propensity clipping enabled (non-default behavior)");

    std::filesystem::create_directories(opt.out_dir);
    std::ofstream results(std::filesystem::path(opt.out_dir) / "results.csv");
    std::ofstream estimates(std::filesystem::path(opt.out_dir) / "estimates.csv");
    if (!results || !estimates) throw DataError("cannot write outputs under " + opt.out_dir);
    write_csv_row(results, {"scenario_id", "n", "p", "rho", "confounding", "covariate_type",
                            "misspec", "estimator", "bias", "se", "rmse", "n_valid", "n_extreme"});
    write_csv_row(estimates, {"scenario_id", "rep", "estimator", "theta_hat", "extreme"});

    nlohmann::json manifest;
    manifest["tool"] = "drpen";
    manifest["version"] = DRPEN_VERSION;
    manifest["command"] = "simulate";
    manifest["base_seed"] = opt.seed;
    manifest["jobs"] = opt.jobs;
    manifest["outputs"] = {"results.csv", "estimates.csv"};
    nlohmann::json timings = nlohmann::json::object();
    nlohmann::json scenario_list = nlohmann::json::array();

    for (const auto& cfg : scenarios) {
        log << "scenario " << cfg.id << " (reps=" << cfg.reps << ")..." << std::endl;
        auto t0 = std::chrono::steady_clock::now();
        ScenarioResult res = run_scenario(cfg, opt.jobs);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        timings[cfg.id] = ms;
        scenario_list.push_back(detail::scenario_to_json(cfg));

        for (const auto& row : res.metrics.rows) {
            if (!row.rmse && row.n_valid > 0)
                warnings.push_back(cfg.id + "/" + row.estimator +
                                   ": aggregate suppressed (extreme or degenerate values)");
            write_csv_row(results,
                          {cfg.id, std::to_string(cfg.n), std::to_string(cfg.p),
                           format_full(cfg.rho), to_string(cfg.confounding),
                           to_string(cfg.covariate_type), to_string(cfg.misspec), row.estimator,
                           detail::opt_cell(row.bias), detail::opt_cell(row.se),
                           detail::opt_cell(row.rmse), std::to_string(row.n_valid),
                           std::to_string(row.n_extreme)});
        }
        for (std::size_t r = 0; r < res.replications.size(); ++r) {
            const auto& rep = res.replications[r];
            for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
                std::string theta = rep.theta[k] ? format_full(*rep.theta[k]) : "";
                write_csv_row(estimates, {cfg.id, std::to_string(r),
                                          estimator_name(cfg.estimators[k].id), theta,
                                          rep.extreme[k] ? "1" : "0"});
                if (!rep.errors[k].empty() && r == 0)
                    warnings.push_back(cfg.id + "/" + estimator_name(cfg.estimators[k].id) +
                                       ": " + rep.errors[k]);
            }
        }
    }

    manifest["scenarios"] = scenario_list;
    manifest["timings_ms"] = timings;
    manifest["warnings"] = warnings;
    std::ofstream mf(std::filesystem::path(opt.out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
    log << "wrote results.csv, estimates.csv, manifest.json to " << opt.out_dir << std::endl;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
    std::string data_path;
    std::string outcome_col;
    std::string treatment_col;
    std::vector<std::string> covariate_cols;  // empty = all remaining
    std::vector<std::string> estimators;      // names; empty = Table-1 set minus AIPW-Targ
    int bootstrap_b = 1000;
    std::uint64_t seed = 42;
    std::optional<double> clip;
    double min_minority_prop = 0.005;
    unsigned jobs = 1;
    std::string out_dir = ".";
};

inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out = std::cout,
                       std::ostream& log = std::cerr) {
    std::vector<std::string> est_names = opt.estimators;
    if (est_names.empty()) {
        for (const auto& [id, name] : estimator_names())
            if (id != EstimatorId::aipw_targ) est_names.push_back(name);
    }
    std::vector<EstimatorSpec> specs = detail::parse_estimator_list(est_names, opt.clip);
    for (const auto& s : specs)
        if (s.id == EstimatorId::aipw_targ)
            throw ConfigError(
                "AIPW-Targ requires the true confounder/predictor sets and is simulation-only");
    if (opt.bootstrap_b < 2) throw ConfigError("--bootstrap must be >= 2");

    LoadReport load_report;
    Dataset d;
    try {
        d = load_csv(opt.data_path, opt.outcome_col, opt.treatment_col, opt.covariate_cols,
                     &load_report);
    } catch (const std::exception& ex) {
        throw DataError(ex.what());
    }
    auto [filtered, removed] = filter_rare_binaries(d, opt.min_minority_prop);
    if (load_report.rows_dropped_missing_outcome > 0)
        log << load_report.rows_dropped_missing_outcome << " row(s) dropped (missing outcome)"
            << std::endl;
    for (const auto& name : removed)
        log << "removed rare binary covariate: " << name << std::endl;

    std::vector<std::string> warnings;
    if (opt.clip)
        warnings.push_back("propensity clipping at " + format_full(*opt.clip) +
                           " (non-paper-default behavior)");

    RunConfigs cfgs;
    cfgs.fit.cv_seed = derive_seed(opt.seed, 0xa21);

    struct Row {
        std::string name;
        BootstrapResult boot;
    };
    std::vector<Row> rows;
    for (const auto& spec : specs) {
        log << "estimator " << estimator_name(spec.id) << " (B=" << opt.bootstrap_b << ")..."
            << std::endl;
        try {
            BootstrapResult b =
                bootstrap_ci(filtered, spec, opt.bootstrap_b, opt.seed, cfgs, opt.jobs);
            rows.push_back({estimator_name(spec.id), b});
        } catch (const std::exception& ex) {
            throw DataError(std::string(estimator_name(spec.id)) + ": " + ex.what());
        }
    }

    // Table 2 layout
    out << "Estimator\tATE\tStandard error\t95% CI\n";
    for (const auto& row : rows)
        out << row.name << '\t' << format_round(row.boot.theta_hat, 3) << '\t'
            << format_round(row.boot.se, 3) << '\t' << '(' << format_round(row.boot.ci_low, 3)
            << " - " << format_round(row.boot.ci_high, 3) << ")\n";

    std::filesystem::create_directories(opt.out_dir);
    std::ofstream csv(std::filesystem::path(opt.out_dir) / "analysis.csv");
    write_csv_row(csv, {"estimator", "ate", "se", "ci_low", "ci_high", "b_requested", "b_valid"});
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& row : rows) {
        write_csv_row(csv, {row.name, format_full(row.boot.theta_hat), format_full(row.boot.se),
                            format_full(row.boot.ci_low), format_full(row.boot.ci_high),
                            std::to_string(row.boot.b_requested),
                            std::to_string(row.boot.b_valid)});
        nlohmann::json j;
        j["estimator"] = row.name;
        j["ate"] = row.boot.theta_hat;
        j["se"] = row.boot.se;
        j["ci_low"] = row.boot.ci_low;
        j["ci_high"] = row.boot.ci_high;
        j["b_requested"] = row.boot.b_requested;
        j["b_valid"] = row.boot.b_valid;
        jrows.push_back(j);
    }

    nlohmann::json manifest;
    manifest["tool"] = "drpen";
    manifest["version"] = DRPEN_VERSION;
    manifest["command"] = "analyze";
    manifest["data"] = opt.data_path;
    manifest["outcome"] = opt.outcome_col;
    manifest["treatment"] = opt.treatment_col;
    manifest["estimators"] = est_names;
    manifest["bootstrap"] = opt.bootstrap_b;
    manifest["seed"] = opt.seed;
    manifest["jobs"] = opt.jobs;
    if (opt.clip) manifest["ps_clip"] = *opt.clip;
    manifest["min_minority_prop"] = opt.min_minority_prop;
    manifest["rows_dropped_missing_outcome"] = load_report.rows_dropped_missing_outcome;
    manifest["removed_rare_binaries"] = removed;
    manifest["warnings"] = warnings;
    manifest["outputs"] = {"analysis.csv", "analysis.json"};
    std::ofstream mf(std::filesystem::path(opt.out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
    nlohmann::json ja;
    ja["rows"] = jrows;
    ja["manifest"] = "manifest.json";
    std::ofstream jf(std::filesystem::path(opt.out_dir) / "analysis.json");
    jf << ja.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
    std::string results_path;
    std::string format = "table";    // table | csv | json
    std::string boxplot_out;         // quantile CSV destination (optional)
    std::string estimates_path;      // defaults to estimates.csv next to results
};

namespace detail {

inline double quantile_type7(std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline int cmd_report(const ReportOptions& opt, std::ostream& out = std::cout) {
    CsvTable t;
    try {
        t = read_csv_file(opt.results_path);
    } catch (const std::exception& ex) {
        throw DataError(ex.what());
    }
    const char* required[] = {"scenario_id", "n",  "p",    "rho",     "confounding",
                              "covariate_type", "misspec", "estimator", "bias", "se",
                              "rmse", "n_valid", "n_extreme"};
    std::map<std::string, int> col;
    for (const char* name : required) {
        int idx = t.col_index(name);
        if (idx < 0) throw DataError(std::string("results file is missing column '") + name + "'");
        col[name] = idx;
    }

    auto cell = [&](const std::vector<std::string>& row, const char* name) -> const std::string& {
        return row[static_cast<std::size_t>(col[name])];
    };
    auto rounded = [](const std::string& full, const char* empty_mark) -> std::string {
        if (full.empty()) return empty_mark;
        return format_round(std::stod(full), 3);
    };

    if (opt.format == "table") {
        std::string current;
        for (const auto& row : t.rows) {
            if (cell(row, "scenario_id") != current) {
                current = cell(row, "scenario_id");
                out << "\nscenario " << current << " (n=" << cell(row, "n")
                    << ", p=" << cell(row, "p") << ", rho=" << cell(row, "rho") << ", "
                    << cell(row, "confounding") << ", " << cell(row, "covariate_type")
                    << ", misspec=" << cell(row, "misspec") << ")\n";
                out << "Estimator\tBias\tSE\tRMSE\tn_valid\tn_extreme\n";
            }
            out << cell(row, "estimator") << '\t' << rounded(cell(row, "bias"), "-") << '\t'
                << rounded(cell(row, "se"), "-") << '\t' << rounded(cell(row, "rmse"), "-") << '\t'
                << cell(row, "n_valid") << '\t' << cell(row, "n_extreme") << '\n';
        }
    } else if (opt.format == "csv") {
        write_csv_row(out, {"scenario_id", "estimator", "bias", "se", "rmse", "n_valid",
                            "n_extreme"});
        for (const auto& row : t.rows)
            write_csv_row(out, {cell(row, "scenario_id"), cell(row, "estimator"),
                                rounded(cell(row, "bias"), ""), rounded(cell(row, "se"), ""),
                                rounded(cell(row, "rmse"), ""), cell(row, "n_valid"),
                                cell(row, "n_extreme")});
    } else if (opt.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json j;
            j["scenario_id"] = cell(row, "scenario_id");
            j["estimator"] = cell(row, "estimator");
            j["bias"] = cell(row, "bias").empty() ? nlohmann::json(nullptr)
                                                  : nlohmann::json(rounded(cell(row, "bias"), ""));
            j["se"] = cell(row, "se").empty() ? nlohmann::json(nullptr)
                                              : nlohmann::json(rounded(cell(row, "se"), ""));
            j["rmse"] = cell(row, "rmse").empty() ? nlohmann::json(nullptr)
                                                  : nlohmann::json(rounded(cell(row, "rmse"), ""));
            j["n_valid"] = std::stoi(cell(row, "n_valid"));
            j["n_extreme"] = std::stoi(cell(row, "n_extreme"));
            arr.push_back(j);
        }
        out << arr.dump(2) << "\n";
    } else {
        throw ConfigError("unknown report format '" + opt.format + "'");
    }

    if (!opt.boxplot_out.empty()) {
        std::string est_path = opt.estimates_path;
        if (est_path.empty()) {
            auto dir = std::filesystem::path(opt.results_path).parent_path();
            est_path = (dir / "estimates.csv").string();
        }
        CsvTable e;
        try {
            e = read_csv_file(est_path);
        } catch (const std::exception& ex) {
            throw DataError(ex.what());
        }
        int sc = e.col_index("scenario_id"), es = e.col_index("estimator"),
            th = e.col_index("theta_hat");
        if (sc < 0 || es < 0 || th < 0)
            throw DataError("estimates file is missing a required column");
        std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
        std::vector<std::pair<std::string, std::string>> order;
        for (const auto& row : e.rows) {
            const std::string& v = row[static_cast<std::size_t>(th)];
            if (v.empty()) continue;
            auto key = std::make_pair(row[static_cast<std::size_t>(sc)],
                                      row[static_cast<std::size_t>(es)]);
            if (groups.find(key) == groups.end()) order.push_back(key);
            groups[key].push_back(std::stod(v));
        }
        std::ofstream bp(opt.boxplot_out);
        if (!bp) throw DataError("cannot write " + opt.boxplot_out);
        write_csv_row(bp, {"scenario_id", "estimator", "min", "q1", "median", "q3", "max",
                           "mean"});
        for (const auto& key : order) {
            auto& vals = groups[key];
            std::sort(vals.begin(), vals.end());
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            write_csv_row(bp, {key.first, key.second, format_full(vals.front()),
                               format_full(detail::quantile_type7(vals, 0.25)),
                               format_full(detail::quantile_type7(vals, 0.5)),
                               format_full(detail::quantile_type7(vals, 0.75)),
                               format_full(vals.back()), format_full(mean)});
        }
    }
    return kExitOk;
}

}  // namespace drpen::cli
