// Command-line front end: simulate the experiment grid, analyze a dataset
// with bootstrap confidence intervals, or render report tables.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "drpen/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"penalized-regression ATE estimators: simulation grid and dataset analysis"};
    app.set_version_flag("--version", std::string(DRPEN_VERSION));
    app.require_subcommand(1);

    drpen::cli::SimulateOptions sim;
    double sim_clip = -1.0;
    auto* s = app.add_subcommand("simulate", "run simulation scenarios and write metrics");
    s->add_option("--config", sim.config_path, "scenario config file (key = value sections)");
    s->add_flag("--paper-grid", sim.use_paper_grid, "run the full 72-setting grid");
    s->add_option("--from-manifest", sim.from_manifest, "rerun scenarios from a manifest.json");
    s->add_option("--reps", sim.reps_override, "override replications per scenario");
    s->add_option("--seed", sim.seed, "base seed");
    s->add_option("--jobs", sim.jobs, "worker threads");
    s->add_option("--clip", sim_clip, "propensity clipping epsilon in (0,0.5)");
    s->add_option("--out", sim.out_dir, "output directory")->required();

    drpen::cli::AnalyzeOptions an;
    double an_clip = -1.0;
    std::string an_covariates, an_estimators;
    auto* a = app.add_subcommand("analyze", "estimate ATEs on a CSV dataset with bootstrap CIs");
    a->add_option("--data", an.data_path, "input CSV")->required();
    a->add_option("--outcome", an.outcome_col, "outcome column name")->required();
    a->add_option("--treatment", an.treatment_col, "treatment column name (0/1)")->required();
    a->add_option("--covariates", an_covariates,
                  "comma-separated covariate columns (default: all remaining)");
    a->add_option("--estimators", an_estimators,
                  "comma-separated estimator names (default: Table-1 set minus AIPW-Targ)");
    a->add_option("--bootstrap", an.bootstrap_b, "bootstrap resamples");
    a->add_option("--seed", an.seed, "seed");
    a->add_option("--clip", an_clip, "propensity clipping epsilon in (0,0.5)");
    a->add_option("--min-minority-prop", an.min_minority_prop,
                  "rare-binary filter threshold (strict less-than)");
    a->add_option("--jobs", an.jobs, "worker threads");
    a->add_option("--out", an.out_dir, "output directory")->required();

    drpen::cli::ReportOptions rep;
    auto* r = app.add_subcommand("report", "render results tables / boxplot data");
    r->add_option("--in", rep.results_path, "results.csv from simulate")->required();
    r->add_option("--format", rep.format, "table | csv | json");
    r->add_option("--boxplot-data", rep.boxplot_out, "write per-estimator quantiles CSV");
    r->add_option("--estimates", rep.estimates_path,
                  "estimates.csv (default: next to results.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : drpen::cli::kExitConfig;
    }

    try {
        if (s->parsed()) {
            if (sim_clip > 0) sim.clip = sim_clip;
            return drpen::cli::cmd_simulate(sim);
        }
        if (a->parsed()) {
            if (an_clip > 0) an.clip = an_clip;
            if (!an_covariates.empty()) an.covariate_cols = drpen::cli::detail::split_list(an_covariates);
            if (!an_estimators.empty()) an.estimators = drpen::cli::detail::split_list(an_estimators);
            return drpen::cli::cmd_analyze(an);
        }
        if (r->parsed()) return drpen::cli::cmd_report(rep);
    } catch (const drpen::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return drpen::cli::kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return drpen::cli::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return drpen::cli::kExitData;
    }
    return drpen::cli::kExitOk;
}
