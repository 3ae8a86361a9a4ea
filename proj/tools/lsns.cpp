// lsns: run, replay and inspect stochastic Leray-regularised Navier-Stokes ensembles.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lsns/config.hpp"
#include "lsns/ensemble.hpp"
#include "lsns/errors.hpp"
#include "lsns/oracle_suite.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;

void print_outcomes(const lsns::EnsembleSummary& s) {
    std::printf("paths %d, completed %d, blown up %zu\n", s.paths, s.completed, s.blowups.size());
    for (const auto& o : s.outcomes)
        std::printf("  %-8s %-44s %12.4g  %s\n", o.status.c_str(), o.name.c_str(), o.statistic, o.note.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Leray-regularised Navier-Stokes ensembles and their energy ledgers"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, diag_path, out_dir, report_dir;
    int workers = 0, samples = 20;
    bool no_resume = false, full = false;

    auto* run = app.add_subcommand("run", "Integrate an ensemble and write ledgers, manifest and summary");
    run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers, "Worker threads (overrides LSNS_WORKERS and the config)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    run->add_flag("--no-resume", no_resume, "Recompute paths that already have a completion marker");

    auto* rep = app.add_subcommand("replay", "Recompute diagnostics from stored states");
    rep->add_option("manifest", manifest_path, "manifest.json of a run")->required()->check(CLI::ExistingFile);
    rep->add_option("diag", diag_path, "Diagnostics spec (JSON)")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", out_dir, "Output directory (default: <run>/replay)");

    auto* noise = app.add_subcommand("validate-noise", "Check the noise model's growth, tail and vorticity bounds");
    noise->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    noise->add_option("--samples", samples, "Random fields to test")->check(CLI::PositiveNumber);

    auto* suite = app.add_subcommand("oracle-suite", "Compare fast operations with brute-force oracles");
    suite->add_flag("--full", full, "Also run at M = 16 and the slower oracles");

    auto* report = app.add_subcommand("report", "Write plot-ready CSV/JSON tables for a run or a ladder of runs");
    report->add_option("dir", report_dir, "Run directory or directory of runs")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config;
    }

    try {
        if (*run) {
            lsns::ExperimentConfig config = lsns::ExperimentConfig::load(config_path);
            if (!out_dir.empty()) config.output.directory = out_dir;
            const auto s = lsns::run_experiment(config, {workers, !no_resume});
            print_outcomes(s);
            std::printf("summary: %s/summary.json (%.1f s, %d workers)\n", config.output.directory.c_str(),
                        s.wall_seconds, s.workers);
            return s.exit_code();
        }
        if (*rep) {
            const auto r = lsns::replay(manifest_path, lsns::load_diagnostics(diag_path), out_dir);
            print_outcomes(r.summary);
            std::printf("replay: %s\n", r.directory.c_str());
            return r.summary.exit_code();
        }
        if (*noise) {
            const auto v = lsns::validate_noise(lsns::ExperimentConfig::load(config_path), samples);
            std::cout << v.to_json().dump(2) << "\n";
            return v.pass() ? exit_pass : exit_failure;
        }
        if (*suite) {
            const auto r = lsns::oracle::run_oracle_suite(full ? lsns::oracle::SuiteLevel::full : lsns::oracle::SuiteLevel::fast);
            for (const auto& c : r.checks)
                std::printf("%-4s %-20s %-24s M=%-3d seed=%-4llu error %.3e (tol %.1e)\n", c.pass ? "ok" : "FAIL",
                            c.module.c_str(), c.operation.c_str(), c.modes, static_cast<unsigned long long>(c.seed),
                            c.error, c.tolerance);
            for (const auto& f : r.failures()) std::fprintf(stderr, "oracle failure: %s\n", f.c_str());
            std::printf("%zu checks in %.1f s\n", r.checks.size(), r.seconds);
            return r.pass() ? exit_pass : exit_failure;
        }
        if (*report) {
            for (const auto& f : lsns::write_report(report_dir)) std::printf("%s\n", f.c_str());
            return exit_pass;
        }
    } catch (const lsns::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_failure;
    }
    return exit_failure;
}
