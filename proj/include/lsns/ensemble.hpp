#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsns/config.hpp"
#include "lsns/dissipation.hpp"
#include "lsns/energy_ledger.hpp"
#include "lsns/vorticity.hpp"

namespace lsns {

namespace fs = std::filesystem;

/// Ledgers of one path. Energy and DR ledgers follow the order of the test functions.
struct PathResult {
    std::uint32_t path_id = 0;
    std::optional<std::int64_t> blowup_step;
    std::string blowup_message;
    std::vector<EnergyLedger> energy;
    std::optional<VorticityLedger> vorticity;
    std::vector<DRLedger> dissipation;

    bool blown_up() const noexcept { return blowup_step.has_value(); }
};

/// Ledger builders of one path, advanced one step at a time. Inline runs and replay both go
/// through this class, so they produce the same bits.
class PathDiagnostics {
public:
    PathDiagnostics(const Stepper& stepper, const DiagnosticsSpec& spec, std::uint32_t path_id);

    void start(const SpectralField& u0);
    /// Ledger rows for the step from u (time index j) to u_next.
    void step(std::int64_t j, const SpectralField& u, const SpectralField& u_next);
    PathResult finish();

private:
    const Stepper* stepper_;
    BrownianIncrements incs_;
    std::vector<EnergyLedgerBuilder> energy_;
    std::optional<VorticityLedgerBuilder> vorticity_;
    std::vector<DRLedgerBuilder> dr_;
    PathResult result_;
};

/// Integrates one path with inline ledgers; with `snapshots` set, states every output.stride
/// steps are written there. A blow-up ends the path and is recorded on the result.
PathResult run_path(const ExperimentConfig& config, std::uint32_t path_id, const fs::path* snapshots = nullptr);

/// All paths in memory, no files. workers == 1 runs the plain serial loop; otherwise OpenMP
/// distributes whole paths. Results are indexed by path, so both give identical output.
std::vector<PathResult> run_ensemble(const ExperimentConfig& config, int workers);

/// LSNS_WORKERS if set (must be a positive integer), else the config's worker count.
int resolve_workers(const ExperimentConfig& config);

struct Outcome {
    std::string name;       // e.g. "energy.bump.martingale_zero_mean"
    std::string criterion;  // acceptance criterion the outcome belongs to
    std::string status;     // "pass", "fail" or "skipped"
    double statistic = 0.0;
    std::string note;
};

struct BlowUpRecord {
    std::uint32_t path_id = 0;
    std::int64_t step = 0;
    std::string message;
};

struct EnsembleSummary {
    std::string config_hash;
    std::string code_version;
    int paths = 0;
    int completed = 0;
    std::vector<BlowUpRecord> blowups;
    /// Aggregate statistics by ledger and test function.
    nlohmann::json statistics;
    std::vector<Outcome> outcomes;
    double wall_seconds = 0.0;
    int workers = 1;

    bool any_failure() const;
    /// More than half of the paths blew up.
    bool blow_up_dominated() const;
    /// 0 pass, 1 diagnostic failure, 3 blow-up dominated.
    int exit_code() const;
    /// The "timing" block holds the only fields that may differ between identical runs.
    nlohmann::json to_json(bool with_timing = true) const;
};

/// Statistics and test outcomes over the paths that did not blow up. Martingale tests need
/// at least 100 such paths and are reported as skipped otherwise.
EnsembleSummary summarize_ensemble(const ExperimentConfig& config, std::span<const PathResult> paths);

struct RunOptions {
    int workers = 0;     // 0: resolve_workers(config)
    bool resume = true;  // reuse paths whose completion marker matches the config hash
};

/// Layout under output.directory: manifest.json, summary.json and paths/pNNNNN/ with the
/// ledger CSVs, states.lsns and a done.json completion marker written last.
EnsembleSummary run_experiment(const ExperimentConfig& config, RunOptions options = {});

fs::path path_directory(const fs::path& root, std::uint32_t path_id);
/// Ledgers of a finished path read back from its CSVs, or nothing if the marker is absent or stale.
std::optional<PathResult> load_path(const fs::path& dir, const ExperimentConfig& config);

/// Reads a diagnostics spec file: either a bare diagnostics object or {"diagnostics": {...}}.
DiagnosticsSpec load_diagnostics(const fs::path& path);

struct ReplayResult {
    fs::path directory;
    std::vector<PathResult> paths;
    EnsembleSummary summary;
};

/// Recomputes ledgers from the stored states of a run without integrating again and writes
/// them under `out` (default: <run>/replay). Throws ConfigError if the run stored no states
/// or used a snapshot stride above 1.
ReplayResult replay(const fs::path& manifest, const DiagnosticsSpec& diagnostics, const fs::path& out = {});

struct NoiseValidation {
    int N = 0;  // truncation level of the run's epsilon
    RatioReport growth;
    TailCurve tail;
    RatioReport vorticity;
    bool pass() const noexcept { return growth.pass && tail.pass && vorticity.pass; }
    nlohmann::json to_json() const;
};

/// Runs the three noise validators for the config's noise model on `samples` random
/// divergence-free fields of graded energy (seeds 1000, 1001, ...).
NoiseValidation validate_noise(const ExperimentConfig& config, int samples = 20);

/// Plot-ready ensemble tables under <dir>/report: per-time mean and stderr of each ledger,
/// the outcomes table and report.json. A directory of runs also gets an epsilon ladder table.
/// Returns the files written.
std::vector<fs::path> write_report(const fs::path& dir);

}  // namespace lsns
