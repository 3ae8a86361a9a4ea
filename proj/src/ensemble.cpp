#include "lsns/ensemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>

#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/persistence.hpp"
#include "lsns/statistics.hpp"

namespace lsns {

using nlohmann::json;

namespace {

constexpr const char* states_file = "states.lsns";
constexpr const char* done_file = "done.json";

// Runs f(i) for every path. One worker is the serial reference; more hand whole paths to OpenMP threads.
void for_each_path(int n, int workers, const std::function<void(int)>& f) {
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

json summary_json(const SampleSummary& s) {
    return json{{"count", s.count}, {"mean", s.mean}, {"stderr", s.stderr_mean}};
}

json two_sided_json(const TwoSidedReport& r) {
    return json{{"summary", summary_json(r.summary)}, {"statistic", r.statistic}, {"pass", r.pass}};
}

json martingale_json(const MartingaleTestReport& r) {
    json stats = json::array();
    for (const auto& s : r.statistics)
        stats.push_back({{"event", s.label}, {"summary", summary_json(s.summary)}, {"statistic", s.statistic}});
    return json{{"s", r.s}, {"t", r.t}, {"statistics", stats}, {"pass", r.pass}};
}

double worst_statistic(const MartingaleTestReport& r, bool upper) {
    double w = upper ? -INFINITY : INFINITY;
    for (const auto& s : r.statistics) w = upper ? std::max(w, s.statistic) : std::min(w, s.statistic);
    return w;
}

SampleSummary column_summary(std::span<const double> v) { return summarize(v); }

// Collects outcomes; a ConfigError from an ensemble test (too few paths, no steps) marks it skipped.
constexpr std::size_t min_test_paths = 100;

class OutcomeLog {
public:
    OutcomeLog(std::vector<Outcome>& out, std::size_t paths) : out_(out), paths_(paths) {}

    /// Ensemble statistics are skipped below min_test_paths paths.
    template <class F>
    void add_statistic(const std::string& name, const std::string& criterion, F test) {
        if (paths_ < min_test_paths) {
            out_.push_back({name, criterion, "skipped", 0.0,
                            "ensemble tests need at least " + std::to_string(min_test_paths) + " paths"});
            return;
        }
        add(name, criterion, test);
    }

    template <class F>
    void add(const std::string& name, const std::string& criterion, F test) {
        Outcome o{name, criterion, "skipped", 0.0, ""};
        try {
            const auto [pass, statistic, note] = test();
            o.status = pass ? "pass" : "fail";
            o.statistic = statistic;
            o.note = note;
        } catch (const ConfigError& e) {
            o.note = e.what();
        }
        out_.push_back(std::move(o));
    }

private:
    std::vector<Outcome>& out_;
    std::size_t paths_;
};

struct Verdict {
    bool pass;
    double statistic;
    std::string note;
};

std::string path_name(std::uint32_t id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%05u", id);
    return buf;
}

// Writes the ledger CSVs of a path and then its completion marker.
void write_path(const fs::path& dir, const PathResult& r, const ExperimentConfig& config, bool with_states) {
    const auto& d = config.diagnostics;
    json files = json::object();
    auto table = [&](const std::string& name, const io::Table& t) {
        io::write_table(dir / name, t);
        files[name] = io::file_crc32(dir / name);
    };
    if (config.output.csv) {
        for (std::size_t i = 0; i < r.energy.size(); ++i)
            table("energy_" + d.test_functions[i].name + ".csv", io::energy_table(r.energy[i]));
        if (r.vorticity) table("vorticity.csv", io::vorticity_table(*r.vorticity));
        for (std::size_t i = 0; i < r.dissipation.size(); ++i)
            table("dr_" + d.test_functions[i].name + ".csv", io::dr_table(r.dissipation[i]));
    }
    if (with_states) files[states_file] = io::file_crc32(dir / states_file);
    json done{{"path_id", r.path_id},
              {"config_hash", config.hash()},
              {"status", r.blown_up() ? "blown_up" : "ok"},
              {"files", files}};
    if (r.blown_up()) {
        done["blowup_step"] = *r.blowup_step;
        done["blowup_message"] = r.blowup_message;
    }
    io::write_text_atomic(dir / done_file, done.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    try {
        return json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json outcome_json(const Outcome& o) {
    return json{{"name", o.name}, {"criterion", o.criterion}, {"status", o.status}, {"statistic", o.statistic},
                {"note", o.note}};
}

}  // namespace

PathDiagnostics::PathDiagnostics(const Stepper& stepper, const DiagnosticsSpec& spec, std::uint32_t path_id)
    : stepper_(&stepper),
      incs_(stepper.params().seed, path_id, stepper.params().dt) {
    const RunParams& p = stepper.params();
    result_.path_id = path_id;
    std::vector<TestFunction> phis;
    for (const auto& s : spec.test_functions) phis.push_back(s.build(p.grid));
    if (spec.energy)
        for (const auto& phi : phis) energy_.emplace_back(stepper, phi);
    if (spec.vorticity) vorticity_.emplace(stepper, HFunction(spec.delta));
    if (spec.dissipation) {
        if (!spec.energy) throw ConfigError("diagnostics.dissipation: needs the energy ledger");
        const DRConfig dr = spec.dr_config(p.grid);
        for (const auto& phi : phis) dr_.emplace_back(p.grid, p.dt, phi, dr);
    }
}

void PathDiagnostics::start(const SpectralField& u0) {
    result_.energy.assign(energy_.size(), EnergyLedger{});
    for (std::size_t i = 0; i < energy_.size(); ++i) result_.energy[i].rows.push_back(energy_[i].initial_row(u0));
    if (vorticity_) result_.vorticity = vorticity_->start(u0);
    result_.dissipation.assign(dr_.size(), DRLedger{});
    for (std::size_t i = 0; i < dr_.size(); ++i) dr_[i].start(result_.dissipation[i], 0.0);
}

void PathDiagnostics::step(std::int64_t j, const SpectralField& u, const SpectralField& u_next) {
    const double t = static_cast<double>(j) * stepper_->params().dt;
    if (!energy_.empty()) {
        const ScalarField p = stepper_->pressure(u);
        for (std::size_t i = 0; i < energy_.size(); ++i) {
            auto& rows = result_.energy[i].rows;
            rows.push_back(energy_[i].next_row(rows.back(), u, p, u_next, j, incs_));
            if (i < dr_.size()) dr_[i].step(result_.dissipation[i], u, t, rows.back());
        }
    }
    if (vorticity_) {
        auto& rows = result_.vorticity->rows;
        rows.push_back(vorticity_->next_row(rows.back(), u_next, j, incs_));
    }
}

PathResult PathDiagnostics::finish() {
    for (std::size_t i = 0; i < dr_.size(); ++i) dr_[i].finish(result_.dissipation[i]);
    return std::move(result_);
}

PathResult run_path(const ExperimentConfig& config, std::uint32_t path_id, const fs::path* snapshots) {
    const RunParams p = config.path_params(path_id);
    const Stepper stepper(p, config.noise_model());
    const BrownianIncrements incs(p.seed, p.path_id, p.dt);
    SpectralField u = initial_condition(config.initial.build(p.grid), p.epsilon, p.mollifier);

    std::optional<io::SnapshotWriter> writer;
    if (snapshots) {
        writer.emplace(*snapshots, p.grid, p.dt, config.output.stride);
        writer->write(0, u);
    }
    PathDiagnostics diag(stepper, config.diagnostics, path_id);
    diag.start(u);
    std::optional<std::int64_t> blowup;
    std::string message;
    const std::int64_t n = p.steps();
    for (std::int64_t j = 0; j < n; ++j) {
        SpectralField next;
        try {
            next = stepper.advance(u, j, incs);
        } catch (const BlowUpError& e) {
            blowup = e.step();
            message = e.what();
            break;
        }
        diag.step(j, u, next);
        u = std::move(next);
        if (writer && (j + 1) % writer->stride() == 0) writer->write(j + 1, u);
    }
    if (writer) writer->close();
    PathResult r = diag.finish();
    r.blowup_step = blowup;
    r.blowup_message = message;
    return r;
}

std::vector<PathResult> run_ensemble(const ExperimentConfig& config, int workers) {
    config.validate();
    std::vector<PathResult> out(static_cast<std::size_t>(config.ensemble.paths));
    for_each_path(config.ensemble.paths, workers,
                  [&](int i) { out[static_cast<std::size_t>(i)] = run_path(config, static_cast<std::uint32_t>(i)); });
    return out;
}

int resolve_workers(const ExperimentConfig& config) {
    const char* env = std::getenv("LSNS_WORKERS");
    if (!env || !*env) return config.ensemble.workers;
    char* end = nullptr;
    const long w = std::strtol(env, &end, 10);
    if (*end != '\0' || w < 1 || w > 4096) throw ConfigError("LSNS_WORKERS: must be a positive integer");
    return static_cast<int>(w);
}

bool EnsembleSummary::any_failure() const {
    return std::any_of(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.status == "fail"; });
}

bool EnsembleSummary::blow_up_dominated() const { return 2 * static_cast<int>(blowups.size()) > paths; }

int EnsembleSummary::exit_code() const {
    if (blow_up_dominated()) return 3;
    return any_failure() ? 1 : 0;
}

json EnsembleSummary::to_json(bool with_timing) const {
    json blown = json::array();
    for (const auto& b : blowups) blown.push_back({{"path_id", b.path_id}, {"step", b.step}, {"message", b.message}});
    json outs = json::array();
    for (const auto& o : outcomes) outs.push_back(outcome_json(o));
    json j{{"config_hash", config_hash},
           {"code_version", code_version},
           {"paths", paths},
           {"completed", completed},
           {"blown_up", blowups.size()},
           {"blown_up_paths", blown},
           {"statistics", statistics},
           {"outcomes", outs}};
    if (with_timing) j["timing"] = {{"wall_seconds", wall_seconds}, {"workers", workers}};
    return j;
}

EnsembleSummary summarize_ensemble(const ExperimentConfig& config, std::span<const PathResult> paths) {
    EnsembleSummary s;
    s.config_hash = config.hash();
    s.code_version = code_version();
    s.paths = static_cast<int>(paths.size());
    std::vector<const PathResult*> ok;
    for (const auto& p : paths) {
        if (p.blown_up())
            s.blowups.push_back({p.path_id, *p.blowup_step, p.blowup_message});
        else
            ok.push_back(&p);
    }
    s.completed = static_cast<int>(ok.size());
    s.statistics = json::object();
    OutcomeLog record(s.outcomes, ok.size());
    if (ok.empty()) return s;

    const auto& d = config.diagnostics;
    const std::int64_t steps = config.run.steps();
    const std::size_t t_index = static_cast<std::size_t>(steps);
    const std::size_t s_index = static_cast<std::size_t>(std::llround(d.s_fraction * static_cast<double>(steps)));

    const std::size_t n_energy = ok.front()->energy.size();
    for (std::size_t i = 0; i < n_energy; ++i) {
        const std::string tf = d.test_functions[i].name;
        const std::string prefix = "energy." + tf + ".";
        std::vector<EnergyLedger> ens;
        for (const auto* p : ok) ens.push_back(p->energy[i]);
        json e = json::object();
        std::vector<double> initial, final_energy, residual, compensator;
        for (const auto& l : ens) {
            initial.push_back(l.rows.front().local_energy);
            final_energy.push_back(l.rows.back().running_energy());
            residual.push_back(l.rows.back().residual);
            compensator.push_back(l.rows.back().compensator);
        }
        e["initial_local_energy"] = summary_json(column_summary(initial));
        e["final_running_energy"] = summary_json(column_summary(final_energy));
        e["final_residual"] = summary_json(column_summary(residual));
        e["final_compensator"] = summary_json(column_summary(compensator));

        record.add_statistic(prefix + "martingale_zero_mean", "martingale_zero_mean_and_qv", [&] {
            const auto r = martingale_zero_mean(ens);
            e["martingale_zero_mean"] = two_sided_json(r);
            return Verdict{r.pass, r.statistic, ""};
        });
        record.add_statistic(prefix + "qv_consistency", "martingale_zero_mean_and_qv", [&] {
            const auto r = qv_consistency(ens);
            e["qv_consistency"] = two_sided_json(r);
            return Verdict{r.pass, r.statistic, ""};
        });
        record.add_statistic(prefix + "supermartingale", "supermartingale", [&] {
            const auto r = supermartingale_test(ens, s_index, t_index, energy_split_events(ens, s_index));
            e["supermartingale"] = martingale_json(r);
            return Verdict{r.pass, worst_statistic(r, true), "largest one-sided statistic"};
        });
        const std::pair<const char*, PathFunctional> xis[] = {{"xi_one", xi_one()},
                                                              {"xi_inverse_energy", xi_inverse_energy()}};
        for (const auto& [xi_name, xi] : xis) {
            record.add_statistic(prefix + "lei." + xi_name, "local_energy_inequality", [&] {
                const auto r = lei_scalar_check(ens, xi, xi_name);
                e["lei"][xi_name] = {{"lhs", r.lhs},
                                     {"rhs", r.rhs},
                                     {"difference", summary_json(r.difference)},
                                     {"statistic", r.statistic},
                                     {"pass", r.pass}};
                return Verdict{r.pass, r.statistic, ""};
            });
        }

        if (i < ok.front()->dissipation.size()) {
            std::vector<DRLedger> dr;
            for (const auto* p : ok) dr.push_back(p->dissipation[i]);
            json dj = json::object();
            dj["ell_values"] = dr.front().ell_values;
            json finals = json::array(), cauchy = json::array();
            for (std::size_t k = 0; k < dr.front().series.size(); ++k) {
                std::vector<double> v;
                for (const auto& l : dr) v.push_back(l.series[k].back());
                finals.push_back(summary_json(column_summary(v)));
            }
            for (std::size_t k = 0; k < dr.front().cauchy_differences.size(); ++k) {
                std::vector<double> v;
                for (const auto& l : dr) v.push_back(l.cauchy_differences[k]);
                cauchy.push_back(summary_json(column_summary(v)));
            }
            double worst = 0.0;
            for (const auto& l : dr) worst = std::max(worst, l.worst_closure());
            dj["final"] = finals;
            dj["cauchy_differences"] = cauchy;
            dj["worst_closure"] = worst;
            record.add_statistic("dissipation." + tf + ".submartingale", "dissipation_ledger", [&] {
                const auto r = dissipation_submartingale_test(dr, ens, s_index, t_index, energy_split_events(ens, s_index));
                dj["submartingale"] = martingale_json(r);
                return Verdict{r.pass, worst_statistic(r, false), "smallest one-sided statistic"};
            });
            s.statistics["dissipation"][tf] = dj;
        }
        s.statistics["energy"][tf] = e;
    }

    if (ok.front()->vorticity) {
        std::vector<VorticityLedger> ens;
        for (const auto* p : ok) ens.push_back(*p->vorticity);
        json v = json::object();
        const auto b = vorticity_bounds_report(ens);
        v["bounds"] = {{"epsilon", b.epsilon},
                       {"delta", b.delta},
                       {"sup_l1", summary_json(b.sup_l1)},
                       {"gradient_time", summary_json(b.gradient_time)},
                       {"min_holder_margin", b.min_holder_margin},
                       {"holder_pass", b.holder_pass},
                       {"norm_chain_pass", b.norm_chain_pass}};
        std::vector<double> residual;
        for (const auto& l : ens) residual.push_back(l.rows.back().residual);
        v["final_residual"] = summary_json(column_summary(residual));
        record.add_statistic("vorticity.residual_zero_mean", "vorticity_identity", [&] {
            const auto r = vorticity_residual_zero_mean(ens);
            v["residual_zero_mean"] = two_sided_json(r);
            return Verdict{r.pass, r.statistic, ""};
        });
        record.add_statistic("vorticity.qv_consistency", "vorticity_identity", [&] {
            const auto r = vorticity_qv_consistency(ens);
            v["qv_consistency"] = two_sided_json(r);
            return Verdict{r.pass, r.statistic, ""};
        });
        record.add("vorticity.holder_chain", "vorticity_identity",
                [&] { return Verdict{b.holder_pass, b.min_holder_margin, "smallest per-step margin"}; });
        record.add("vorticity.norm_chain", "vorticity_identity", [&] { return Verdict{b.norm_chain_pass, 0.0, ""}; });
        s.statistics["vorticity"] = v;
    }
    return s;
}

fs::path path_directory(const fs::path& root, std::uint32_t path_id) { return root / "paths" / path_name(path_id); }

std::optional<PathResult> load_path(const fs::path& dir, const ExperimentConfig& config) {
    if (!fs::exists(dir / done_file) || !config.output.csv) return std::nullopt;
    try {
        const json done = read_json(dir / done_file);
        if (done.at("config_hash").get<std::string>() != config.hash()) return std::nullopt;
        for (const auto& [name, crc] : done.at("files").items())
            if (!fs::exists(dir / name) || io::file_crc32(dir / name) != crc.get<std::string>()) return std::nullopt;
        if (config.output.snapshots && !done.at("files").contains(states_file)) return std::nullopt;
        PathResult r;
        r.path_id = done.at("path_id").get<std::uint32_t>();
        if (done.contains("blowup_step")) {
            r.blowup_step = done.at("blowup_step").get<std::int64_t>();
            r.blowup_message = done.at("blowup_message").get<std::string>();
        }
        const auto& d = config.diagnostics;
        if (d.energy)
            for (const auto& tf : d.test_functions)
                r.energy.push_back(io::energy_from_table(io::read_table(dir / ("energy_" + tf.name + ".csv"))));
        if (d.vorticity)
            r.vorticity = io::vorticity_from_table(io::read_table(dir / "vorticity.csv"), d.delta, config.run.epsilon,
                                                   config.run.dt);
        if (d.dissipation) {
            const auto ells = d.dr_config(config.run.grid).ell_values;
            for (const auto& tf : d.test_functions)
                r.dissipation.push_back(io::dr_from_table(io::read_table(dir / ("dr_" + tf.name + ".csv")), ells));
        }
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

EnsembleSummary run_experiment(const ExperimentConfig& config, RunOptions options) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const int workers = options.workers > 0 ? options.workers : resolve_workers(config);
    const fs::path root = config.output.directory;
    fs::create_directories(root / "paths");

    const auto n = static_cast<std::size_t>(config.ensemble.paths);
    std::vector<PathResult> results(n);
    for_each_path(config.ensemble.paths, workers, [&](int i) {
        const auto id = static_cast<std::uint32_t>(i);
        const fs::path dir = path_directory(root, id);
        if (options.resume)
            if (auto r = load_path(dir, config)) {
                results[id] = std::move(*r);
                return;
            }
        fs::create_directories(dir);
        fs::remove(dir / done_file);
        const fs::path states = dir / states_file;
        results[id] = run_path(config, id, config.output.snapshots ? &states : nullptr);
        write_path(dir, results[id], config, config.output.snapshots);
    });

    EnsembleSummary s = summarize_ensemble(config, results);
    s.workers = workers;
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json entries = json::array();
    for (const auto& r : results) {
        const fs::path dir = path_directory(root, r.path_id);
        json e{{"path_id", r.path_id},
               {"directory", fs::relative(dir, root).string()},
               {"status", r.blown_up() ? "blown_up" : "ok"},
               {"files", read_json(dir / done_file).at("files")}};
        if (r.blown_up()) e["blowup_step"] = *r.blowup_step;
        entries.push_back(e);
    }
    const json manifest{{"config", config.to_json()},
                        {"config_hash", s.config_hash},
                        {"code_version", s.code_version},
                        {"paths", entries}};
    io::write_text_atomic(root / "manifest.json", manifest.dump(2) + "\n");
    io::write_text_atomic(root / "summary.json", s.to_json().dump(2) + "\n");
    return s;
}

DiagnosticsSpec load_diagnostics(const fs::path& path) {
    const json j = read_json(path);
    if (j.is_object() && j.contains("diagnostics") && j.size() == 1)
        return DiagnosticsSpec::from_json(j.at("diagnostics"));
    return DiagnosticsSpec::from_json(j);
}

ReplayResult replay(const fs::path& manifest_path, const DiagnosticsSpec& diagnostics, const fs::path& out) {
    const json manifest = read_json(manifest_path);
    if (!manifest.contains("config") || !manifest.contains("paths"))
        throw ConfigError(manifest_path.string() + ": not a run manifest");
    const ExperimentConfig source = ExperimentConfig::from_json(manifest.at("config"));
    if (!source.output.snapshots) throw ConfigError("output.snapshots: the run stored no states to replay");
    if (source.output.stride != 1)
        throw ConfigError("output.stride: ledgers need every step, but the run stored states every " +
                          std::to_string(source.output.stride) + " steps");
    const fs::path root = manifest_path.parent_path();

    ReplayResult result;
    result.directory = out.empty() ? root / "replay" : out;
    ExperimentConfig config = source;
    config.diagnostics = diagnostics;
    config.output.directory = result.directory.string();
    config.output.snapshots = false;
    config.output.csv = true;
    config.validate();
    if (fs::weakly_canonical(result.directory) == fs::weakly_canonical(root))
        throw ConfigError("replay output must differ from the run directory");

    std::vector<json> entries(manifest.at("paths").begin(), manifest.at("paths").end());
    fs::create_directories(result.directory / "paths");
    result.paths.resize(entries.size());
    for_each_path(static_cast<int>(entries.size()), resolve_workers(config), [&](int i) {
        const json& e = entries[static_cast<std::size_t>(i)];
        const auto id = e.at("path_id").get<std::uint32_t>();
        const io::Snapshots snap = io::read_snapshots(root / e.at("directory").get<std::string>() / states_file);
        if (!(snap.grid == config.run.grid) || snap.dt != config.run.dt)
            throw ConfigError("stored states of path " + std::to_string(id) + " do not match the run config");
        for (std::size_t j = 0; j < snap.steps.size(); ++j)
            if (snap.steps[j] != static_cast<std::int64_t>(j))
                throw ConfigError("stored states of path " + std::to_string(id) + " are not consecutive");
        const Stepper stepper(config.path_params(id), config.noise_model());
        PathDiagnostics diag(stepper, diagnostics, id);
        diag.start(snap.states.front());
        for (std::size_t j = 0; j + 1 < snap.states.size(); ++j)
            diag.step(static_cast<std::int64_t>(j), snap.states[j], snap.states[j + 1]);
        PathResult r = diag.finish();
        if (e.contains("blowup_step")) {
            r.blowup_step = e.at("blowup_step").get<std::int64_t>();
            r.blowup_message = "replayed blow-up";
        }
        const fs::path dir = path_directory(result.directory, id);
        fs::remove_all(dir);  // ledgers of an earlier replay with other diagnostics
        fs::create_directories(dir);
        write_path(dir, r, config, false);
        result.paths[static_cast<std::size_t>(i)] = std::move(r);
    });

    result.summary = summarize_ensemble(config, result.paths);
    json replayed = json::array();
    for (const auto& r : result.paths) {
        const fs::path dir = path_directory(result.directory, r.path_id);
        json en{{"path_id", r.path_id},
                {"directory", fs::relative(dir, result.directory).string()},
                {"status", r.blown_up() ? "blown_up" : "ok"},
                {"files", read_json(dir / done_file).at("files")}};
        if (r.blown_up()) en["blowup_step"] = *r.blowup_step;
        replayed.push_back(en);
    }
    const json m{{"config", config.to_json()},
                 {"config_hash", result.summary.config_hash},
                 {"code_version", result.summary.code_version},
                 {"replay_of", fs::absolute(manifest_path).string()},
                 {"paths", replayed}};
    io::write_text_atomic(result.directory / "manifest.json", m.dump(2) + "\n");
    io::write_text_atomic(result.directory / "summary.json", result.summary.to_json(false).dump(2) + "\n");
    return result;
}

json NoiseValidation::to_json() const {
    auto ratio = [](const RatioReport& r) {
        return json{{"empirical", r.empirical}, {"analytic", r.analytic}, {"pass", r.pass}, {"note", r.note}};
    };
    return json{{"N", N},
                {"linear_growth", ratio(growth)},
                {"tail",
                 {{"N", tail.N},
                  {"empirical", tail.empirical},
                  {"analytic", tail.analytic},
                  {"nonincreasing", tail.nonincreasing},
                  {"pass", tail.pass},
                  {"note", tail.note}}},
                {"vorticity_control", ratio(vorticity)},
                {"pass", pass()}};
}

NoiseValidation validate_noise(const ExperimentConfig& config, int samples) {
    if (samples < 1) throw ConfigError("samples: must be >= 1");
    const Grid& g = config.run.grid;
    const NoiseModel model = config.noise_model();
    std::vector<SpectralField> set;
    for (int i = 0; i < samples; ++i) set.push_back(random_solenoidal(g, 1000 + static_cast<std::uint64_t>(i), 0.5 * (1 + i % 5)));
    NoiseValidation v;
    v.N = std::min(TruncationLevel::from_epsilon(config.run.epsilon).N, model.max_k());
    v.growth = validate_linear_growth(model, set, v.N);
    std::vector<int> Ns;
    for (int n = 1; n <= std::min(8, model.max_k()); ++n) Ns.push_back(n);
    v.tail = validate_tail_decay(model, set, Ns);
    v.vorticity = validate_vorticity_control(model, set, v.N);
    return v;
}

namespace {

// Per-time mean and stderr of selected columns across paths with equal row counts.
template <class Row>
io::Table ensemble_table(const std::vector<std::vector<Row>>& paths,
                         const std::vector<std::pair<std::string, std::function<double(const Row&)>>>& columns,
                         const std::function<double(const Row&)>& time) {
    io::Table t;
    t.columns.emplace_back("t");
    for (const auto& [name, f] : columns) {
        t.columns.push_back(name + "_mean");
        t.columns.push_back(name + "_stderr");
    }
    std::size_t rows = paths.front().size();
    for (const auto& p : paths) rows = std::min(rows, p.size());
    for (std::size_t j = 0; j < rows; ++j) {
        std::vector<double> row{time(paths.front()[j])};
        for (const auto& [name, f] : columns) {
            std::vector<double> v;
            for (const auto& p : paths) v.push_back(f(p[j]));
            const auto s = summarize(v);
            row.push_back(s.mean);
            row.push_back(s.stderr_mean);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<fs::path> run_report(const fs::path& dir, const fs::path& out) {
    const json manifest = read_json(dir / "manifest.json");
    const ExperimentConfig config = ExperimentConfig::from_json(manifest.at("config"));
    const json summary = read_json(dir / "summary.json");
    std::vector<PathResult> ok;
    for (const auto& e : manifest.at("paths")) {
        auto r = load_path(dir / e.at("directory").get<std::string>(), config);
        if (!r) throw ConfigError(dir.string() + ": path " + e.at("path_id").dump() + " has no readable ledgers");
        if (!r->blown_up()) ok.push_back(std::move(*r));
    }
    std::vector<fs::path> files;
    auto emit = [&](const std::string& name, const io::Table& t) {
        io::write_table(out / name, t);
        files.push_back(out / name);
    };
    const auto& d = config.diagnostics;
    if (!ok.empty()) {
        for (std::size_t i = 0; i < ok.front().energy.size(); ++i) {
            std::vector<std::vector<LedgerRow>> rows;
            for (const auto& p : ok) rows.push_back(p.energy[i].rows);
            using F = std::function<double(const LedgerRow&)>;
            const std::vector<std::pair<std::string, F>> cols = {
                {"l2_energy", [](const LedgerRow& r) { return r.l2_energy; }},
                {"local_energy", [](const LedgerRow& r) { return r.local_energy; }},
                {"running_energy", [](const LedgerRow& r) { return r.running_energy(); }},
                {"compensator", [](const LedgerRow& r) { return r.compensator; }},
                {"residual", [](const LedgerRow& r) { return r.residual; }},
                {"ito_martingale", [](const LedgerRow& r) { return r.ito_martingale; }},
                {"qv_predicted", [](const LedgerRow& r) { return r.qv_predicted; }},
                {"qv_realized", [](const LedgerRow& r) { return r.qv_realized; }},
            };
            emit("ensemble_energy_" + d.test_functions[i].name + ".csv",
                 ensemble_table<LedgerRow>(rows, cols, [](const LedgerRow& r) { return r.t; }));
        }
        if (ok.front().vorticity) {
            std::vector<std::vector<VorticityRow>> rows;
            for (const auto& p : ok) rows.push_back(p.vorticity->rows);
            const double delta = d.delta;
            using F = std::function<double(const VorticityRow&)>;
            const std::vector<std::pair<std::string, F>> cols = {
                {"l1", [](const VorticityRow& r) { return r.l1; }},
                {"w_integral", [](const VorticityRow& r) { return r.w_integral; }},
                {"gradient_sum", [](const VorticityRow& r) { return r.gradient_sum; }},
                {"residual", [](const VorticityRow& r) { return r.residual; }},
                {"qv_predicted", [](const VorticityRow& r) { return r.qv_predicted; }},
                {"qv_realized", [](const VorticityRow& r) { return r.qv_realized; }},
                {"holder_margin", [delta](const VorticityRow& r) { return r.holder_margin(delta); }},
            };
            emit("ensemble_vorticity.csv",
                 ensemble_table<VorticityRow>(rows, cols, [](const VorticityRow& r) { return r.t; }));
        }
        for (std::size_t i = 0; i < ok.front().dissipation.size(); ++i) {
            const DRLedger& first = ok.front().dissipation[i];
            io::Table t;
            t.columns.emplace_back("t");
            for (double ell : first.ell_values) {
                t.columns.push_back("D_" + format17(ell) + "_mean");
                t.columns.push_back("D_" + format17(ell) + "_stderr");
            }
            t.columns.emplace_back("closure_mean");
            t.columns.emplace_back("closure_stderr");
            for (std::size_t j = 0; j < first.times.size(); ++j) {
                std::vector<double> row{first.times[j]};
                auto add = [&](const std::function<double(const DRLedger&)>& f) {
                    std::vector<double> v;
                    for (const auto& p : ok) v.push_back(f(p.dissipation[i]));
                    const auto s = summarize(v);
                    row.push_back(s.mean);
                    row.push_back(s.stderr_mean);
                };
                for (std::size_t k = 0; k < first.series.size(); ++k) add([&](const DRLedger& l) { return l.series[k][j]; });
                add([&](const DRLedger& l) { return l.closure[j]; });
                t.rows.push_back(std::move(row));
            }
            emit("ensemble_dr_" + d.test_functions[i].name + ".csv", t);
        }
    }
    std::string text = "name,criterion,status,statistic,note\n";
    for (const auto& o : summary.at("outcomes")) {
        const double st = o.at("statistic").is_number() ? o.at("statistic").get<double>() : NAN;
        text += csv_field(o.at("name").get<std::string>()) + "," + csv_field(o.at("criterion").get<std::string>()) + "," +
                o.at("status").get<std::string>() + "," + format17(st) + "," + csv_field(o.at("note").get<std::string>()) +
                "\n";
    }
    io::write_text_atomic(out / "outcomes.csv", text);
    files.push_back(out / "outcomes.csv");
    return files;
}

}  // namespace

std::vector<fs::path> write_report(const fs::path& dir) {
    const fs::path out = dir / "report";
    std::vector<fs::path> files;
    std::vector<VorticityBoundsReport> ladder;
    bool any = false;
    if (fs::exists(dir / "manifest.json")) {
        fs::create_directories(out);
        files = run_report(dir, out);
        any = true;
    }
    std::vector<fs::path> runs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());
    for (const auto& run : runs) {
        const json manifest = read_json(run / "manifest.json");
        const ExperimentConfig config = ExperimentConfig::from_json(manifest.at("config"));
        if (!config.diagnostics.vorticity) continue;
        std::vector<VorticityLedger> ens;
        for (const auto& e : manifest.at("paths")) {
            auto r = load_path(run / e.at("directory").get<std::string>(), config);
            if (r && !r->blown_up() && r->vorticity) ens.push_back(*r->vorticity);
        }
        if (!ens.empty()) ladder.push_back(vorticity_bounds_report(ens));
    }
    if (ladder.size() >= 2) {
        std::sort(ladder.begin(), ladder.end(), [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });
        const LadderTrend trend = epsilon_ladder_trend(ladder);
        fs::create_directories(out);
        io::Table t;
        t.columns = {"epsilon", "sup_l1_mean", "sup_l1_stderr", "gradient_time_mean", "gradient_time_stderr",
                     "min_holder_margin"};
        for (const auto& r : ladder)
            t.rows.push_back({r.epsilon, r.sup_l1.mean, r.sup_l1.stderr_mean, r.gradient_time.mean,
                              r.gradient_time.stderr_mean, r.min_holder_margin});
        io::write_table(out / "epsilon_ladder.csv", t);
        files.push_back(out / "epsilon_ladder.csv");
        const json lj{{"epsilon", trend.epsilon},
                      {"sup_l1", trend.sup_l1},
                      {"gradient_time", trend.gradient_time},
                      {"pass", trend.pass}};
        io::write_text_atomic(out / "epsilon_ladder.json", lj.dump(2) + "\n");
        files.push_back(out / "epsilon_ladder.json");
        any = true;
    }
    if (!any) throw ConfigError(dir.string() + ": no run manifest and no epsilon ladder of runs");
    json index = json::array();
    for (const auto& f : files) index.push_back(fs::relative(f, out).string());
    io::write_text_atomic(out / "report.json", json{{"source", dir.string()}, {"files", index}}.dump(2) + "\n");
    files.push_back(out / "report.json");
    return files;
}

}  // namespace lsns
