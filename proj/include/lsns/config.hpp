#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsns/dissipation.hpp"
#include "lsns/integrator.hpp"
#include "lsns/noise.hpp"
#include "lsns/test_function.hpp"

namespace lsns {

inline constexpr int config_schema_version = 1;

enum class InitialKind { taylor_green, shear, random, zero };
InitialKind parse_initial_kind(const std::string& name);
std::string to_string(InitialKind kind);

struct InitialSpec {
    InitialKind kind = InitialKind::taylor_green;
    double amplitude = 1.0;  // energy for the random kind
    int wavenumber = 1;      // shear
    std::uint64_t seed = 0;  // random
    double slope = 2.0;      // random
    SpectralField build(const Grid& grid) const;
};

/// Raised-cosine bump with an optional temporal cut-off (a, b, ramp).
struct TestFunctionSpec {
    std::string name = "bump";
    int power = 2;
    std::array<double, 3> centre{0.5, 0.5, 0.5};
    std::optional<std::array<double, 3>> cutoff;
    TestFunction build(const Grid& grid) const;
};

struct DiagnosticsSpec {
    bool energy = true;
    bool vorticity = true;
    bool dissipation = false;
    std::vector<TestFunctionSpec> test_functions{TestFunctionSpec{}};
    /// Empty selects DRConfig::default_for(grid).
    std::vector<double> ell_values;
    MollifierKind alpha_kind = MollifierKind::paper_bump;
    double delta = 0.5;
    /// Conditioning time of the martingale tests as a fraction of T.
    double s_fraction = 0.5;

    DRConfig dr_config(const Grid& grid) const;
    nlohmann::json to_json() const;
    /// Same schema as the "diagnostics" block of a config; `path` prefixes error messages.
    static DiagnosticsSpec from_json(const nlohmann::json& j, const std::string& path = "diagnostics");
};

struct EnsembleSpec {
    int paths = 1;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct OutputSpec {
    std::string directory = "lsns-out";
    /// Snapshot stride in steps; ledgers are always computed at every step.
    int stride = 1;
    bool snapshots = true;
    bool csv = true;
};

struct ExperimentConfig {
    int schema_version = config_schema_version;
    RunParams run;  // seed and path_id come from the ensemble block
    NoiseSpec noise;
    InitialSpec initial;
    DiagnosticsSpec diagnostics;
    EnsembleSpec ensemble;
    OutputSpec output;

    /// Throws ConfigError naming the offending schema path, e.g. "run.dt: must be > 0".
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;
    /// Checks every block and every cross-reference; throws ConfigError with the schema path.
    void validate() const;
    /// crc32 of the canonical serialization, as 8 hex digits.
    std::string hash() const;

    /// Stride-1 run parameters of one path.
    RunParams path_params(std::uint32_t path_id) const;
    NoiseModel noise_model() const;
};

/// Version string compiled into outputs.
std::string code_version();

}  // namespace lsns
