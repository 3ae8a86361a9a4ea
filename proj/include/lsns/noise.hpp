#pragma once

#include <string>
#include <vector>

#include "lsns/field.hpp"

namespace lsns {

enum class NoiseKind { additive, linear_multiplicative, cosine };

NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(NoiseKind kind);

/// Number of noise terms kept at mollifier scale epsilon: floor(1/epsilon) + 1.
struct TruncationLevel {
    double epsilon = 0.0;
    int N = 0;

    /// Throws ConfigError unless epsilon > 0.
    static TruncationLevel from_epsilon(double epsilon);
};

/// Coefficient sequence c_k = amplitude * decay^(k-1) for k <= terms (terms == 0: unbounded).
///
/// additive:              sigma_k(u) = c_k e_k
/// linear_multiplicative: sigma_k(u) = c_k s_k u
/// cosine:                sigma_k(u) = c_k e_k cos(k sqrt(1 + |u|^2))
///
/// e_k is a fixed real divergence-free basis with ||e_k||_{L2} = 1 built from low
/// wavevectors (two polarisations, cos and sin), s_1 = 1 and s_k (k >= 2) a real
/// scalar basis with ||s_k||_{L2} = 1.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::additive;
    double amplitude = 0.0;
    double decay = 0.5;
    int terms = 0;
    int max_k = 64;
};

struct RatioReport {
    double empirical = 0.0;
    double analytic = 0.0;
    bool pass = false;
    std::string note;
};

struct TailCurve {
    std::vector<int> N;
    std::vector<double> empirical;
    std::vector<double> analytic;
    bool nonincreasing = false;
    bool pass = false;
    std::string note;
};

class NoiseModel {
public:
    NoiseModel() = default;
    /// Throws ConfigError on a bad spec (negative amplitude, decay outside (0, 1],
    /// max_k outside [1, 64], unbounded terms with decay 1).
    NoiseModel(const NoiseSpec& spec, const Grid& grid);

    const NoiseSpec& spec() const noexcept { return spec_; }
    NoiseKind kind() const noexcept { return spec_.kind; }
    const Grid& grid() const noexcept { return grid_; }
    int max_k() const noexcept { return spec_.max_k; }
    bool active() const noexcept { return spec_.amplitude != 0.0; }

    double coefficient(int k) const;

    /// sigma_k(u) on the M-grid (pointwise kinds are sampled, multiplied and transformed
    /// back without truncation). Throws ConfigError for k outside [1, max_k].
    SpectralField eval(int k, const SpectralField& u) const;
    /// sigma_1(u) .. sigma_n(u), sharing the physical evaluation of u.
    std::vector<SpectralField> eval_all(int n, const SpectralField& u) const;

    /// Unit basis fields used by the model (before scaling by c_k).
    static SpectralField vector_basis(const Grid& grid, int k);
    static ScalarField scalar_basis(const Grid& grid, int k);

    /// Per-k constant of the linear growth bound; its sum over k bounds the ratio.
    double growth_weight(int k) const;
    /// Per-k constant of the vorticity control bound.
    double vorticity_weight(int k) const;
    /// sum_{k <= n} growth_weight(k) and the tail sum_{k > n}, the latter over the whole
    /// sequence (beyond max_k included) in closed form.
    double growth_bound(int n) const;
    double growth_tail(int n) const;
    double vorticity_bound(int n) const;

private:
    NoiseSpec spec_;
    Grid grid_;
};

/// max over samples of sum_{k<=N} ||sigma_k(u)||^2 / (1 + ||u||^2).
/// Throws ConfigError for an empty sample set and ContractViolation for a
/// sample that is not divergence free.
RatioReport validate_linear_growth(const NoiseModel& model, const std::vector<SpectralField>& samples, int N);

/// For each N: max over samples of sum_{N<k<=max_k} ||sigma_k(u)||^2 / (1 + ||u||^2).
TailCurve validate_tail_decay(const NoiseModel& model, const std::vector<SpectralField>& samples,
                              const std::vector<int>& N_values);

/// max over samples of sum_{k<=N} ||curl sigma_k(u)||^2 / (1 + ||grad u||^2).
RatioReport validate_vorticity_control(const NoiseModel& model, const std::vector<SpectralField>& samples, int N);

}  // namespace lsns
