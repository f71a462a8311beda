#pragma once

// Samplers for P(x) proportional to exp(x'Qx/2 + mu'x).
//
//   enumerate_model / sample_from_exact  exhaustive, n <= 20; the oracle for the rest
//   CurieWeissSampler                    exact, via the auxiliary variable Z
//   sample_cycle                         exact, forward filtering / backward sampling
//   GlauberSampler                       heat-bath single-site dynamics, any Q

#include "isingdetect/model.hpp"
#include "isingdetect/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace isingdetect {

inline constexpr std::size_t kMaxEnumerationSites = 20;

/// Exhaustive table of the model. Configurations are indexed by bit mask:
/// bit i set means x_i = +1.
struct ExactModel {
    std::size_t n = 0;
    double log_partition = 0.0;
    /// Entry k is P(#{i : x_i = +1} = k), i.e. P(sum x = 2k - n).
    std::vector<double> magnetization_pmf;
    double mean_total_spin = 0.0;
    double var_total_spin = 0.0;
    std::vector<double> config_probability;
    std::vector<double> config_cdf;

    /// P(sum x = total); zero for totals of the wrong parity or out of range.
    double pmf_at_total(long total) const;
};

ExactModel enumerate_model(const CouplingMatrix& q, const SignalVector& mu);

SpinConfiguration configuration_from_mask(std::uint64_t mask, std::size_t n);

/// E[x_i] and E[x_i x_j] under the enumerated law.
double exact_site_mean(const ExactModel& model, std::size_t i);
double exact_pair_correlation(const ExactModel& model, std::size_t i, std::size_t j);
/// E exp(lambda * sum x).
double exact_total_spin_mgf(const ExactModel& model, double lambda);

/// Inverse-CDF draw from the enumerated table. `q` and `mu` must be the inputs
/// the table was built from (only their dimensions are checked).
SpinConfiguration sample_from_exact(const ExactModel& model, const CouplingMatrix& q, const SignalVector& mu,
                                    Rng& rng);

/// Exact pmf of #{i : x_i = +1} for Curie-Weiss(n, theta) with field mu, any n.
/// The field takes two values (B on the support, 0 elsewhere), so the law is a
/// double sum over up-counts inside and outside the support.
std::vector<double> curie_weiss_magnetization_pmf(std::size_t n, double theta, const SignalVector& mu);

inline constexpr std::size_t kAuxGridPoints = 4096;
/// Tail cut for the grid: f(+-z*) - min f >= this.
inline constexpr double kAuxTailGap = 40.0;

/// Discretized density exp(-f(z)) of the Curie-Weiss auxiliary variable.
struct AuxGrid {
    double z_lo = 0.0;
    double z_hi = 0.0;
    std::vector<double> z_values;
    std::vector<double> potential;  ///< f(z) - min f on the grid
    std::vector<double> cdf;        ///< trapezoid cumulative mass, cdf.front() == 0, cdf.back() == 1
};

AuxGrid build_aux_grid(std::size_t n, double theta, const SignalVector& mu, std::size_t points = kAuxGridPoints);
/// Inverse CDF with linear interpolation between grid points.
double sample_aux_z(const AuxGrid& grid, Rng& rng);
double sample_aux_z(std::size_t n, double theta, const SignalVector& mu, Rng& rng);

/// Exact Curie-Weiss sampler (theta > 0): draw Z from its marginal, then the
/// spins independently with P(x_i = +1 | Z = z) = (1 + tanh(mu_i + theta z)) / 2.
class CurieWeissSampler {
public:
    CurieWeissSampler(std::size_t n, double theta, SignalVector mu);

    SpinConfiguration draw(Rng& rng) const;
    SpinConfiguration draw_given_z(double z, Rng& rng) const;
    double draw_z(Rng& rng) const { return sample_aux_z(grid_, rng); }

    const AuxGrid& grid() const { return grid_; }
    std::size_t size() const { return n_; }
    double theta() const { return theta_; }
    const SignalVector& signal() const { return mu_; }

private:
    std::size_t n_;
    double theta_;
    SignalVector mu_;
    AuxGrid grid_;
};

SpinConfiguration sample_curie_weiss(std::size_t n, double theta, const SignalVector& mu, Rng& rng);

/// Independent spins with P(x_i = +1) = (1 + tanh(mu_i)) / 2.
SpinConfiguration sample_independent(const SignalVector& mu, Rng& rng);

/// Exact sampler for the cycle model with Q_ij = theta/2 on neighbours (n >= 3).
/// The forward pass runs once at construction; each draw is n uniforms.
class CycleSampler {
public:
    CycleSampler(std::size_t n, double theta, const SignalVector& mu);
    SpinConfiguration draw(Rng& rng) const;

private:
    std::size_t n_;
    double first_up_ = 0.5;  ///< P(x_0 = +1)
    /// backward_[a][k][b]: P(x_k = +1 | x_0 = a, x_{k+1} = b), with slot
    /// n-1 conditioned on x_0 alone.
    std::array<std::vector<std::array<double, 2>>, 2> backward_;
};

SpinConfiguration sample_cycle(std::size_t n, double theta, const SignalVector& mu, Rng& rng);

enum class ScanOrder { systematic, random };

struct GlauberConfig {
    std::size_t burn_in_sweeps = 200;
    ScanOrder scan = ScanOrder::systematic;
    std::uint64_t seed = 0;

    /// max(200, 20 * ceil(log2 n)).
    static std::size_t default_sweeps(std::size_t n);
    static GlauberConfig defaults(std::size_t n, std::uint64_t seed = 0);
};

/// Heat-bath dynamics from a uniform random start; returns the state after
/// burn_in_sweeps sweeps of n updates. Approximate unless Q = 0.
class GlauberSampler {
public:
    GlauberSampler(std::shared_ptr<const CouplingMatrix> q, SignalVector mu, GlauberConfig cfg);

    SpinConfiguration draw(Rng& rng) const;

private:
    struct Neighbour {
        std::uint32_t site;
        double weight;
    };

    std::shared_ptr<const CouplingMatrix> q_;
    SignalVector mu_;
    GlauberConfig cfg_;
    std::vector<std::size_t> offsets_;  // CSR rows into neighbours_
    std::vector<Neighbour> neighbours_;
};

SpinConfiguration sample_glauber(const CouplingMatrix& q, const SignalVector& mu, const GlauberConfig& cfg, Rng& rng);
/// Uses Rng(cfg.seed).
SpinConfiguration sample_glauber(const CouplingMatrix& q, const SignalVector& mu, const GlauberConfig& cfg);

enum class SamplerBackend { automatic, curie_weiss_exact, cycle_exact, glauber, enumeration, independent };

std::string_view to_string(SamplerBackend backend);
SamplerBackend parse_sampler_backend(std::string_view name);

/// A prepared sampler for one (Q, mu) pair. `automatic` picks the exact
/// Curie-Weiss sampler for curie_weiss with theta > 0, independent spins when
/// Q = 0, the transfer-matrix sampler for cycles and Glauber otherwise.
class IsingSampler {
public:
    IsingSampler(std::shared_ptr<const CouplingMatrix> q, SignalVector mu,
                 SamplerBackend backend = SamplerBackend::automatic,
                 std::optional<GlauberConfig> glauber = std::nullopt);

    SpinConfiguration draw(Rng& rng) const;

    SamplerBackend backend() const { return backend_; }
    const CouplingMatrix& coupling() const { return *q_; }
    std::shared_ptr<const CouplingMatrix> coupling_ptr() const { return q_; }
    const SignalVector& signal() const { return mu_; }

private:
    struct Independent {};
    struct Enumerated {
        std::shared_ptr<const ExactModel> model;
    };

    std::shared_ptr<const CouplingMatrix> q_;
    SignalVector mu_;
    SamplerBackend backend_;
    std::variant<Independent, CycleSampler, Enumerated, CurieWeissSampler, GlauberSampler> impl_;
};

}  // namespace isingdetect
