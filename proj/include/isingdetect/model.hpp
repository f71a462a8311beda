#pragma once

// Coupling matrices, signal vectors and spin configurations for the Ising model
//
//     P(x) = exp(x'Qx / 2 + mu'x) / Z(Q, mu),   x in {-1, +1}^n,
//
// with Q symmetric and hollow.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace isingdetect {

class Rng;

/// Raised for out-of-contract arguments throughout the library.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class CouplingKind { curie_weiss, cycle, regular_circulant, erdos_renyi, custom };

std::string_view to_string(CouplingKind kind);
/// Accepts the enum names and their dash-separated spellings ("curie-weiss").
CouplingKind parse_coupling_kind(std::string_view name);

/// Inputs to build_coupling. `edge_prob` and `seed` are used by erdos_renyi,
/// `degree` by regular_circulant.
struct CouplingParams {
    CouplingKind kind = CouplingKind::curie_weiss;
    std::size_t n = 0;
    double theta = 0.0;
    std::optional<double> edge_prob;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> degree;
};

/// Dense symmetric hollow n x n matrix, row-major. Immutable once built.
class CouplingMatrix {
public:
    /// Validates symmetry, zero diagonal and finiteness; tags the result `custom`.
    static CouplingMatrix from_entries(std::size_t n, std::vector<double> entries);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
    std::span<const double> entries() const { return entries_; }

    CouplingKind kind() const { return kind_; }
    double theta() const { return theta_; }
    std::optional<std::uint64_t> gen_seed() const { return gen_seed_; }
    std::optional<std::size_t> degree() const { return degree_; }

    /// c * Q, retagged `custom` unless c == 1.
    CouplingMatrix scaled(double c) const;

    /// One row per line, comma separated.
    std::string to_csv() const;

private:
    friend CouplingMatrix build_coupling(const CouplingParams& params);

    CouplingMatrix(std::size_t n, std::vector<double> entries, CouplingKind kind, double theta)
        : n_(n), entries_(std::move(entries)), kind_(kind), theta_(theta) {}

    std::size_t n_ = 0;
    std::vector<double> entries_;
    CouplingKind kind_ = CouplingKind::custom;
    double theta_ = 0.0;
    std::optional<std::uint64_t> gen_seed_;
    std::optional<std::size_t> degree_;
};

/// Builds one of the four graph families:
///   curie_weiss        Q_ij = theta / n for all i != j
///   cycle              Q_ij = theta / 2 when |i - j| = 1 mod n
///   regular_circulant  Q = theta / d * G, G joining i to i +- 1..d/2 mod n
///   erdos_renyi        Q = theta / (n p) * G, G_ij ~ Bernoulli(p) for i < j
CouplingMatrix build_coupling(const CouplingParams& params);

/// Regularity functionals of a coupling matrix.
struct ConditionReport {
    double inf_norm = 0.0;           ///< max_i sum_j |Q_ij|
    double frob_sq = 0.0;            ///< sum_ij Q_ij^2
    double rowsum_dispersion = 0.0;  ///< || Q1 - rho* 1 ||^2
    double rho_star = 0.0;           ///< 1'Q1 / n
};

ConditionReport condition_report(const CouplingMatrix& q);

/// A point of {-1, +1}^n.
class SpinConfiguration {
public:
    SpinConfiguration() = default;
    /// Throws ModelError if any entry is not exactly -1 or +1.
    explicit SpinConfiguration(std::vector<std::int8_t> spins);

    static SpinConfiguration constant(std::size_t n, int value);

    std::size_t size() const { return spins_.size(); }
    bool empty() const { return spins_.empty(); }
    int operator[](std::size_t i) const { return spins_[i]; }
    std::span<const std::int8_t> spins() const { return spins_; }
    /// Sum of spins.
    long total() const;
    SpinConfiguration flipped() const;

    bool operator==(const SpinConfiguration&) const = default;

private:
    std::vector<std::int8_t> spins_;
};

/// m_i(x) = sum_j Q_ij x_j. Curie-Weiss and cycle couplings take O(n) paths.
std::vector<double> local_fields(const CouplingMatrix& q, const SpinConfiguration& x);

enum class Placement { prefix, uniform_random };

std::string_view to_string(Placement placement);
Placement parse_placement(std::string_view name);

/// External field mu with mu_i = B on a support of size s and zero elsewhere.
class SignalVector {
public:
    /// Zero field on n sites.
    static SignalVector zero(std::size_t n) { return SignalVector(n, {}, 0.0); }

    /// `support` is sorted and deduplicated; throws on out-of-range indices or B < 0.
    SignalVector(std::size_t n, std::vector<std::size_t> support, double strength);

    std::size_t size() const { return fields_.size(); }
    std::span<const std::size_t> support() const { return support_; }
    std::size_t sparsity() const { return support_.size(); }
    double strength() const { return strength_; }
    double operator[](std::size_t i) const { return fields_[i]; }
    std::span<const double> fields() const { return fields_; }
    bool is_zero() const { return support_.empty() || strength_ == 0.0; }

    /// A(mu) = (1/n) sum_i tanh(mu_i) = (s/n) tanh(B).
    double signal_mass() const;

private:
    std::vector<std::size_t> support_;
    double strength_ = 0.0;
    std::vector<double> fields_;
};

/// Prefix placement uses sites {0, ..., s-1}; uniform_random needs a seed.
SignalVector make_signal(std::size_t n, std::size_t s, double strength, Placement placement,
                         std::optional<std::uint64_t> seed = std::nullopt);

/// Uniformly random support of size s drawn from `rng`.
SignalVector make_random_signal(std::size_t n, std::size_t s, double strength, Rng& rng);

}  // namespace isingdetect
