#pragma once

// Monte Carlo calibration and power estimation for the magnetization tests.
//
// Every replicate draws from its own stream, stream_rng(seed, purpose, index),
// so estimates do not depend on how replicates are scheduled across threads.

#include "isingdetect/model.hpp"
#include "isingdetect/samplers.hpp"
#include "isingdetect/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace isingdetect {

/// Stream purposes passed as the `cell` argument of stream_rng.
inline constexpr std::uint64_t kCalibrationStream = 0xca11b4a7eULL;
inline constexpr std::uint64_t kPowerStream = 0x90bea1ULL;
inline constexpr std::uint64_t kTypeOneStream = 0x7e1ULL;

/// A model family plus an alternative: mu_i = B on s sites.
struct ModelSpec {
    CouplingParams coupling;
    std::size_t sparsity = 0;
    double strength = 0.0;
    /// Defaults to prefix for Curie-Weiss (exchangeable) and uniform_random,
    /// redrawn per replicate, for every other kind.
    std::optional<Placement> placement;
    SamplerBackend backend = SamplerBackend::automatic;
    std::optional<GlauberConfig> glauber;

    Placement effective_placement() const;
    bool is_null() const { return sparsity == 0 || strength == 0.0; }
    ModelSpec null_model() const;
    ModelSpec with_signal(std::size_t s, double b) const;
};

/// A ModelSpec with its coupling built once and, when the signal does not
/// move between replicates, its sampler prepared once.
class ReplicateModel {
public:
    explicit ReplicateModel(ModelSpec spec);
    ReplicateModel(ModelSpec spec, std::shared_ptr<const CouplingMatrix> q);

    SpinConfiguration draw(Rng& rng) const;

    const ModelSpec& spec() const { return spec_; }
    std::shared_ptr<const CouplingMatrix> coupling() const { return q_; }
    std::size_t size() const { return q_->size(); }
    StatisticKind statistic(StatisticTag tag) const { return StatisticKind::make(tag, q_); }

private:
    ModelSpec spec_;
    std::shared_ptr<const CouplingMatrix> q_;
    std::optional<IsingSampler> fixed_;
};

struct CriticalValue {
    StatisticTag stat_kind = StatisticTag::sqrt_n_mean;
    double alpha = 0.05;
    std::size_t m_null = 0;
    double value = 0.0;
    std::uint64_t seed = 0;
    /// The recorded null statistics, ascending.
    std::vector<double> null_sample;
};

/// 1-based rank of the order statistic used as threshold: ceil((1 - alpha) m).
std::size_t critical_rank(double alpha, std::size_t m_null);

/// Threshold = critical_rank-th smallest of m_null null statistics.
/// Requires 0 < alpha <= 0.5, m_null >= 100 and a signal-free model.
CriticalValue calibrate(const ReplicateModel& null_model, const StatisticKind& kind, double alpha, std::size_t m_null,
                        std::uint64_t seed, std::size_t workers = 0);

enum class Decision { retain, reject };

/// Reject iff statistic >= crit.value.
Decision decide(double statistic, const CriticalValue& crit);
Decision run_test(const SpinConfiguration& x, const StatisticKind& kind, const CriticalValue& crit);

struct PowerEstimate {
    std::size_t rejections = 0;
    std::size_t replicates = 0;
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;  ///< 1.96 sqrt(p (1 - p) / replicates)

    static PowerEstimate from_counts(std::size_t rejections, std::size_t replicates);
    double standard_error() const;
};

PowerEstimate estimate_power(const ReplicateModel& alternative, const StatisticKind& kind, const CriticalValue& crit,
                             std::size_t replicates, std::uint64_t seed, std::size_t workers = 0);

struct RiskEstimate {
    double type_one = 0.0;
    double type_two = 0.0;
    double risk = 0.0;
    PowerEstimate level;
    PowerEstimate power;
    CriticalValue crit;
};

/// Calibrates on the null of `family`, then estimates the type I error on
/// fresh null draws and the type II error at mu_i = B on s placed sites.
RiskEstimate estimate_risk(const ModelSpec& family, std::size_t s, double strength, StatisticTag tag, double alpha,
                           std::size_t m_null, std::size_t replicates, std::uint64_t seed, std::size_t workers = 0);

}  // namespace isingdetect
