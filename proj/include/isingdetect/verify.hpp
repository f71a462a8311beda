#pragma once

// Self-checks: oracle comparisons, goodness of fit against the limit laws,
// closed-form identities and reproducibility. Each check reports the measured
// quantity next to the threshold it was held to.

#include "isingdetect/experiments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace isingdetect {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    std::size_t failures() const;
    /// One line per check: PASS/FAIL, name, measured, threshold, detail.
    std::string format() const;
};

/// Largest TV distance between sampled and enumerated magnetization pmfs over
/// the small-n battery, one entry per sampler family.
std::vector<CheckResult> check_oracle_tv(std::size_t draws, std::uint64_t seed);

/// KS distances for theta = 0.5, 1 and 1.5 at size n.
std::vector<CheckResult> check_limit_laws(std::size_t n, std::size_t draws, std::uint64_t seed);

/// Max relative error of cycle_mgf against enumeration, n = 3..14.
CheckResult check_cycle_mgf();

/// Number of (model, t) pairs where the empirical tail P(|f| >= t) exceeds
/// the concentration bound.
CheckResult check_concentration(std::size_t n, std::size_t draws, std::uint64_t seed);

struct PanelSpec {
    double theta = 0.5;
    StatisticTag stat = StatisticTag::cond_centered;
    double margin = 0.15;
    double high_power = 0.85;
    double low_power = 0.30;
};

/// Desk-scale power panel config: n = 400, m_null = 500, replicates = 300.
ExperimentConfig panel_config(const PanelSpec& panel, std::uint64_t seed);
/// Counts cells that miss the power margins around the boundary line.
CheckResult check_panel(const PowerSurface& surface, const PanelSpec& panel);

/// Exact power of each cell of a Curie-Weiss surface at the cell's critical
/// value, from curie_weiss_magnetization_pmf.
std::vector<double> exact_power_surface(const PowerSurface& surface);
/// Tests each simulated p_hat against Binomial(replicates, exact power).
CheckResult check_panel_against_exact(const PowerSurface& surface);

/// Worst |level - alpha| in units of the binomial standard error, where each
/// of `trials` rejections comes from its own calibration.
CheckResult check_level(std::size_t n, std::size_t m_null, std::size_t trials, std::uint64_t seed);

std::vector<CheckResult> check_theory_identities(std::uint64_t seed);

/// Runs the given panel with ISING_DETECT_THREADS set to each value and
/// compares the CSV bytes.
CheckResult check_determinism(const ExperimentConfig& config, const std::vector<std::string>& thread_settings);

enum class VerifyScale { quick, full };

/// quick: oracle TV, cycle MGF and closed-form identities.
/// full: adds limit-law fits, the concentration sweep and level control.
Report verify_suite(VerifyScale scale, std::uint64_t seed = 20240607);

}  // namespace isingdetect
