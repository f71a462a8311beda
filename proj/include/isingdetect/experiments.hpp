#pragma once

// Power surfaces over the (sparsity exponent a, strength exponent r) plane:
// s = max(1, round(n^(1-a))), tanh(B) = n^(-r).

#include "isingdetect/model.hpp"
#include "isingdetect/samplers.hpp"
#include "isingdetect/statistics.hpp"
#include "isingdetect/testing.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace isingdetect {

/// Inclusive range lo, lo + step, ..., up to hi.
struct GridRange {
    double lo = 0.05;
    double hi = 0.5;
    double step = 0.05;

    std::vector<double> points() const;
};

struct ExperimentConfig {
    std::size_t n = 400;
    double theta = 0.5;
    CouplingKind kind = CouplingKind::curie_weiss;
    StatisticTag stat = StatisticTag::cond_centered;
    double alpha = 0.05;
    std::size_t m_null = 500;
    std::size_t replicates = 300;
    GridRange a_grid{0.05, 0.5, 0.05};
    GridRange r_grid{0.05, 0.5, 0.05};
    std::uint64_t master_seed = 42;
    SamplerBackend sampler = SamplerBackend::automatic;
    /// Extra coupling inputs for erdos_renyi / regular_circulant.
    std::optional<double> edge_prob;
    std::optional<std::size_t> degree;

    /// Throws ModelError on an unusable configuration.
    void validate() const;
    CouplingParams coupling_params() const;

    /// n = 1000, m_null = 500, replicates = 500.
    static ExperimentConfig full_scale(double theta, StatisticTag stat);
};

/// Reads a JSON object whose keys are ExperimentConfig field names; missing
/// keys keep the values already in `base`.
ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig base = {});
std::string experiment_config_to_json(const ExperimentConfig& cfg);

std::size_t sparsity_for(std::size_t n, double a);
double strength_for(std::size_t n, double r);

struct PowerCell {
    double a = 0.0;
    double r = 0.0;
    std::size_t s = 0;
    double strength = 0.0;
    double crit = 0.0;
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;
    /// Empty on success; otherwise the failure message and p_hat is NaN.
    std::string error;

    bool failed() const { return !error.empty(); }
};

struct PowerSurface {
    ExperimentConfig config;
    std::vector<PowerCell> cells;  ///< a-major: index = ai * |r_grid| + ri
    std::size_t a_count = 0;
    std::size_t r_count = 0;

    /// Theoretical boundary r(a), nullopt where no test is powerful.
    std::optional<double> boundary(double a) const;
    const PowerCell& cell(std::size_t ai, std::size_t ri) const { return cells[ai * r_count + ri]; }
};

/// Cell seed: hash of (master seed, a index, r index).
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t ai, std::size_t ri);

/// Calibrates once, then fills every cell. `workers` = 0 uses worker_count().
PowerSurface run_power_grid(const ExperimentConfig& config, std::size_t workers = 0);

struct SurfaceFiles {
    std::filesystem::path csv;
    std::filesystem::path boundary_csv;
    std::filesystem::path pgm;
};

std::string surface_csv(const PowerSurface& surface);
std::string boundary_csv(const PowerSurface& surface);
/// Plain PGM (P2), one pixel per cell, rows by descending r.
std::string surface_pgm(const PowerSurface& surface);

/// Writes <prefix>.csv, <prefix>_boundary.csv and <prefix>.pgm.
SurfaceFiles emit_surface(const PowerSurface& surface, const std::filesystem::path& prefix);

}  // namespace isingdetect
