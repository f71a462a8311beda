#include "isingdetect/experiments.hpp"

#include "isingdetect/parallel.hpp"
#include "isingdetect/theory.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

namespace isingdetect {

using nlohmann::json;

std::vector<double> GridRange::points() const {
    if (!(step > 0.0)) throw ModelError(fmt::format("grid step must be > 0, got {}", step));
    if (hi < lo) throw ModelError(fmt::format("grid upper end {} below lower end {}", hi, lo));
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
    return out;
}

std::size_t sparsity_for(std::size_t n, double a) {
    const double s = std::round(std::pow(static_cast<double>(n), 1.0 - a));
    return std::clamp<std::size_t>(static_cast<std::size_t>(s), 1, n);
}

double strength_for(std::size_t n, double r) {
    if (!(r > 0.0)) throw ModelError(fmt::format("strength exponent must be > 0, got {}", r));
    return std::atanh(std::pow(static_cast<double>(n), -r));
}

void ExperimentConfig::validate() const {
    if (n < 2) throw ModelError("experiment needs n >= 2");
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ModelError("alpha must lie in (0, 0.5]");
    if (m_null < 100) throw ModelError("m_null must be >= 100");
    if (replicates < 1) throw ModelError("replicates must be >= 1");
    for (double a : a_grid.points())
        if (!(a > 0.0 && a < 1.0)) throw ModelError(fmt::format("sparsity exponent {} outside (0, 1)", a));
    for (double r : r_grid.points())
        if (!(r > 0.0)) throw ModelError(fmt::format("strength exponent {} must be > 0", r));
}

CouplingParams ExperimentConfig::coupling_params() const {
    CouplingParams p;
    p.kind = kind;
    p.n = n;
    p.theta = theta;
    p.edge_prob = edge_prob;
    p.degree = degree;
    if (kind == CouplingKind::erdos_renyi) p.seed = mix_seed({master_seed, 0xe7d05ULL});
    return p;
}

ExperimentConfig ExperimentConfig::full_scale(double theta, StatisticTag stat) {
    ExperimentConfig cfg;
    cfg.n = 1000;
    cfg.theta = theta;
    cfg.stat = stat;
    cfg.m_null = 500;
    cfg.replicates = 500;
    if (theta == 1.0) {
        cfg.a_grid = {0.05, 0.75, 0.05};
        cfg.r_grid = {0.05, 0.75, 0.05};
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON config

namespace {

GridRange parse_range(const json& j) {
    GridRange g;
    if (j.is_array()) {
        if (j.size() != 3) throw ModelError("grid range arrays must be [lo, hi, step]");
        g.lo = j[0].get<double>();
        g.hi = j[1].get<double>();
        g.step = j[2].get<double>();
    } else {
        g.lo = j.at("lo").get<double>();
        g.hi = j.at("hi").get<double>();
        g.step = j.at("step").get<double>();
    }
    return g;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig cfg) {
    std::ifstream in(path);
    if (!in) throw ModelError(fmt::format("cannot open config file {}", path.string()));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError(fmt::format("malformed config {}: {}", path.string(), e.what()));
    }
    try {
        if (j.contains("n")) cfg.n = j["n"].get<std::size_t>();
        if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
        if (j.contains("kind")) cfg.kind = parse_coupling_kind(j["kind"].get<std::string>());
        if (j.contains("stat")) cfg.stat = parse_statistic_tag(j["stat"].get<std::string>());
        if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
        if (j.contains("m_null")) cfg.m_null = j["m_null"].get<std::size_t>();
        if (j.contains("replicates")) cfg.replicates = j["replicates"].get<std::size_t>();
        if (j.contains("a_grid")) cfg.a_grid = parse_range(j["a_grid"]);
        if (j.contains("r_grid")) cfg.r_grid = parse_range(j["r_grid"]);
        if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("sampler")) cfg.sampler = parse_sampler_backend(j["sampler"].get<std::string>());
        if (j.contains("edge_prob")) cfg.edge_prob = j["edge_prob"].get<double>();
        if (j.contains("degree")) cfg.degree = j["degree"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw ModelError(fmt::format("bad field in config {}: {}", path.string(), e.what()));
    }
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    auto range = [](const GridRange& g) { return json{{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}}; };
    json j{{"n", cfg.n},
           {"theta", cfg.theta},
           {"kind", to_string(cfg.kind)},
           {"stat", to_string(cfg.stat)},
           {"alpha", cfg.alpha},
           {"m_null", cfg.m_null},
           {"replicates", cfg.replicates},
           {"a_grid", range(cfg.a_grid)},
           {"r_grid", range(cfg.r_grid)},
           {"master_seed", cfg.master_seed},
           {"sampler", to_string(cfg.sampler)}};
    if (cfg.edge_prob) j["edge_prob"] = *cfg.edge_prob;
    if (cfg.degree) j["degree"] = *cfg.degree;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Grid runner

std::optional<double> PowerSurface::boundary(double a) const {
    return detection_boundary(config.theta, a);
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t ai, std::size_t ri) {
    return mix_seed({master_seed, 0xce11ULL, ai, ri});
}

PowerSurface run_power_grid(const ExperimentConfig& config, std::size_t workers) {
    config.validate();
    PowerSurface surface;
    surface.config = config;
    const auto a_pts = config.a_grid.points();
    const auto r_pts = config.r_grid.points();
    surface.a_count = a_pts.size();
    surface.r_count = r_pts.size();
    surface.cells.resize(a_pts.size() * r_pts.size());
    for (std::size_t ai = 0; ai < a_pts.size(); ++ai) {
        for (std::size_t ri = 0; ri < r_pts.size(); ++ri) {
            PowerCell& c = surface.cells[ai * r_pts.size() + ri];
            c.a = a_pts[ai];
            c.r = r_pts[ri];
            c.s = sparsity_for(config.n, c.a);
            c.strength = strength_for(config.n, c.r);
        }
    }

    ModelSpec family;
    family.coupling = config.coupling_params();
    family.backend = config.sampler;

    std::optional<ReplicateModel> null_model;
    std::optional<CriticalValue> crit;
    std::string calibration_error;
    try {
        null_model.emplace(family.null_model());
        crit = calibrate(*null_model, null_model->statistic(config.stat), config.alpha, config.m_null,
                         config.master_seed, workers);
    } catch (const std::exception& e) {
        calibration_error = fmt::format("calibration failed: {}", e.what());
    }

    parallel_for(
        surface.cells.size(),
        [&](std::size_t idx) {
            PowerCell& c = surface.cells[idx];
            if (!crit) {
                c.error = calibration_error;
                c.p_hat = c.ci_halfwidth = c.crit = std::nan("");
                return;
            }
            c.crit = crit->value;
            try {
                ReplicateModel alt(family.with_signal(c.s, c.strength), null_model->coupling());
                const std::size_t ai = idx / surface.r_count;
                const std::size_t ri = idx % surface.r_count;
                auto est = estimate_power(alt, alt.statistic(config.stat), *crit, config.replicates,
                                          cell_seed(config.master_seed, ai, ri), 1);
                c.p_hat = est.p_hat;
                c.ci_halfwidth = est.ci_halfwidth;
            } catch (const std::exception& e) {
                c.error = e.what();
                c.p_hat = c.ci_halfwidth = std::nan("");
            }
        },
        workers);
    return surface;
}

// ---------------------------------------------------------------------------
// Output

std::string surface_csv(const PowerSurface& surface) {
    std::string out = "a,r,s,B,crit,p_hat,ci\n";
    for (const auto& c : surface.cells) {
        if (c.failed()) {
            out += fmt::format("{:.2f},{:.2f},{},{:.10g},{:.10g},FAILED,FAILED\n", c.a, c.r, c.s, c.strength, c.crit);
        } else {
            out += fmt::format("{:.2f},{:.2f},{},{:.10g},{:.10g},{:.6f},{:.6f}\n", c.a, c.r, c.s, c.strength, c.crit,
                               c.p_hat, c.ci_halfwidth);
        }
    }
    return out;
}

std::string boundary_csv(const PowerSurface& surface) {
    std::string out = "a,r_boundary\n";
    for (double a : surface.config.a_grid.points()) {
        const auto r = surface.boundary(a);
        out += r ? fmt::format("{:.2f},{:.10g}\n", a, *r) : fmt::format("{:.2f},undetectable\n", a);
    }
    return out;
}

std::string surface_pgm(const PowerSurface& surface) {
    std::string out = fmt::format("P2\n{} {}\n255\n", surface.a_count, surface.r_count);
    for (std::size_t row = 0; row < surface.r_count; ++row) {
        const std::size_t ri = surface.r_count - 1 - row;
        for (std::size_t ai = 0; ai < surface.a_count; ++ai) {
            const auto& c = surface.cell(ai, ri);
            const long level = c.failed() ? 0 : std::lround(255.0 * c.p_hat);
            out += fmt::format("{}", level);
            out += ai + 1 == surface.a_count ? '\n' : ' ';
        }
    }
    return out;
}

SurfaceFiles emit_surface(const PowerSurface& surface, const std::filesystem::path& prefix) {
    SurfaceFiles files;
    files.csv = prefix;
    files.csv += ".csv";
    files.boundary_csv = prefix;
    files.boundary_csv += "_boundary.csv";
    files.pgm = prefix;
    files.pgm += ".pgm";
    if (prefix.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(prefix.parent_path(), ec);
    }
    auto write = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ModelError(fmt::format("cannot write {}", p.string()));
        out << body;
        if (!out) throw ModelError(fmt::format("write failed for {}", p.string()));
    };
    write(files.csv, surface_csv(surface));
    write(files.boundary_csv, boundary_csv(surface));
    write(files.pgm, surface_pgm(surface));
    return files;
}

}  // namespace isingdetect
