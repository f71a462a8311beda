#include "isingdetect/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace isingdetect;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n = 60;
    cfg.theta = 0.5;
    cfg.stat = StatisticTag::sqrt_n_mean;
    cfg.m_null = 200;
    cfg.replicates = 20;
    cfg.master_seed = 5;
    return cfg;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ising_detect_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("grid points") {
    const GridRange g{0.05, 0.5, 0.05};
    const auto p = g.points();
    REQUIRE(p.size() == 10);
    CHECK(p.front() == doctest::Approx(0.05));
    CHECK(p.back() == doctest::Approx(0.5));
    CHECK(GridRange{0.05, 0.75, 0.05}.points().size() == 15);
    CHECK(GridRange{0.2, 0.2, 0.05}.points().size() == 1);
}

TEST_CASE("sparsity and strength maps") {
    CHECK(sparsity_for(400, 0.1) == 220);
    CHECK(sparsity_for(1000, 0.5) == 32);
    CHECK(sparsity_for(10, 0.999) == 1);
    CHECK(strength_for(400, 0.25) == doctest::Approx(std::atanh(std::pow(400.0, -0.25))));
    CHECK(std::tanh(strength_for(1000, 0.3)) == doctest::Approx(std::pow(1000.0, -0.3)));
    CHECK_THROWS_AS(strength_for(100, 0.0), ModelError);
    CHECK(cell_seed(1, 2, 3) == cell_seed(1, 2, 3));
    CHECK(cell_seed(1, 2, 3) != cell_seed(1, 3, 2));
}

TEST_CASE("configuration validation") {
    auto cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.n = 1;
    CHECK_THROWS_AS(cfg.validate(), ModelError);
    cfg = small_config();
    cfg.alpha = 0.7;
    CHECK_THROWS_AS(cfg.validate(), ModelError);
    cfg = small_config();
    cfg.m_null = 50;
    CHECK_THROWS_AS(cfg.validate(), ModelError);
    cfg = small_config();
    cfg.a_grid = {0.5, 1.0, 0.1};
    CHECK_THROWS_AS(cfg.validate(), ModelError);
}

TEST_CASE("full-scale defaults") {
    const auto cfg = ExperimentConfig::full_scale(1.0, StatisticTag::quarter_root_mean);
    CHECK(cfg.n == 1000);
    CHECK(cfg.m_null == 500);
    CHECK(cfg.replicates == 500);
    CHECK(cfg.r_grid.points().size() == 15);
    CHECK(ExperimentConfig::full_scale(0.5, StatisticTag::cond_centered).r_grid.points().size() == 10);
}

TEST_CASE("surface outputs have one row per cell") {
    const auto surface = run_power_grid(small_config());
    REQUIRE(surface.cells.size() == 100);
    const auto csv = surface_csv(surface);
    CHECK(count_lines(csv) == 101);
    CHECK(csv.rfind("a,r,s,B,crit,p_hat,ci\n", 0) == 0);
    for (const auto& c : surface.cells) {
        CHECK_FALSE(c.failed());
        CHECK(c.p_hat >= 0.0);
        CHECK(c.p_hat <= 1.0);
        CHECK(c.crit == surface.cells.front().crit);
    }
    const auto pgm = surface_pgm(surface);
    CHECK(pgm.rfind("P2\n10 10\n255\n", 0) == 0);
    CHECK(count_lines(boundary_csv(surface)) == 11);
}

TEST_CASE("single cell matches a direct power estimate") {
    auto cfg = small_config();
    cfg.a_grid = {0.2, 0.2, 0.05};
    cfg.r_grid = {0.1, 0.1, 0.05};
    cfg.replicates = 100;
    const auto surface = run_power_grid(cfg, 1);
    REQUIRE(surface.cells.size() == 1);

    ModelSpec family;
    family.coupling = cfg.coupling_params();
    const ReplicateModel null_model(family.null_model());
    const auto kind = null_model.statistic(cfg.stat);
    const auto crit = calibrate(null_model, kind, cfg.alpha, cfg.m_null, cfg.master_seed, 1);
    const ReplicateModel alt(family.with_signal(sparsity_for(cfg.n, 0.2), strength_for(cfg.n, 0.1)),
                             null_model.coupling());
    const auto est = estimate_power(alt, kind, crit, cfg.replicates, cell_seed(cfg.master_seed, 0, 0), 1);
    CHECK(surface.cells[0].crit == crit.value);
    CHECK(surface.cells[0].p_hat == est.p_hat);
}

TEST_CASE("pixels and boundary values") {
    PowerSurface s;
    s.config = small_config();
    s.config.a_grid = {0.2, 0.6, 0.4};
    s.config.r_grid = {0.1, 0.2, 0.1};
    s.a_count = 2;
    s.r_count = 2;
    for (double a : {0.2, 0.6})
        for (double r : {0.1, 0.2}) {
            PowerCell c;
            c.a = a;
            c.r = r;
            c.p_hat = a < 0.5 ? 1.0 : 0.0;
            s.cells.push_back(c);
        }
    // Rows by descending r, columns by ascending a.
    CHECK(surface_pgm(s) == "P2\n2 2\n255\n255 0\n255 0\n");
    CHECK(boundary_csv(s) == "a,r_boundary\n0.20,0.3\n0.60,undetectable\n");
    CHECK(*s.boundary(0.2) == doctest::Approx(0.3));
    CHECK_FALSE(s.boundary(0.6).has_value());

    s.config.theta = 1.0;
    CHECK(*s.boundary(0.2) == doctest::Approx(0.55));
}

TEST_CASE("failed calibration marks every cell") {
    auto cfg = small_config();
    cfg.kind = CouplingKind::cycle;
    cfg.sampler = SamplerBackend::curie_weiss_exact;
    cfg.a_grid = {0.2, 0.3, 0.1};
    cfg.r_grid = {0.1, 0.1, 0.1};
    const auto surface = run_power_grid(cfg, 1);
    REQUIRE(surface.cells.size() == 2);
    for (const auto& c : surface.cells) {
        CHECK(c.failed());
        CHECK(std::isnan(c.p_hat));
    }
    CHECK(surface_csv(surface).find("FAILED,FAILED") != std::string::npos);
    CHECK(surface_pgm(surface) == "P2\n2 1\n255\n0 0\n");
}

TEST_CASE("surface is identical across thread settings") {
    auto cfg = small_config();
    cfg.a_grid = {0.1, 0.4, 0.1};
    cfg.r_grid = {0.1, 0.4, 0.1};
    const char* old = std::getenv("ISING_DETECT_THREADS");
    const std::string saved = old ? old : "";
    std::vector<std::string> csvs;
    for (const char* t : {"1", "3", "0"}) {
        setenv("ISING_DETECT_THREADS", t, 1);
        csvs.push_back(surface_csv(run_power_grid(cfg)));
    }
    if (old)
        setenv("ISING_DETECT_THREADS", saved.c_str(), 1);
    else
        unsetenv("ISING_DETECT_THREADS");
    CHECK(csvs[0] == csvs[1]);
    CHECK(csvs[0] == csvs[2]);
}

TEST_CASE("json round trip and overrides") {
    auto cfg = small_config();
    cfg.theta = 1.5;
    cfg.kind = CouplingKind::erdos_renyi;
    cfg.edge_prob = 0.3;
    cfg.stat = StatisticTag::cond_centered;
    cfg.r_grid = {0.1, 0.4, 0.1};
    const auto dir = temp_dir("json");
    const auto path = dir / "cfg.json";
    std::ofstream(path) << experiment_config_to_json(cfg);
    const auto back = load_experiment_config(path);
    CHECK(back.n == cfg.n);
    CHECK(back.theta == cfg.theta);
    CHECK(back.kind == cfg.kind);
    CHECK(back.stat == cfg.stat);
    CHECK(back.edge_prob == cfg.edge_prob);
    CHECK(back.r_grid.points() == cfg.r_grid.points());
    CHECK(back.master_seed == cfg.master_seed);

    const auto partial = dir / "partial.json";
    std::ofstream(partial) << R"({"n": 123, "r_grid": [0.05, 0.75, 0.05]})";
    const auto merged = load_experiment_config(partial, cfg);
    CHECK(merged.n == 123);
    CHECK(merged.r_grid.points().size() == 15);
    CHECK(merged.theta == 1.5);

    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(load_experiment_config(bad), ModelError);
    CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), ModelError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_surface writes three files") {
    auto cfg = small_config();
    cfg.a_grid = {0.1, 0.2, 0.1};
    cfg.r_grid = {0.1, 0.2, 0.1};
    const auto surface = run_power_grid(cfg, 1);
    const auto dir = temp_dir("emit");
    const auto files = emit_surface(surface, dir / "nested" / "fig");
    CHECK(std::filesystem::exists(files.csv));
    CHECK(std::filesystem::exists(files.boundary_csv));
    CHECK(std::filesystem::exists(files.pgm));
    std::stringstream ss;
    ss << std::ifstream(files.csv).rdbuf();
    CHECK(ss.str() == surface_csv(surface));
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
