// ising-detect: command-line front end.

#include "isingdetect/diagnostics.hpp"
#include "isingdetect/experiments.hpp"
#include "isingdetect/theory.hpp"
#include "isingdetect/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace isingdetect;

namespace {

struct ModelFlags {
    std::string kind = "curie-weiss";
    std::size_t n = 400;
    double theta = 0.5;
    std::optional<double> edge_prob;
    std::optional<std::size_t> degree;
    std::uint64_t graph_seed = 1;
    std::string backend = "automatic";

    void attach(CLI::App* app) {
        app->add_option("--kind", kind, "curie-weiss | cycle | regular-circulant | erdos-renyi")->capture_default_str();
        app->add_option("--n", n, "number of sites")->capture_default_str();
        app->add_option("--theta", theta, "coupling strength")->capture_default_str();
        app->add_option("--edge-prob", edge_prob, "edge probability (erdos-renyi)");
        app->add_option("--degree", degree, "even degree (regular-circulant)");
        app->add_option("--graph-seed", graph_seed, "seed for the random graph")->capture_default_str();
        app->add_option("--backend", backend, "automatic | curie-weiss-exact | cycle-exact | glauber | enumeration")
            ->capture_default_str();
    }

    CouplingParams params() const {
        CouplingParams p;
        p.kind = parse_coupling_kind(kind);
        p.n = n;
        p.theta = theta;
        p.edge_prob = edge_prob;
        p.degree = degree;
        if (p.kind == CouplingKind::erdos_renyi) p.seed = graph_seed;
        return p;
    }

    ModelSpec spec() const {
        ModelSpec s;
        s.coupling = params();
        s.backend = parse_sampler_backend(backend);
        return s;
    }
};

std::string join_spins(const SpinConfiguration& x) {
    std::string line;
    line.reserve(3 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) line += ' ';
        line += x[i] > 0 ? "1" : "-1";
    }
    return line;
}

SpinConfiguration parse_spins(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::int8_t> spins;
    int v = 0;
    while (in >> v) spins.push_back(static_cast<std::int8_t>(v == 1 ? 1 : v == -1 ? -1 : 0));
    return SpinConfiguration(std::move(spins));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling, calibration and power studies for sparse signals on Ising models"};
    app.require_subcommand(1);

    // sample ---------------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "draw configurations");
    ModelFlags sample_model;
    sample_model.attach(sample);
    std::size_t sample_s = 0;
    double sample_b = 0.0;
    std::string sample_placement;
    std::size_t draws = 10;
    std::uint64_t sample_seed = 1;
    bool histogram = false;
    std::string dump_coupling;
    sample->add_option("--s", sample_s, "signal sparsity")->capture_default_str();
    sample->add_option("--B", sample_b, "signal strength")->capture_default_str();
    sample->add_option("--placement", sample_placement, "prefix | uniform-random");
    sample->add_option("--draws", draws, "number of configurations")->capture_default_str();
    sample->add_option("--seed", sample_seed, "rng seed")->capture_default_str();
    sample->add_flag("--histogram", histogram, "emit value,count of the total spin instead of configurations");
    sample->add_option("--dump-coupling", dump_coupling, "write the coupling matrix as CSV to this file");

    // stat -----------------------------------------------------------------
    auto* stat = app.add_subcommand("stat", "evaluate a statistic on configurations read from a file");
    ModelFlags stat_model;
    stat_model.attach(stat);
    std::string stat_input = "-";
    std::string stat_name = "cond-centered";
    stat->add_option("--input", stat_input, "file with one configuration per line, '-' for stdin")->capture_default_str();
    stat->add_option("--stat", stat_name, "sqrt-n-mean | quarter-root-mean | cond-centered")->capture_default_str();

    // theory ---------------------------------------------------------------
    auto* theory = app.add_subcommand("theory", "reference quantities for one theta");
    double theory_theta = 0.5;
    std::optional<std::size_t> theory_n;
    double theory_step = 0.05;
    theory->add_option("--theta", theory_theta, "coupling strength")->capture_default_str();
    theory->add_option("--n", theory_n, "size for the Curie-Weiss concentration bound");
    theory->add_option("--step", theory_step, "sparsity exponent step for the boundary")->capture_default_str();

    // calibrate / power ----------------------------------------------------
    auto add_test_flags = [](CLI::App* cmd, ModelFlags& model, std::string& stat_tag, double& alpha,
                             std::size_t& m_null, std::uint64_t& seed) {
        model.attach(cmd);
        cmd->add_option("--stat", stat_tag, "statistic")->capture_default_str();
        cmd->add_option("--alpha", alpha, "level")->capture_default_str();
        cmd->add_option("--m-null", m_null, "null replicates for calibration")->capture_default_str();
        cmd->add_option("--seed", seed, "master seed")->capture_default_str();
    };
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Monte Carlo critical value");
    ModelFlags cal_model;
    std::string cal_stat = "cond-centered";
    double cal_alpha = 0.05;
    std::size_t cal_m_null = 500;
    std::uint64_t cal_seed = 42;
    add_test_flags(calibrate_cmd, cal_model, cal_stat, cal_alpha, cal_m_null, cal_seed);

    auto* power_cmd = app.add_subcommand("power", "power at one (s, B)");
    ModelFlags pow_model;
    std::string pow_stat = "cond-centered";
    double pow_alpha = 0.05;
    std::size_t pow_m_null = 500;
    std::uint64_t pow_seed = 42;
    std::size_t pow_replicates = 300;
    std::optional<std::size_t> pow_s;
    std::optional<double> pow_b;
    std::optional<double> pow_a;
    std::optional<double> pow_r;
    add_test_flags(power_cmd, pow_model, pow_stat, pow_alpha, pow_m_null, pow_seed);
    power_cmd->add_option("--replicates", pow_replicates, "alternative replicates")->capture_default_str();
    power_cmd->add_option("--s", pow_s, "signal sparsity");
    power_cmd->add_option("--B", pow_b, "signal strength");
    power_cmd->add_option("--a", pow_a, "sparsity exponent: s = round(n^(1-a))");
    power_cmd->add_option("--r", pow_r, "strength exponent: tanh(B) = n^-r");

    // figure1 --------------------------------------------------------------
    auto* figure = app.add_subcommand("figure1", "power surface over the (a, r) grid");
    std::string fig_config;
    std::optional<double> fig_theta;
    std::optional<std::size_t> fig_n;
    std::optional<std::string> fig_stat;
    std::optional<std::string> fig_kind;
    std::optional<double> fig_alpha;
    std::optional<std::size_t> fig_m_null;
    std::optional<std::size_t> fig_replicates;
    std::optional<double> fig_step;
    std::optional<std::uint64_t> fig_seed;
    std::optional<std::string> fig_sampler;
    bool fig_full = false;
    std::string fig_out = "results/fig1";
    figure->add_option("--config", fig_config, "JSON file with ExperimentConfig fields");
    figure->add_flag("--full-scale", fig_full, "start from n = 1000, m_null = replicates = 500");
    figure->add_option("--theta", fig_theta);
    figure->add_option("--n", fig_n);
    figure->add_option("--kind", fig_kind);
    figure->add_option("--stat", fig_stat);
    figure->add_option("--alpha", fig_alpha);
    figure->add_option("--m-null", fig_m_null);
    figure->add_option("--replicates", fig_replicates);
    figure->add_option("--step", fig_step, "grid step for both exponents");
    figure->add_option("--seed", fig_seed);
    figure->add_option("--sampler", fig_sampler);
    figure->add_option("--out", fig_out, "output prefix")->capture_default_str();

    // verify ---------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run the self-check suite");
    std::string scale = "quick";
    std::uint64_t verify_seed = 20240607;
    verify->add_option("--scale", scale, "quick | full")->capture_default_str();
    verify->add_option("--seed", verify_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) {
            auto q = std::make_shared<const CouplingMatrix>(build_coupling(sample_model.params()));
            if (!dump_coupling.empty()) {
                std::ofstream out(dump_coupling);
                if (!out) throw ModelError("cannot write " + dump_coupling);
                out << q->to_csv();
            }
            Placement placement = q->kind() == CouplingKind::curie_weiss ? Placement::prefix : Placement::uniform_random;
            if (!sample_placement.empty()) placement = parse_placement(sample_placement);
            SignalVector mu = make_signal(q->size(), sample_s, sample_b, placement, mix_seed({sample_seed, 0x51ULL}));
            IsingSampler sampler(q, std::move(mu), parse_sampler_backend(sample_model.backend),
                                 GlauberConfig::defaults(q->size(), sample_seed));
            Rng rng(sample_seed);
            if (histogram) {
                MagnetizationHistogram hist(q->size());
                for (std::size_t d = 0; d < draws; ++d) hist.add(sampler.draw(rng));
                std::cout << "value,count\n";
                const long n = static_cast<long>(q->size());
                for (std::size_t k = 0; k < hist.counts().size(); ++k)
                    if (hist.counts()[k]) std::cout << fmt::format("{},{}\n", 2 * static_cast<long>(k) - n, hist.counts()[k]);
            } else {
                for (std::size_t d = 0; d < draws; ++d) std::cout << join_spins(sampler.draw(rng)) << '\n';
            }
        } else if (*stat) {
            std::ifstream file;
            std::istream* in = &std::cin;
            if (stat_input != "-") {
                file.open(stat_input);
                if (!file) throw ModelError("cannot open " + stat_input);
                in = &file;
            }
            const auto tag = parse_statistic_tag(stat_name);
            std::shared_ptr<const CouplingMatrix> q;
            std::cout << "index,statistic\n";
            std::string line;
            std::size_t index = 0;
            while (std::getline(*in, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                const auto x = parse_spins(line);
                if (!q || q->size() != x.size()) {
                    auto params = stat_model.params();
                    params.n = x.size();
                    q = std::make_shared<const CouplingMatrix>(build_coupling(params));
                }
                std::cout << fmt::format("{},{:.12g}\n", index++, evaluate_statistic(StatisticKind::make(tag, q), x));
            }
        } else if (*theory) {
            std::cout << "quantity,argument,value\n";
            const auto m = solve_spontaneous_magnetization(theory_theta);
            std::cout << fmt::format("m_theta,,{:.15g}\n", m.root);
            for (double a : GridRange{theory_step, 1.0 - 1e-9, theory_step}.points()) {
                const auto r = detection_boundary(theory_theta, a);
                std::cout << fmt::format("r_boundary,{:.4g},{}\n", a, r ? fmt::format("{:.10g}", *r) : "undetectable");
            }
            if (theory_theta >= 0.0) {
                const auto law = null_limit(theory_theta);
                if (theory_theta > 1.0) {
                    std::cout << fmt::format("limit_center,,{:.15g}\n", law.center());
                    std::cout << fmt::format("limit_variance_alt,,{:.15g}\n", displayed_conditional_variance(theory_theta));
                }
                std::cout << fmt::format("limit_variance,,{:.15g}\n", law.variance());
                for (double p : {0.9, 0.95, 0.99}) std::cout << fmt::format("limit_quantile,{},{:.10g}\n", p, law.quantile(p));
            }
            if (theory_n) {
                const double norm = std::abs(theory_theta) * static_cast<double>(*theory_n - 1) / static_cast<double>(*theory_n);
                for (int k = 1; k <= 10; ++k) {
                    const double t = 0.05 * k;
                    std::cout << fmt::format("concentration_bound,{:.2f},{:.10g}\n", t,
                                             concentration_bound(*theory_n, norm, t));
                }
            }
        } else if (*calibrate_cmd) {
            const ModelSpec spec = cal_model.spec();
            const ReplicateModel null_model(spec);
            const auto tag = parse_statistic_tag(cal_stat);
            const auto crit = calibrate(null_model, null_model.statistic(tag), cal_alpha, cal_m_null, cal_seed);
            std::cout << "theta,n,s,B,stat,alpha,m_null,replicates,crit,p_hat,ci\n";
            std::cout << fmt::format("{},{},0,0,{},{},{},0,{:.10g},,\n", cal_model.theta, cal_model.n, to_string(tag),
                                     cal_alpha, cal_m_null, crit.value);
        } else if (*power_cmd) {
            const ModelSpec family = pow_model.spec();
            std::size_t s = pow_s.value_or(0);
            double b = pow_b.value_or(0.0);
            if (pow_a) s = sparsity_for(pow_model.n, *pow_a);
            if (pow_r) b = strength_for(pow_model.n, *pow_r);
            const ReplicateModel null_model(family);
            const ReplicateModel alt(family.with_signal(s, b), null_model.coupling());
            const auto tag = parse_statistic_tag(pow_stat);
            const auto kind = null_model.statistic(tag);
            const auto crit = calibrate(null_model, kind, pow_alpha, pow_m_null, pow_seed);
            const auto est = estimate_power(alt, kind, crit, pow_replicates, pow_seed);
            std::cout << "theta,n,s,B,stat,alpha,m_null,replicates,crit,p_hat,ci\n";
            std::cout << fmt::format("{},{},{},{:.10g},{},{},{},{},{:.10g},{:.6f},{:.6f}\n", pow_model.theta,
                                     pow_model.n, s, b, to_string(tag), pow_alpha, pow_m_null, pow_replicates,
                                     crit.value, est.p_hat, est.ci_halfwidth);
        } else if (*figure) {
            ExperimentConfig cfg = fig_full ? ExperimentConfig::full_scale(fig_theta.value_or(0.5),
                                                                           fig_stat ? parse_statistic_tag(*fig_stat)
                                                                                    : StatisticTag::cond_centered)
                                            : ExperimentConfig{};
            if (!fig_config.empty()) cfg = load_experiment_config(fig_config, cfg);
            if (fig_theta) {
                cfg.theta = *fig_theta;
                if (!fig_step && fig_config.empty()) {
                    const double hi = cfg.theta == 1.0 ? 0.75 : 0.5;
                    cfg.a_grid.hi = cfg.r_grid.hi = hi;
                }
            }
            if (fig_n) cfg.n = *fig_n;
            if (fig_kind) cfg.kind = parse_coupling_kind(*fig_kind);
            if (fig_stat) cfg.stat = parse_statistic_tag(*fig_stat);
            if (fig_alpha) cfg.alpha = *fig_alpha;
            if (fig_m_null) cfg.m_null = *fig_m_null;
            if (fig_replicates) cfg.replicates = *fig_replicates;
            if (fig_seed) cfg.master_seed = *fig_seed;
            if (fig_sampler) cfg.sampler = parse_sampler_backend(*fig_sampler);
            if (fig_step) {
                const double hi = cfg.theta == 1.0 ? 0.75 : 0.5;
                cfg.a_grid = {*fig_step, hi, *fig_step};
                cfg.r_grid = {*fig_step, hi, *fig_step};
            }
            const auto surface = run_power_grid(cfg);
            const auto files = emit_surface(surface, fig_out);
            std::size_t failed = 0;
            for (const auto& c : surface.cells) failed += c.failed();
            std::cerr << fmt::format("wrote {}, {} and {} ({} cells, {} failed)\n", files.csv.string(),
                                     files.boundary_csv.string(), files.pgm.string(), surface.cells.size(), failed);
            return failed ? 1 : 0;
        } else if (*verify) {
            VerifyScale s;
            if (scale == "quick")
                s = VerifyScale::quick;
            else if (scale == "full")
                s = VerifyScale::full;
            else
                throw ModelError("--scale must be quick or full");
            const auto report = verify_suite(s, verify_seed);
            std::cout << report.format();
            return report.all_passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
