#include "isingdetect/verify.hpp"

#include "isingdetect/diagnostics.hpp"
#include "isingdetect/parallel.hpp"
#include "isingdetect/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include <boost/math/distributions/binomial.hpp>
#include <fmt/format.h>

namespace isingdetect {

bool Report::all_passed() const {
    return failures() == 0;
}

std::size_t Report::failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

std::string Report::format() const {
    std::string out;
    for (const auto& c : checks) {
        out += fmt::format("{} {} measured={:.6g} threshold={:.6g}", c.passed ? "PASS" : "FAIL", c.name, c.measured,
                           c.threshold);
        if (!c.detail.empty()) out += "  " + c.detail;
        out += '\n';
    }
    out += fmt::format("{} checks, {} failed\n", checks.size(), failures());
    return out;
}

namespace {

struct BatteryModel {
    std::string label;
    std::shared_ptr<const CouplingMatrix> q;
    SignalVector mu;
};

std::shared_ptr<const CouplingMatrix> coupling(CouplingKind kind, std::size_t n, double theta,
                                               std::optional<double> p = std::nullopt,
                                               std::optional<std::uint64_t> seed = std::nullopt) {
    CouplingParams params;
    params.kind = kind;
    params.n = n;
    params.theta = theta;
    params.edge_prob = p;
    params.seed = seed;
    return std::make_shared<const CouplingMatrix>(build_coupling(params));
}

// Each model once without signal and once with s = n/4 sites at B = 0.5.
void add_with_signals(std::vector<BatteryModel>& out, const std::string& label,
                      const std::shared_ptr<const CouplingMatrix>& q, Placement placement) {
    const std::size_t n = q->size();
    out.push_back({fmt::format("{} n={} null", label, n), q, SignalVector::zero(n)});
    out.push_back({fmt::format("{} n={} s={} B=0.5", label, n, n / 4), q,
                   make_signal(n, n / 4, 0.5, placement, mix_seed({n, 0x5197ULL}))});
}

double worst_tv(const std::vector<BatteryModel>& battery, SamplerBackend backend,
                const std::optional<GlauberConfig>& glauber, std::size_t draws, std::uint64_t seed,
                std::string& worst_label) {
    double worst = 0.0;
    for (std::size_t b = 0; b < battery.size(); ++b) {
        const auto& m = battery[b];
        const ExactModel exact = enumerate_model(*m.q, m.mu);
        IsingSampler sampler(m.q, m.mu, backend, glauber);
        Rng rng(mix_seed({seed, static_cast<std::uint64_t>(backend), b}));
        MagnetizationHistogram hist(m.q->size());
        for (std::size_t d = 0; d < draws; ++d) hist.add(sampler.draw(rng));
        const double tv = tv_distance(hist.pmf(), exact.magnetization_pmf);
        if (tv >= worst) {
            worst = tv;
            worst_label = m.label;
        }
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> check_oracle_tv(std::size_t draws, std::uint64_t seed) {
    constexpr double kTol = 0.03;
    std::vector<BatteryModel> cw, cyc, generic;
    for (std::size_t n : {4, 8, 12}) {
        for (double theta : {0.5, 1.0, 1.5})
            add_with_signals(cw, fmt::format("curie_weiss theta={}", theta), coupling(CouplingKind::curie_weiss, n, theta),
                             Placement::prefix);
        for (double theta : {0.8, 1.5})
            add_with_signals(cyc, fmt::format("cycle theta={}", theta), coupling(CouplingKind::cycle, n, theta),
                             Placement::uniform_random);
        add_with_signals(generic, "curie_weiss theta=0.5", coupling(CouplingKind::curie_weiss, n, 0.5),
                         Placement::prefix);
        add_with_signals(generic, "erdos_renyi theta=0.5 p=0.5",
                         coupling(CouplingKind::erdos_renyi, n, 0.5, 0.5, mix_seed({seed, n})),
                         Placement::uniform_random);
    }

    std::vector<CheckResult> out;
    auto run = [&](const std::string& name, const std::vector<BatteryModel>& battery, SamplerBackend backend,
                   std::optional<GlauberConfig> glauber) {
        std::string label;
        const double tv = worst_tv(battery, backend, glauber, draws, seed, label);
        out.push_back({name, tv, kTol, tv <= kTol, fmt::format("{} models, worst: {}", battery.size(), label)});
    };
    run("oracle_tv.curie_weiss_exact", cw, SamplerBackend::curie_weiss_exact, std::nullopt);
    run("oracle_tv.cycle_exact", cyc, SamplerBackend::cycle_exact, std::nullopt);
    run("oracle_tv.glauber", generic, SamplerBackend::glauber, std::nullopt);
    return out;
}

std::vector<CheckResult> check_limit_laws(std::size_t n, std::size_t draws, std::uint64_t seed) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double qn = std::pow(static_cast<double>(n), 0.25);
    std::vector<CheckResult> out;

    auto sample_means = [&](double theta, std::uint64_t purpose, std::size_t count,
                            const std::function<bool(double)>& keep) {
        CurieWeissSampler sampler(n, theta, SignalVector::zero(n));
        Rng rng(mix_seed({seed, purpose}));
        std::vector<double> means;
        means.reserve(count);
        for (std::size_t guard = 0; means.size() < count && guard < 20 * count; ++guard) {
            const double xbar = total_magnetization(sampler.draw(rng));
            if (keep(xbar)) means.push_back(xbar);
        }
        return means;
    };
    auto any = [](double) { return true; };

    {
        const auto dist = null_limit(0.5);
        auto xs = sample_means(0.5, 1, draws, any);
        for (double& x : xs) x *= rn;
        const double ks = ks_distance(xs, [&](double v) { return dist.cdf(v); });
        out.push_back({"limit_law.theta_0.5", ks, 0.06, ks < 0.06,
                       fmt::format("sqrt(n) Xbar vs Normal(0, {:.4g}), n={}, draws={}", dist.variance(), n, xs.size())});
    }
    {
        const auto dist = null_limit(1.0);
        auto xs = sample_means(1.0, 2, draws, any);
        for (double& x : xs) x *= qn;
        const double ks = ks_distance(xs, [&](double v) { return dist.cdf(v); });
        out.push_back({"limit_law.theta_1", ks, 0.06, ks < 0.06,
                       fmt::format("n^(1/4) Xbar vs quartic W, n={}, draws={}", n, xs.size())});
    }
    {
        const auto dist = null_limit(1.5);
        auto xs = sample_means(1.5, 3, draws, [](double xbar) { return xbar > 0.0; });
        for (double& x : xs) x = rn * (x - dist.center());
        const double ks = ks_distance(xs, [&](double v) { return dist.cdf(v); });
        out.push_back({"limit_law.theta_1.5", ks, 0.08, ks < 0.08,
                       fmt::format("sqrt(n)(Xbar - m) | Xbar > 0 vs Normal(0, {:.4g}), n={}, draws={}",
                                   dist.variance(), n, xs.size())});
    }
    return out;
}

CheckResult check_cycle_mgf() {
    double worst = 0.0;
    std::string where;
    for (std::size_t n = 3; n <= 14; ++n) {
        for (double theta : {0.2, 0.8, 1.5}) {
            const auto q = coupling(CouplingKind::cycle, n, theta);
            const ExactModel exact = enumerate_model(*q, SignalVector::zero(n));
            for (int k = -8; k <= 8; ++k) {
                const double t = 0.25 * k;
                const double want = exact_total_spin_mgf(exact, t / std::sqrt(static_cast<double>(n)));
                const double got = cycle_mgf(theta, t, n);
                const double rel = std::abs(got - want) / std::abs(want);
                if (rel >= worst) {
                    worst = rel;
                    where = fmt::format("n={} theta={} t={}", n, theta, t);
                }
            }
        }
    }
    return {"cycle_mgf.enumeration", worst, 1e-10, worst < 1e-10, "worst at " + where};
}

CheckResult check_concentration(std::size_t n, std::size_t draws, std::uint64_t seed) {
    struct Case {
        std::string label;
        std::shared_ptr<const CouplingMatrix> q;
    };
    const std::vector<Case> cases = {
        {"curie_weiss theta=0.5", coupling(CouplingKind::curie_weiss, n, 0.5)},
        {"curie_weiss theta=1.5", coupling(CouplingKind::curie_weiss, n, 1.5)},
        {"cycle theta=0.8", coupling(CouplingKind::cycle, n, 0.8)},
    };
    const SignalVector mu = SignalVector::zero(n);
    std::size_t violations = 0;
    double tightest = 0.0;  // largest empirical / bound ratio
    std::string detail;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& q = *cases[c].q;
        IsingSampler sampler(cases[c].q, mu);
        const double norm = condition_report(q).inf_norm;
        std::vector<double> fs(draws);
        Rng rng(mix_seed({seed, 0xc0cULL, c}));
        for (auto& f : fs) f = std::abs(f_statistic(sampler.draw(rng), q, mu));
        for (int k = 1; k <= 10; ++k) {
            const double t = 0.05 * k;
            const double freq = static_cast<double>(std::count_if(fs.begin(), fs.end(), [&](double f) { return f >= t; })) /
                                static_cast<double>(draws);
            const double bound = concentration_bound(n, norm, t);
            if (freq > bound) {
                ++violations;
                detail += fmt::format(" [{} t={:.2f} freq={:.4g} bound={:.4g}]", cases[c].label, t, freq, bound);
            }
            tightest = std::max(tightest, freq / bound);
        }
    }
    if (detail.empty()) detail = fmt::format("3 models x 10 t values, max freq/bound = {:.4g}", tightest);
    return {"concentration.one_sided", static_cast<double>(violations), 0.0, violations == 0, detail};
}

ExperimentConfig panel_config(const PanelSpec& panel, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.n = 400;
    cfg.theta = panel.theta;
    cfg.stat = panel.stat;
    cfg.alpha = 0.05;
    cfg.m_null = 500;
    cfg.replicates = 300;
    cfg.master_seed = seed;
    const double hi = panel.theta == 1.0 ? 0.75 : 0.5;
    cfg.a_grid = {0.05, hi, 0.05};
    cfg.r_grid = {0.05, hi, 0.05};
    return cfg;
}

CheckResult check_panel(const PowerSurface& surface, const PanelSpec& panel) {
    const double intercept = surface.config.theta == 1.0 ? 0.75 : 0.5;
    constexpr double kSlack = 1e-9;
    std::size_t misses = 0;
    std::size_t checked = 0;
    std::string detail;
    for (const auto& c : surface.cells) {
        const double line = intercept - c.a;
        bool bad = false;
        if (c.r <= line - panel.margin + kSlack) {
            ++checked;
            bad = c.failed() || c.p_hat < panel.high_power;
        } else if (c.r >= line + panel.margin - kSlack) {
            ++checked;
            bad = c.failed() || c.p_hat > panel.low_power;
        }
        if (bad) {
            ++misses;
            detail += fmt::format(" [a={:.2f} r={:.2f} p={:.3f}]", c.a, c.r, c.p_hat);
        }
    }
    return {fmt::format("power_panel.theta_{}_{}", surface.config.theta, to_string(surface.config.stat)),
            static_cast<double>(misses), 0.0, misses == 0,
            fmt::format("{} of {} cells outside the band checked{}", checked, surface.cells.size(), detail)};
}

std::vector<double> exact_power_surface(const PowerSurface& surface) {
    const auto& cfg = surface.config;
    if (cfg.kind != CouplingKind::curie_weiss) throw ModelError("exact power needs a Curie-Weiss surface");
    const std::size_t n = cfg.n;
    ModelSpec spec;
    spec.coupling = cfg.coupling_params();
    const ReplicateModel model(spec);
    const auto kind = model.statistic(cfg.stat);
    // Every Curie-Weiss statistic here depends on x only through its total.
    std::vector<double> stat_at(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        std::vector<std::int8_t> spins(n, -1);
        std::fill_n(spins.begin(), k, std::int8_t{1});
        stat_at[k] = evaluate_statistic(kind, SpinConfiguration(std::move(spins)));
    }
    std::vector<double> out(surface.cells.size(), std::nan(""));
    for (std::size_t c = 0; c < surface.cells.size(); ++c) {
        const auto& cell = surface.cells[c];
        if (cell.failed()) continue;
        const auto pmf = curie_weiss_magnetization_pmf(
            n, cfg.theta, make_signal(n, cell.s, cell.strength, Placement::prefix));
        double p = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            if (stat_at[k] >= cell.crit) p += pmf[k];
        out[c] = std::min(1.0, p);
    }
    return out;
}

CheckResult check_panel_against_exact(const PowerSurface& surface) {
    const auto exact = exact_power_surface(surface);
    const std::size_t reps = surface.config.replicates;
    double min_p = 1.0;
    std::string where;
    for (std::size_t c = 0; c < exact.size(); ++c) {
        const auto& cell = surface.cells[c];
        double p_value = 0.0;
        if (!cell.failed()) {
            const double p = std::clamp(exact[c], 0.0, 1.0);
            const auto k = static_cast<double>(std::lround(cell.p_hat * static_cast<double>(reps)));
            if (p <= 0.0 || p >= 1.0) {
                p_value = (k == p * static_cast<double>(reps)) ? 1.0 : 0.0;
            } else {
                const boost::math::binomial_distribution<double> law(static_cast<double>(reps), p);
                const double lower = boost::math::cdf(law, k);
                const double upper = k > 0 ? boost::math::cdf(boost::math::complement(law, k - 1)) : 1.0;
                p_value = std::min(1.0, 2.0 * std::min(lower, upper));
            }
        }
        if (p_value < min_p) {
            min_p = p_value;
            where = fmt::format("a={:.2f} r={:.2f} p_hat={:.3f} exact={:.3f}", cell.a, cell.r, cell.p_hat, exact[c]);
        }
    }
    const double adjusted = std::min(1.0, min_p * static_cast<double>(exact.size()));
    return {fmt::format("power_panel_exact.theta_{}_{}", surface.config.theta, to_string(surface.config.stat)),
            adjusted, 1e-3, adjusted >= 1e-3,
            fmt::format("Bonferroni-adjusted min binomial p-value over {} cells; worst {}", exact.size(), where)};
}

CheckResult check_level(std::size_t n, std::size_t m_null, std::size_t trials, std::uint64_t seed) {
    constexpr double kAlpha = 0.05;
    struct Case {
        CouplingKind kind;
        double theta;
        StatisticTag stat;
    };
    const std::vector<Case> cases = {
        {CouplingKind::curie_weiss, 0.5, StatisticTag::sqrt_n_mean},
        {CouplingKind::curie_weiss, 0.5, StatisticTag::cond_centered},
        {CouplingKind::curie_weiss, 1.0, StatisticTag::quarter_root_mean},
        {CouplingKind::curie_weiss, 1.5, StatisticTag::cond_centered},
        {CouplingKind::cycle, 0.8, StatisticTag::cond_centered},
    };
    const double se = std::sqrt(kAlpha * (1.0 - kAlpha) / static_cast<double>(trials));
    double worst = 0.0;
    std::string detail;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        ModelSpec spec;
        spec.coupling.kind = cases[c].kind;
        spec.coupling.n = n;
        spec.coupling.theta = cases[c].theta;
        const ReplicateModel null_model(spec);
        const auto kind = null_model.statistic(cases[c].stat);
        // Each trial recalibrates on its own seed and tests one fresh null draw,
        // so the rejection count is exactly binomial in the procedure's level.
        std::vector<char> rejected(trials, 0);
        parallel_for(trials, [&](std::size_t t) {
            const auto crit = calibrate(null_model, kind, kAlpha, m_null, mix_seed({seed, c, t}), 1);
            Rng rng = stream_rng(mix_seed({seed, c}), kTypeOneStream, t);
            rejected[t] = decide(evaluate_statistic(kind, null_model.draw(rng)), crit) == Decision::reject;
        });
        const auto level = PowerEstimate::from_counts(
            static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1)), trials);
        const double z = std::abs(level.p_hat - kAlpha) / se;
        worst = std::max(worst, z);
        detail += fmt::format(" [{} theta={} {}: {:.4f}]", to_string(cases[c].kind), cases[c].theta,
                              to_string(cases[c].stat), level.p_hat);
    }
    return {"level.within_3se", worst, 3.0, worst <= 3.0,
            fmt::format("n={} m_null={} trials={} se={:.4f}{}", n, m_null, trials, se, detail)};
}

std::vector<CheckResult> check_theory_identities(std::uint64_t seed) {
    std::vector<CheckResult> out;

    {
        std::size_t bad = 0;
        std::size_t profiles = 0;
        for (std::size_t n : {10, 50, 200}) {
            for (std::size_t s : {std::size_t{1}, n / 4, n}) {
                for (double b : {0.1, 0.5, 2.0}) {
                    const auto lr = log_likelihood_ratio_profile(n, s, b);
                    ++profiles;
                    for (std::size_t k = 1; k < lr.size(); ++k)
                        if (!(lr[k] > lr[k - 1])) ++bad;
                }
            }
        }
        out.push_back({"identity.lr_profile_increasing", static_cast<double>(bad), 0.0, bad == 0,
                       fmt::format("{} profiles", profiles)});
    }
    {
        // tanh(x + y) - tanh(x) >= (1 - tanh x) tanh y for x >= 0, y > 0.
        Rng rng(mix_seed({seed, 0x7a4ULL}));
        std::size_t bad = 0;
        double worst = -1.0;
        for (int i = 0; i < 10000; ++i) {
            const double x = 5.0 * rng.uniform();
            const double y = 5.0 * (1.0 - rng.uniform());
            const double lhs = std::tanh(x + y) - std::tanh(x);
            const double rhs = (1.0 - std::tanh(x)) * std::tanh(y);
            const double gap = rhs - lhs;
            worst = std::max(worst, gap);
            if (gap > 4e-16) ++bad;
        }
        out.push_back({"identity.tanh_difference", static_cast<double>(bad), 0.0, bad == 0,
                       fmt::format("10000 pairs, max rhs - lhs = {:.3g}", worst)});
    }
    {
        double worst = 0.0;
        for (double theta : {1.01, 1.1, 1.5, 2.0, 3.0, 5.0})
            worst = std::max(worst, std::abs(solve_spontaneous_magnetization(theta).residual));
        for (double theta : {0.5, 1.0, 1.5})
            for (double p : {0.01, 0.1, 0.5, 1.0})
                for (double b : {0.1, 1.0})
                    worst = std::max(worst, std::abs(solve_tilted_fixed_point(theta, p, b).residual));
        out.push_back({"identity.fixed_point_residual", worst, 1e-12, worst < 1e-12, "m(theta) and tilted roots"});
    }
    {
        constexpr std::size_t n = 200;
        constexpr std::size_t draws = 20000;
        double worst = 0.0;
        std::string where;
        for (double theta : {0.5, 1.0, 1.5}) {
            for (std::size_t s : {std::size_t{0}, std::size_t{20}, n}) {
                const SignalVector mu = make_signal(n, s, s ? 1.0 : 0.0, Placement::prefix);
                CurieWeissSampler sampler(n, theta, mu);
                Rng rng(mix_seed({seed, 0x55c5ULL, s, static_cast<std::uint64_t>(theta * 100)}));
                double sum = 0.0;
                double sum_sq = 0.0;
                for (std::size_t d = 0; d < draws; ++d) {
                    const double z = sampler.draw_z(rng);
                    const auto x = sampler.draw_given_z(z, rng);
                    double dev = 0.0;
                    for (std::size_t i = 0; i < n; ++i) dev += x[i] - std::tanh(mu[i] + theta * z);
                    const double v = dev * dev / static_cast<double>(n);
                    sum += v;
                    sum_sq += v * v;
                }
                const double mean = sum / draws;
                const double sd = std::sqrt(std::max(0.0, sum_sq / draws - mean * mean));
                const double ratio = mean / (1.0 + 3.0 * sd / std::sqrt(static_cast<double>(draws)));
                if (ratio >= worst) {
                    worst = ratio;
                    where = fmt::format("theta={} s={} mean/n={:.4f}", theta, s, mean);
                }
            }
        }
        out.push_back({"identity.aux_second_moment", worst, 1.0, worst <= 1.0, "worst " + where});
    }
    {
        double lo = INFINITY;
        double hi = 0.0;
        bool in_range = true;
        for (std::size_t n : {250, 500, 1000}) {
            const SignalVector mu = make_signal(n, n / 10, 1.0, Placement::prefix);
            const auto mode = solve_aux_mode(n, mu);
            in_range = in_range && mode.root > 0.0 && mode.root <= 1.0;
            const double ratio = std::pow(mode.root, 3) / mu.signal_mass();
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        const bool ok = in_range && lo >= 0.1 && hi <= 10.0;
        out.push_back({"identity.aux_mode_scaling", hi, 10.0, ok,
                       fmt::format("mode in (0,1]: {}, m^3/A in [{:.4g}, {:.4g}], required [0.1, 10]",
                                   in_range ? "yes" : "no", lo, hi)});
    }
    return out;
}

CheckResult check_determinism(const ExperimentConfig& config, const std::vector<std::string>& thread_settings) {
    const char* previous = std::getenv("ISING_DETECT_THREADS");
    const std::optional<std::string> saved = previous ? std::optional<std::string>(previous) : std::nullopt;
    std::vector<std::string> csvs;
    for (const auto& setting : thread_settings) {
        ::setenv("ISING_DETECT_THREADS", setting.c_str(), 1);
        csvs.push_back(surface_csv(run_power_grid(config)));
    }
    if (saved)
        ::setenv("ISING_DETECT_THREADS", saved->c_str(), 1);
    else
        ::unsetenv("ISING_DETECT_THREADS");

    std::size_t mismatches = 0;
    for (const auto& csv : csvs) mismatches += csv != csvs.front();
    std::string settings;
    for (const auto& s : thread_settings) settings += (settings.empty() ? "" : ",") + s;
    return {"determinism.csv_bytes", static_cast<double>(mismatches), 0.0, mismatches == 0,
            fmt::format("ISING_DETECT_THREADS in {{{}}}, {} bytes", settings, csvs.front().size())};
}

Report verify_suite(VerifyScale scale, std::uint64_t seed) {
    Report report;
    auto append = [&](std::vector<CheckResult> checks) {
        for (auto& c : checks) report.checks.push_back(std::move(c));
    };
    const bool full = scale == VerifyScale::full;
    append(check_oracle_tv(full ? 100000 : 20000, seed));
    report.checks.push_back(check_cycle_mgf());
    append(check_theory_identities(seed));
    if (full) {
        append(check_limit_laws(1000, 2000, seed));
        report.checks.push_back(check_concentration(200, 100000, seed));
        report.checks.push_back(check_level(400, 500, 2000, seed));
    }
    return report;
}

}  // namespace isingdetect
