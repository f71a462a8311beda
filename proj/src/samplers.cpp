#include "isingdetect/samplers.hpp"

#include "isingdetect/theory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace isingdetect {

namespace {

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

void check_dims(const CouplingMatrix& q, const SignalVector& mu) {
    if (q.size() != mu.size())
        throw ModelError(fmt::format("coupling has {} sites but signal has {}", q.size(), mu.size()));
}

double up_probability(double field) {
    return 0.5 * (1.0 + std::tanh(field));
}

bool is_zero_matrix(const CouplingMatrix& q) {
    const auto e = q.entries();
    return std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Enumeration

std::vector<double> curie_weiss_magnetization_pmf(std::size_t n, double theta, const SignalVector& mu) {
    if (n < 1) throw ModelError("Curie-Weiss law needs n >= 1");
    if (mu.size() != n) throw ModelError(fmt::format("signal has length {} but n = {}", mu.size(), n));
    const std::size_t s = mu.sparsity();
    const double b = mu.strength();
    const double nd = static_cast<double>(n);
    auto log_choose = [](std::size_t m, std::size_t k) {
        return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(m - k) + 1.0);
    };
    std::vector<double> log_w(n + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t k1 = 0; k1 <= s; ++k1) {
        const double inside = log_choose(s, k1) + b * (2.0 * static_cast<double>(k1) - static_cast<double>(s));
        for (std::size_t k2 = 0; k2 <= n - s; ++k2) {
            const double total = 2.0 * static_cast<double>(k1 + k2) - nd;
            const double w = inside + log_choose(n - s, k2) + theta / (2.0 * nd) * (total * total - nd);
            log_w[k1 + k2] = log_add(log_w[k1 + k2], w);
        }
    }
    const double top = *std::max_element(log_w.begin(), log_w.end());
    std::vector<double> pmf(n + 1);
    double z = 0.0;
    for (std::size_t k = 0; k <= n; ++k) z += pmf[k] = std::exp(log_w[k] - top);
    for (double& p : pmf) p /= z;
    return pmf;
}

double ExactModel::pmf_at_total(long total) const {
    const long nl = static_cast<long>(n);
    if (total < -nl || total > nl || (total + nl) % 2 != 0) return 0.0;
    return magnetization_pmf[static_cast<std::size_t>((total + nl) / 2)];
}

ExactModel enumerate_model(const CouplingMatrix& q, const SignalVector& mu) {
    check_dims(q, mu);
    const std::size_t n = q.size();
    if (n > kMaxEnumerationSites)
        throw ModelError(fmt::format("enumeration capacity exceeded: n = {} > {}", n, kMaxEnumerationSites));

    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<int> x(n, -1);
    std::vector<double> m(n);
    double energy = 0.0;

    auto resync = [&] {
        energy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += q(i, j) * x[j];
            m[i] = acc;
            energy += 0.5 * x[i] * acc + mu[i] * x[i];
        }
    };

    ExactModel out;
    out.n = n;
    std::vector<double> logw(count);
    resync();
    std::uint64_t mask = 0;
    logw[0] = energy;
    // Gray-code walk: each step flips one spin. Resynchronise periodically so
    // rounding does not accumulate.
    for (std::uint64_t step = 1; step < count; ++step) {
        const auto b = static_cast<std::size_t>(std::countr_zero(step));
        const int xb = x[b];
        energy += -2.0 * xb * (m[b] + mu[b]);
        for (std::size_t j = 0; j < n; ++j) m[j] += -2.0 * xb * q(j, b);
        x[b] = -xb;
        mask ^= std::uint64_t{1} << b;
        if (step % 1024 == 0) resync();
        logw[mask] = energy;
    }

    const double top = *std::max_element(logw.begin(), logw.end());
    double acc = 0.0;
    for (double v : logw) acc += std::exp(v - top);
    out.log_partition = top + std::log(acc);

    out.config_probability.resize(count);
    out.config_cdf.resize(count);
    out.magnetization_pmf.assign(n + 1, 0.0);
    double running = 0.0;
    for (std::uint64_t c = 0; c < count; ++c) {
        const double p = std::exp(logw[c] - out.log_partition);
        out.config_probability[c] = p;
        running += p;
        out.config_cdf[c] = running;
        out.magnetization_pmf[static_cast<std::size_t>(std::popcount(c))] += p;
    }
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double total = 2.0 * static_cast<double>(k) - static_cast<double>(n);
        mean += total * out.magnetization_pmf[k];
        second += total * total * out.magnetization_pmf[k];
    }
    out.mean_total_spin = mean;
    out.var_total_spin = second - mean * mean;
    return out;
}

SpinConfiguration configuration_from_mask(std::uint64_t mask, std::size_t n) {
    std::vector<std::int8_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1U ? 1 : -1;
    return SpinConfiguration(std::move(s));
}

double exact_site_mean(const ExactModel& model, std::size_t i) {
    double acc = 0.0;
    for (std::uint64_t c = 0; c < model.config_probability.size(); ++c)
        acc += ((c >> i) & 1U ? 1.0 : -1.0) * model.config_probability[c];
    return acc;
}

double exact_pair_correlation(const ExactModel& model, std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::uint64_t c = 0; c < model.config_probability.size(); ++c) {
        const bool same = ((c >> i) & 1U) == ((c >> j) & 1U);
        acc += (same ? 1.0 : -1.0) * model.config_probability[c];
    }
    return acc;
}

double exact_total_spin_mgf(const ExactModel& model, double lambda) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= model.n; ++k)
        acc += model.magnetization_pmf[k] * std::exp(lambda * (2.0 * static_cast<double>(k) - static_cast<double>(model.n)));
    return acc;
}

SpinConfiguration sample_from_exact(const ExactModel& model, const CouplingMatrix& q, const SignalVector& mu,
                                    Rng& rng) {
    check_dims(q, mu);
    if (q.size() != model.n) throw ModelError("exact model does not match the coupling dimension");
    const double u = rng.uniform() * model.config_cdf.back();
    auto it = std::upper_bound(model.config_cdf.begin(), model.config_cdf.end(), u);
    if (it == model.config_cdf.end()) --it;
    return configuration_from_mask(static_cast<std::uint64_t>(std::distance(model.config_cdf.begin(), it)), model.n);
}

// ---------------------------------------------------------------------------
// Auxiliary variable

AuxGrid build_aux_grid(std::size_t n, double theta, const SignalVector& mu, std::size_t points) {
    if (!(theta > 0.0)) throw ModelError(fmt::format("auxiliary-variable sampler needs theta > 0, got {}", theta));
    if (mu.size() != n) throw ModelError("signal length does not match n");
    if (points < 3) throw ModelError("aux grid needs at least 3 points");

    AuxGrid g;
    g.z_values.resize(points);
    g.potential.resize(points);
    // The mode solves z = mean tanh(theta z + mu_i), so it lies in (-1, 1).
    double zstar = std::abs(solve_spontaneous_magnetization(theta).root) + 1.0;
    double fmin = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (std::size_t k = 0; k < points; ++k) {
            const double z = -zstar + 2.0 * zstar * static_cast<double>(k) / static_cast<double>(points - 1);
            g.z_values[k] = z;
            g.potential[k] = aux_potential(z, n, theta, mu);
        }
        fmin = *std::min_element(g.potential.begin(), g.potential.end());
        if (g.potential.front() - fmin >= kAuxTailGap && g.potential.back() - fmin >= kAuxTailGap) break;
        zstar *= 2.0;
    }
    g.z_lo = -zstar;
    g.z_hi = zstar;

    g.cdf.assign(points, 0.0);
    double prev = std::exp(-(g.potential[0] - fmin));
    for (std::size_t k = 0; k < points; ++k) g.potential[k] -= fmin;
    for (std::size_t k = 1; k < points; ++k) {
        const double w = std::exp(-g.potential[k]);
        g.cdf[k] = g.cdf[k - 1] + 0.5 * (prev + w) * (g.z_values[k] - g.z_values[k - 1]);
        prev = w;
    }
    const double total = g.cdf.back();
    for (double& c : g.cdf) c /= total;
    return g;
}

double sample_aux_z(const AuxGrid& grid, Rng& rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(grid.cdf.begin(), grid.cdf.end(), u);
    // cdf.front() == 0 <= u < 1 == cdf.back(), so it is interior.
    const std::size_t hi = static_cast<std::size_t>(std::distance(grid.cdf.begin(), it));
    const std::size_t lo = hi - 1;
    const double frac = (u - grid.cdf[lo]) / (grid.cdf[hi] - grid.cdf[lo]);
    return grid.z_values[lo] + frac * (grid.z_values[hi] - grid.z_values[lo]);
}

double sample_aux_z(std::size_t n, double theta, const SignalVector& mu, Rng& rng) {
    return sample_aux_z(build_aux_grid(n, theta, mu), rng);
}

CurieWeissSampler::CurieWeissSampler(std::size_t n, double theta, SignalVector mu)
    : n_(n), theta_(theta), mu_(std::move(mu)), grid_(build_aux_grid(n, theta, mu_)) {}

SpinConfiguration CurieWeissSampler::draw_given_z(double z, Rng& rng) const {
    std::vector<std::int8_t> s(n_);
    const double base = theta_ * z;
    const double p0 = up_probability(base);
    for (std::size_t i = 0; i < n_; ++i) {
        const double p = mu_[i] == 0.0 ? p0 : up_probability(base + mu_[i]);
        s[i] = static_cast<std::int8_t>(rng.spin(p));
    }
    return SpinConfiguration(std::move(s));
}

SpinConfiguration CurieWeissSampler::draw(Rng& rng) const {
    const double z = draw_z(rng);
    return draw_given_z(z, rng);
}

SpinConfiguration sample_curie_weiss(std::size_t n, double theta, const SignalVector& mu, Rng& rng) {
    return CurieWeissSampler(n, theta, mu).draw(rng);
}

SpinConfiguration sample_independent(const SignalVector& mu, Rng& rng) {
    std::vector<std::int8_t> s(mu.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int8_t>(rng.spin(up_probability(mu[i])));
    return SpinConfiguration(std::move(s));
}

// ---------------------------------------------------------------------------
// Cycle: forward filtering, backward sampling

CycleSampler::CycleSampler(std::size_t n, double theta, const SignalVector& mu) : n_(n) {
    if (n < 3) throw ModelError(fmt::format("cycle sampler needs n >= 3, got {}", n));
    if (mu.size() != n) throw ModelError("signal length does not match n");
    const double coupling = theta / 2.0;
    constexpr std::array<int, 2> spin_of{-1, 1};
    auto up = [](double log_minus, double log_plus) { return 1.0 / (1.0 + std::exp(log_minus - log_plus)); };

    // alpha[k][b]: log weight of x_1..x_k with x_k = b given x_0 = a,
    // including every field and edge term up to site k.
    std::vector<std::array<double, 2>> alpha(n);
    std::array<double, 2> log_z{};
    for (int a = 0; a < 2; ++a) {
        const int sa = spin_of[a];
        for (int b = 0; b < 2; ++b) alpha[1][b] = mu[0] * sa + coupling * sa * spin_of[b] + mu[1] * spin_of[b];
        for (std::size_t k = 2; k < n; ++k) {
            for (int b = 0; b < 2; ++b) {
                const int sb = spin_of[b];
                alpha[k][b] = log_add(alpha[k - 1][0] - coupling * sb, alpha[k - 1][1] + coupling * sb) + mu[k] * sb;
            }
        }
        log_z[a] = log_add(alpha[n - 1][0] - coupling * sa, alpha[n - 1][1] + coupling * sa);

        auto& back = backward_[a];
        back.resize(n);
        // Slot n-1 conditions on x_0 through the closing edge; slot k < n-1 on x_{k+1}.
        for (int b = 0; b < 2; ++b) back[n - 1][b] = up(alpha[n - 1][0] - coupling * sa, alpha[n - 1][1] + coupling * sa);
        for (std::size_t k = 1; k + 1 < n; ++k)
            for (int b = 0; b < 2; ++b)
                back[k][b] = up(alpha[k][0] - coupling * spin_of[b], alpha[k][1] + coupling * spin_of[b]);
    }
    first_up_ = up(log_z[0], log_z[1]);
}

SpinConfiguration CycleSampler::draw(Rng& rng) const {
    std::vector<std::int8_t> s(n_);
    const int a = rng.uniform() < first_up_ ? 1 : 0;
    s[0] = static_cast<std::int8_t>(2 * a - 1);
    const auto& back = backward_[a];
    int next = rng.uniform() < back[n_ - 1][0] ? 1 : 0;
    s[n_ - 1] = static_cast<std::int8_t>(2 * next - 1);
    for (std::size_t k = n_ - 2; k >= 1; --k) {
        next = rng.uniform() < back[k][next] ? 1 : 0;
        s[k] = static_cast<std::int8_t>(2 * next - 1);
    }
    return SpinConfiguration(std::move(s));
}

SpinConfiguration sample_cycle(std::size_t n, double theta, const SignalVector& mu, Rng& rng) {
    return CycleSampler(n, theta, mu).draw(rng);
}

// ---------------------------------------------------------------------------
// Glauber

std::size_t GlauberConfig::default_sweeps(std::size_t n) {
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    return std::max<std::size_t>(200, 20 * log2n);
}

GlauberConfig GlauberConfig::defaults(std::size_t n, std::uint64_t seed) {
    return GlauberConfig{default_sweeps(n), ScanOrder::systematic, seed};
}

GlauberSampler::GlauberSampler(std::shared_ptr<const CouplingMatrix> q, SignalVector mu, GlauberConfig cfg)
    : q_(std::move(q)), mu_(std::move(mu)), cfg_(cfg) {
    check_dims(*q_, mu_);
    if (cfg_.burn_in_sweeps < 1) throw ModelError("Glauber dynamics needs at least one sweep");
    const std::size_t n = q_->size();
    if (q_->kind() == CouplingKind::curie_weiss) return;  // fields come from the running total
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = q_->row(i);
        for (std::size_t j = 0; j < n; ++j)
            if (row[j] != 0.0) neighbours_.push_back({static_cast<std::uint32_t>(j), row[j]});
        offsets_[i + 1] = neighbours_.size();
    }
}

SpinConfiguration GlauberSampler::draw(Rng& rng) const {
    const std::size_t n = q_->size();
    std::vector<std::int8_t> x(n);
    for (auto& v : x) v = rng.uniform() < 0.5 ? -1 : 1;

    auto site_at = [&](std::size_t step) -> std::size_t {
        return cfg_.scan == ScanOrder::systematic ? step : static_cast<std::size_t>(rng.below(n));
    };

    if (q_->kind() == CouplingKind::curie_weiss) {
        const double scale = q_->theta() / static_cast<double>(n);
        long total = 0;
        for (auto v : x) total += v;
        for (std::size_t sweep = 0; sweep < cfg_.burn_in_sweeps; ++sweep) {
            for (std::size_t step = 0; step < n; ++step) {
                const std::size_t i = site_at(step);
                const double field = scale * static_cast<double>(total - x[i]) + mu_[i];
                const auto updated = static_cast<std::int8_t>(rng.spin(up_probability(field)));
                total += updated - x[i];
                x[i] = updated;
            }
        }
        return SpinConfiguration(std::move(x));
    }

    std::vector<double> m(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) m[i] += neighbours_[k].weight * x[neighbours_[k].site];

    for (std::size_t sweep = 0; sweep < cfg_.burn_in_sweeps; ++sweep) {
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t i = site_at(step);
            const auto updated = static_cast<std::int8_t>(rng.spin(up_probability(m[i] + mu_[i])));
            if (updated != x[i]) {
                const double delta = static_cast<double>(updated - x[i]);
                for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
                    m[neighbours_[k].site] += neighbours_[k].weight * delta;
                x[i] = updated;
            }
        }
    }
    return SpinConfiguration(std::move(x));
}

SpinConfiguration sample_glauber(const CouplingMatrix& q, const SignalVector& mu, const GlauberConfig& cfg, Rng& rng) {
    return GlauberSampler(std::make_shared<const CouplingMatrix>(q), mu, cfg).draw(rng);
}

SpinConfiguration sample_glauber(const CouplingMatrix& q, const SignalVector& mu, const GlauberConfig& cfg) {
    Rng rng(cfg.seed);
    return sample_glauber(q, mu, cfg, rng);
}

// ---------------------------------------------------------------------------
// Dispatch

std::string_view to_string(SamplerBackend backend) {
    switch (backend) {
        case SamplerBackend::automatic: return "auto";
        case SamplerBackend::curie_weiss_exact: return "curie_weiss_exact";
        case SamplerBackend::cycle_exact: return "cycle_exact";
        case SamplerBackend::glauber: return "glauber";
        case SamplerBackend::enumeration: return "enumeration";
        case SamplerBackend::independent: return "independent";
    }
    return "auto";
}

SamplerBackend parse_sampler_backend(std::string_view name) {
    std::string key(name);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "auto" || key == "automatic") return SamplerBackend::automatic;
    if (key == "curie_weiss_exact" || key == "aux" || key == "kac") return SamplerBackend::curie_weiss_exact;
    if (key == "cycle_exact" || key == "ffbs" || key == "transfer") return SamplerBackend::cycle_exact;
    if (key == "glauber") return SamplerBackend::glauber;
    if (key == "enumeration" || key == "exact") return SamplerBackend::enumeration;
    if (key == "independent") return SamplerBackend::independent;
    throw ModelError(fmt::format("unknown sampler backend '{}'", name));
}

IsingSampler::IsingSampler(std::shared_ptr<const CouplingMatrix> q, SignalVector mu, SamplerBackend backend,
                           std::optional<GlauberConfig> glauber)
    : q_(std::move(q)), mu_(std::move(mu)), backend_(backend) {
    check_dims(*q_, mu_);
    const CouplingKind kind = q_->kind();
    if (backend_ == SamplerBackend::automatic) {
        if (is_zero_matrix(*q_))
            backend_ = SamplerBackend::independent;
        else if (kind == CouplingKind::curie_weiss && q_->theta() > 0.0)
            backend_ = SamplerBackend::curie_weiss_exact;
        else if (kind == CouplingKind::cycle && q_->size() >= 3)
            backend_ = SamplerBackend::cycle_exact;
        else
            backend_ = SamplerBackend::glauber;
    }

    switch (backend_) {
        case SamplerBackend::independent:
            if (!is_zero_matrix(*q_)) throw ModelError("independent backend requires Q = 0");
            impl_ = Independent{};
            break;
        case SamplerBackend::curie_weiss_exact:
            if (kind != CouplingKind::curie_weiss) throw ModelError("curie_weiss_exact backend needs a Curie-Weiss coupling");
            impl_ = CurieWeissSampler(q_->size(), q_->theta(), mu_);
            break;
        case SamplerBackend::cycle_exact:
            if (kind != CouplingKind::cycle) throw ModelError("cycle_exact backend needs a cycle coupling");
            if (q_->size() < 3) throw ModelError("cycle_exact backend needs n >= 3");
            impl_ = CycleSampler(q_->size(), q_->theta(), mu_);
            break;
        case SamplerBackend::enumeration:
            impl_ = Enumerated{std::make_shared<const ExactModel>(enumerate_model(*q_, mu_))};
            break;
        case SamplerBackend::glauber:
            impl_ = GlauberSampler(q_, mu_, glauber.value_or(GlauberConfig::defaults(q_->size())));
            break;
        case SamplerBackend::automatic:
            break;
    }
}

SpinConfiguration IsingSampler::draw(Rng& rng) const {
    struct Visitor {
        const IsingSampler& self;
        Rng& rng;
        SpinConfiguration operator()(const Independent&) const { return sample_independent(self.mu_, rng); }
        SpinConfiguration operator()(const CycleSampler& c) const {
            return c.draw(rng);
        }
        SpinConfiguration operator()(const Enumerated& e) const {
            return sample_from_exact(*e.model, *self.q_, self.mu_, rng);
        }
        SpinConfiguration operator()(const CurieWeissSampler& s) const { return s.draw(rng); }
        SpinConfiguration operator()(const GlauberSampler& s) const { return s.draw(rng); }
    };
    return std::visit(Visitor{*this, rng}, impl_);
}

}  // namespace isingdetect
