#include "isingdetect/model.hpp"

#include "isingdetect/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace isingdetect {

namespace {

std::string normalize_name(std::string_view name) {
    std::string out(name);
    std::replace(out.begin(), out.end(), '-', '_');
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::string_view to_string(CouplingKind kind) {
    switch (kind) {
        case CouplingKind::curie_weiss: return "curie_weiss";
        case CouplingKind::cycle: return "cycle";
        case CouplingKind::regular_circulant: return "regular_circulant";
        case CouplingKind::erdos_renyi: return "erdos_renyi";
        case CouplingKind::custom: return "custom";
    }
    return "custom";
}

CouplingKind parse_coupling_kind(std::string_view name) {
    const std::string key = normalize_name(name);
    if (key == "curie_weiss" || key == "cw") return CouplingKind::curie_weiss;
    if (key == "cycle") return CouplingKind::cycle;
    if (key == "regular_circulant" || key == "regular") return CouplingKind::regular_circulant;
    if (key == "erdos_renyi" || key == "er") return CouplingKind::erdos_renyi;
    if (key == "custom") return CouplingKind::custom;
    throw ModelError(fmt::format("unknown coupling kind '{}'", name));
}

std::string_view to_string(Placement placement) {
    return placement == Placement::prefix ? "prefix" : "uniform_random";
}

Placement parse_placement(std::string_view name) {
    const std::string key = normalize_name(name);
    if (key == "prefix") return Placement::prefix;
    if (key == "uniform_random" || key == "random") return Placement::uniform_random;
    throw ModelError(fmt::format("unknown placement '{}'", name));
}

// ---------------------------------------------------------------------------
// CouplingMatrix

CouplingMatrix CouplingMatrix::from_entries(std::size_t n, std::vector<double> entries) {
    if (n < 1) throw ModelError("coupling matrix needs at least one site");
    if (entries.size() != n * n)
        throw ModelError(fmt::format("expected {} entries for n = {}, got {}", n * n, n, entries.size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (entries[i * n + i] != 0.0) throw ModelError(fmt::format("diagonal entry {} is nonzero", i));
        for (std::size_t j = 0; j < n; ++j) {
            double v = entries[i * n + j];
            if (!std::isfinite(v)) throw ModelError("coupling entries must be finite");
            if (v != entries[j * n + i]) throw ModelError(fmt::format("matrix not symmetric at ({}, {})", i, j));
        }
    }
    return CouplingMatrix(n, std::move(entries), CouplingKind::custom, 0.0);
}

CouplingMatrix CouplingMatrix::scaled(double c) const {
    std::vector<double> e(entries_);
    for (double& v : e) v *= c;
    CouplingMatrix out(n_, std::move(e), c == 1.0 ? kind_ : CouplingKind::custom, theta_ * c);
    if (c == 1.0) {
        out.gen_seed_ = gen_seed_;
        out.degree_ = degree_;
    }
    return out;
}

std::string CouplingMatrix::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            if (j > 0) out += ',';
            out += fmt::format("{:.17g}", (*this)(i, j));
        }
        out += '\n';
    }
    return out;
}

CouplingMatrix build_coupling(const CouplingParams& params) {
    const std::size_t n = params.n;
    const double theta = params.theta;
    if (n < 2) throw ModelError(fmt::format("coupling needs n >= 2, got {}", n));
    if (!std::isfinite(theta)) throw ModelError("theta must be finite");

    std::vector<double> e(n * n, 0.0);
    auto set_pair = [&](std::size_t i, std::size_t j, double v) {
        e[i * n + j] = v;
        e[j * n + i] = v;
    };

    CouplingMatrix out(0, {}, params.kind, theta);
    switch (params.kind) {
        case CouplingKind::curie_weiss: {
            const double v = theta / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) set_pair(i, j, v);
            break;
        }
        case CouplingKind::cycle: {
            const double v = theta / 2.0;
            // n == 2 would fold both neighbours onto the same pair.
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = (i + 1) % n;
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
            break;
        }
        case CouplingKind::regular_circulant: {
            if (!params.degree) throw ModelError("regular_circulant requires a degree");
            const std::size_t d = *params.degree;
            if (d == 0 || d % 2 != 0 || d >= n)
                throw ModelError(fmt::format("circulant degree must be even and in [2, n), got {}", d));
            const double v = theta / static_cast<double>(d);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 1; k <= d / 2; ++k) set_pair(i, (i + k) % n, v);
            out.degree_ = d;
            break;
        }
        case CouplingKind::erdos_renyi: {
            if (!params.edge_prob || !params.seed) throw ModelError("erdos_renyi requires edge probability and seed");
            const double p = *params.edge_prob;
            if (!(p > 0.0 && p <= 1.0)) throw ModelError(fmt::format("edge probability must lie in (0, 1], got {}", p));
            const double v = theta / (static_cast<double>(n) * p);
            Rng rng(*params.seed);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (rng.uniform() < p) set_pair(i, j, v);
            out.gen_seed_ = params.seed;
            break;
        }
        case CouplingKind::custom:
            throw ModelError("custom couplings are built with CouplingMatrix::from_entries");
    }
    out.n_ = n;
    out.entries_ = std::move(e);
    return out;
}

ConditionReport condition_report(const CouplingMatrix& q) {
    const std::size_t n = q.size();
    ConditionReport rep;
    std::vector<double> rowsum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double abs_sum = 0.0;
        double sum = 0.0;
        for (double v : q.row(i)) {
            abs_sum += std::abs(v);
            sum += v;
            rep.frob_sq += v * v;
        }
        rowsum[i] = sum;
        rep.inf_norm = std::max(rep.inf_norm, abs_sum);
    }
    rep.rho_star = std::accumulate(rowsum.begin(), rowsum.end(), 0.0) / static_cast<double>(n);
    for (double r : rowsum) {
        const double d = r - rep.rho_star;
        rep.rowsum_dispersion += d * d;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// SpinConfiguration

SpinConfiguration::SpinConfiguration(std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
    for (std::size_t i = 0; i < spins_.size(); ++i)
        if (spins_[i] != 1 && spins_[i] != -1)
            throw ModelError(fmt::format("spin {} has value {}, expected +1 or -1", i, int(spins_[i])));
}

SpinConfiguration SpinConfiguration::constant(std::size_t n, int value) {
    return SpinConfiguration(std::vector<std::int8_t>(n, static_cast<std::int8_t>(value)));
}

long SpinConfiguration::total() const {
    long t = 0;
    for (auto s : spins_) t += s;
    return t;
}

SpinConfiguration SpinConfiguration::flipped() const {
    std::vector<std::int8_t> f(spins_.size());
    std::transform(spins_.begin(), spins_.end(), f.begin(), [](std::int8_t s) { return static_cast<std::int8_t>(-s); });
    return SpinConfiguration(std::move(f));
}

std::vector<double> local_fields(const CouplingMatrix& q, const SpinConfiguration& x) {
    const std::size_t n = q.size();
    if (x.size() != n)
        throw ModelError(fmt::format("configuration has {} spins but coupling has {} sites", x.size(), n));
    std::vector<double> m(n, 0.0);
    switch (q.kind()) {
        case CouplingKind::curie_weiss: {
            const double total = static_cast<double>(x.total());
            const double scale = q.theta() / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) m[i] = scale * (total - x[i]);
            break;
        }
        case CouplingKind::cycle: {
            const double half = q.theta() / 2.0;
            for (std::size_t i = 0; i < n; ++i) m[i] = half * (x[(i + n - 1) % n] + x[(i + 1) % n]);
            break;
        }
        default:
            for (std::size_t i = 0; i < n; ++i) {
                auto row = q.row(i);
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
                m[i] = acc;
            }
    }
    return m;
}

// ---------------------------------------------------------------------------
// SignalVector

SignalVector::SignalVector(std::size_t n, std::vector<std::size_t> support, double strength)
    : support_(std::move(support)), strength_(strength), fields_(n, 0.0) {
    if (!(strength >= 0.0) || !std::isfinite(strength))
        throw ModelError(fmt::format("signal strength must be finite and >= 0, got {}", strength));
    std::sort(support_.begin(), support_.end());
    support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
    for (std::size_t i : support_) {
        if (i >= n) throw ModelError(fmt::format("support index {} out of range for n = {}", i, n));
        fields_[i] = strength;
    }
}

double SignalVector::signal_mass() const {
    if (fields_.empty()) return 0.0;
    return static_cast<double>(support_.size()) / static_cast<double>(fields_.size()) * std::tanh(strength_);
}

SignalVector make_signal(std::size_t n, std::size_t s, double strength, Placement placement,
                         std::optional<std::uint64_t> seed) {
    if (s > n) throw ModelError(fmt::format("sparsity {} exceeds n = {}", s, n));
    if (!(strength >= 0.0)) throw ModelError(fmt::format("signal strength must be >= 0, got {}", strength));
    if (placement == Placement::prefix) {
        std::vector<std::size_t> support(s);
        std::iota(support.begin(), support.end(), std::size_t{0});
        return SignalVector(n, std::move(support), strength);
    }
    if (!seed) throw ModelError("uniform_random placement requires a seed");
    Rng rng(*seed);
    return make_random_signal(n, s, strength, rng);
}

SignalVector make_random_signal(std::size_t n, std::size_t s, double strength, Rng& rng) {
    if (s > n) throw ModelError(fmt::format("sparsity {} exceeds n = {}", s, n));
    // Partial Fisher-Yates: the first s slots are a uniform s-subset.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < s; ++k) {
        std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(idx[k], idx[j]);
    }
    idx.resize(s);
    return SignalVector(n, std::move(idx), strength);
}

}  // namespace isingdetect
