#include "isingdetect/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

namespace isingdetect {

std::string_view to_string(StatisticTag tag) {
    switch (tag) {
        case StatisticTag::sqrt_n_mean: return "sqrt_n_mean";
        case StatisticTag::quarter_root_mean: return "quarter_root_mean";
        case StatisticTag::cond_centered: return "cond_centered";
    }
    return "sqrt_n_mean";
}

StatisticTag parse_statistic_tag(std::string_view name) {
    std::string key(name);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "sqrt_n_mean" || key == "total") return StatisticTag::sqrt_n_mean;
    if (key == "quarter_root_mean" || key == "critical") return StatisticTag::quarter_root_mean;
    if (key == "cond_centered" || key == "centered") return StatisticTag::cond_centered;
    throw ModelError(fmt::format("unknown statistic '{}'", name));
}

StatisticKind StatisticKind::cond_centered(std::shared_ptr<const CouplingMatrix> q) {
    if (!q) throw ModelError("cond_centered statistic needs a coupling matrix");
    return StatisticKind(StatisticTag::cond_centered, std::move(q));
}

StatisticKind StatisticKind::make(StatisticTag tag, std::shared_ptr<const CouplingMatrix> q) {
    switch (tag) {
        case StatisticTag::sqrt_n_mean: return sqrt_n_mean();
        case StatisticTag::quarter_root_mean: return quarter_root_mean();
        case StatisticTag::cond_centered: return cond_centered(std::move(q));
    }
    return sqrt_n_mean();
}

double total_magnetization(const SpinConfiguration& x) {
    if (x.empty()) throw ModelError("magnetization of an empty configuration");
    return static_cast<double>(x.total()) / static_cast<double>(x.size());
}

namespace {

// sum_i [x_i - tanh(m_i(x) + mu_i)]; `mu` may be null for the null centering.
double centered_sum(const SpinConfiguration& x, const CouplingMatrix& q, const SignalVector* mu) {
    const std::size_t n = x.size();
    if (!mu && q.kind() == CouplingKind::curie_weiss) {
        // m_i = theta (S - x_i) / n takes two values.
        const long total = x.total();
        const long ups = (total + static_cast<long>(n)) / 2;
        const double scale = q.theta() / static_cast<double>(n);
        const double t_up = std::tanh(scale * static_cast<double>(total - 1));
        const double t_down = std::tanh(scale * static_cast<double>(total + 1));
        return static_cast<double>(total) - static_cast<double>(ups) * t_up -
               static_cast<double>(static_cast<long>(n) - ups) * t_down;
    }
    if (!mu && q.kind() == CouplingKind::cycle && n >= 3) {
        // m_i = (theta / 2)(x_{i-1} + x_{i+1}) is -theta, 0 or theta.
        long plus = 0;
        long minus = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int nb = x[(i + n - 1) % n] + x[(i + 1) % n];
            plus += nb == 2;
            minus += nb == -2;
        }
        return static_cast<double>(x.total()) - static_cast<double>(plus - minus) * std::tanh(q.theta());
    }
    const auto m = local_fields(q, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] - std::tanh(m[i] + (mu ? (*mu)[i] : 0.0));
    return acc;
}

}  // namespace

double evaluate_statistic(const StatisticKind& kind, const SpinConfiguration& x) {
    if (x.empty()) throw ModelError("statistic of an empty configuration");
    const double n = static_cast<double>(x.size());
    switch (kind.tag()) {
        case StatisticTag::sqrt_n_mean: return std::sqrt(n) * total_magnetization(x);
        case StatisticTag::quarter_root_mean: return std::pow(n, 0.25) * total_magnetization(x);
        case StatisticTag::cond_centered: {
            const CouplingMatrix& q = *kind.coupling();
            if (q.size() != x.size())
                throw ModelError(fmt::format("configuration has {} spins, coupling has {}", x.size(), q.size()));
            return centered_sum(x, q, nullptr) / std::sqrt(n);
        }
    }
    return 0.0;
}

double f_statistic(const SpinConfiguration& x, const CouplingMatrix& q, const SignalVector& mu) {
    if (q.size() != x.size() || mu.size() != x.size())
        throw ModelError(fmt::format("dimension mismatch: x has {}, Q has {}, mu has {}", x.size(), q.size(), mu.size()));
    return centered_sum(x, q, &mu) / static_cast<double>(x.size());
}

}  // namespace isingdetect
