#pragma once

#include "isingdetect/model.hpp"

#include <memory>
#include <string_view>

namespace isingdetect {

enum class StatisticTag { sqrt_n_mean, quarter_root_mean, cond_centered };

std::string_view to_string(StatisticTag tag);
/// Accepts "sqrt-n-mean", "quarter-root-mean", "cond-centered" and underscore forms.
StatisticTag parse_statistic_tag(std::string_view name);

/// Which test statistic to compute. cond_centered carries the coupling used
/// for the null conditional means.
class StatisticKind {
public:
    static StatisticKind sqrt_n_mean() { return StatisticKind(StatisticTag::sqrt_n_mean, nullptr); }
    static StatisticKind quarter_root_mean() { return StatisticKind(StatisticTag::quarter_root_mean, nullptr); }
    static StatisticKind cond_centered(std::shared_ptr<const CouplingMatrix> q);
    /// Binds `q` only when `tag` needs it.
    static StatisticKind make(StatisticTag tag, std::shared_ptr<const CouplingMatrix> q);

    StatisticTag tag() const { return tag_; }
    const CouplingMatrix* coupling() const { return q_.get(); }

private:
    StatisticKind(StatisticTag tag, std::shared_ptr<const CouplingMatrix> q) : tag_(tag), q_(std::move(q)) {}

    StatisticTag tag_;
    std::shared_ptr<const CouplingMatrix> q_;
};

/// Xbar = (1/n) sum_i x_i.
double total_magnetization(const SpinConfiguration& x);

/// sqrt_n_mean:       sqrt(n) Xbar
/// quarter_root_mean: n^(1/4) Xbar
/// cond_centered:     sqrt(n) (1/n) sum_i [x_i - tanh(m_i(x))]
double evaluate_statistic(const StatisticKind& kind, const SpinConfiguration& x);

/// (1/n) sum_i [x_i - tanh(m_i(x) + mu_i)].
double f_statistic(const SpinConfiguration& x, const CouplingMatrix& q, const SignalVector& mu);

}  // namespace isingdetect
