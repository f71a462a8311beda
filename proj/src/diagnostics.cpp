#include "isingdetect/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace isingdetect {

double tv_distance(std::span<const double> p, std::span<const double> q) {
    const std::size_t len = std::max(p.size(), q.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double a = k < p.size() ? p[k] : 0.0;
        const double b = k < q.size() ? q[k] : 0.0;
        acc += std::abs(a - b);
    }
    return 0.5 * acc;
}

void MagnetizationHistogram::add(const SpinConfiguration& x) {
    const long up = (x.total() + static_cast<long>(x.size())) / 2;
    add_count(static_cast<std::size_t>(up));
}

void MagnetizationHistogram::merge(const MagnetizationHistogram& other) {
    for (std::size_t k = 0; k < counts_.size() && k < other.counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
}

std::vector<double> MagnetizationHistogram::pmf() const {
    std::vector<double> out(counts_.size(), 0.0);
    if (total_ == 0) return out;
    for (std::size_t k = 0; k < counts_.size(); ++k)
        out[k] = static_cast<double>(counts_[k]) / static_cast<double>(total_);
    return out;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        // Ties: evaluate the empirical CDF just below and at the value.
        std::size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1] == samples[i]) ++j;
        const double f = cdf(samples[i]);
        worst = std::max({worst, std::abs(static_cast<double>(i) / m - f), std::abs(static_cast<double>(j + 1) / m - f)});
        i = j;
    }
    return worst;
}

}  // namespace isingdetect
