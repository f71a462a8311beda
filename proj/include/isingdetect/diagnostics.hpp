#pragma once

#include "isingdetect/model.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace isingdetect {

/// (1/2) sum_k |p_k - q_k|; the shorter input is padded with zeros.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Histogram of #(+1 spins) normalized to a pmf over k = 0..n.
class MagnetizationHistogram {
public:
    explicit MagnetizationHistogram(std::size_t n) : counts_(n + 1, 0) {}

    void add(const SpinConfiguration& x);
    void add_count(std::size_t k, std::size_t c = 1) { counts_.at(k) += c; total_ += c; }
    void merge(const MagnetizationHistogram& other);

    std::size_t draws() const { return total_; }
    std::span<const std::size_t> counts() const { return counts_; }
    std::vector<double> pmf() const;

private:
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples` (any order).
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace isingdetect
