#include "isingdetect/statistics.hpp"
#include "isingdetect/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace isingdetect;

namespace {

std::shared_ptr<const CouplingMatrix> coupling(CouplingKind kind, std::size_t n, double theta) {
    CouplingParams p;
    p.kind = kind;
    p.n = n;
    p.theta = theta;
    return std::make_shared<const CouplingMatrix>(build_coupling(p));
}

std::shared_ptr<const CouplingMatrix> as_custom(const CouplingMatrix& q) {
    return std::make_shared<const CouplingMatrix>(
        CouplingMatrix::from_entries(q.size(), {q.entries().begin(), q.entries().end()}));
}

SpinConfiguration random_spins(std::size_t n, Rng& rng) {
    std::vector<std::int8_t> s(n);
    for (auto& v : s) v = rng.uniform() < 0.5 ? -1 : 1;
    return SpinConfiguration(std::move(s));
}

}  // namespace

TEST_SUITE("statistics") {

TEST_CASE("all-up configuration") {
    const auto ones = SpinConfiguration::constant(4, 1);
    CHECK(total_magnetization(ones) == 1.0);
    CHECK(evaluate_statistic(StatisticKind::sqrt_n_mean(), ones) == doctest::Approx(2.0));
    CHECK(evaluate_statistic(StatisticKind::quarter_root_mean(), ones) == doctest::Approx(std::sqrt(2.0)));

    const auto zero = std::make_shared<const CouplingMatrix>(
        CouplingMatrix::from_entries(4, std::vector<double>(16, 0.0)));
    CHECK(evaluate_statistic(StatisticKind::cond_centered(zero), ones) == doctest::Approx(2.0));

    // Curie-Weiss n = 4, theta = 1: every local field is 3/4.
    const auto cw = coupling(CouplingKind::curie_weiss, 4, 1.0);
    CHECK(evaluate_statistic(StatisticKind::cond_centered(cw), ones) ==
          doctest::Approx(2.0 * (1.0 - std::tanh(0.75))));
}

TEST_CASE("balanced configuration has zero mean statistics") {
    const SpinConfiguration x({1, -1, 1, -1, 1, -1});
    CHECK(evaluate_statistic(StatisticKind::sqrt_n_mean(), x) == 0.0);
    CHECK(evaluate_statistic(StatisticKind::quarter_root_mean(), x) == 0.0);
    CHECK(evaluate_statistic(StatisticKind::cond_centered(coupling(CouplingKind::cycle, 6, 0.8)), x) ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("f statistic") {
    const auto zero = CouplingMatrix::from_entries(3, std::vector<double>(9, 0.0));
    const SpinConfiguration x({1, 1, -1});
    CHECK(f_statistic(x, zero, SignalVector::zero(3)) == doctest::Approx(1.0 / 3.0));
    const auto mu = make_signal(3, 3, 0.5, Placement::prefix);
    CHECK(f_statistic(x, zero, mu) == doctest::Approx(1.0 / 3.0 - std::tanh(0.5)));
    CHECK_THROWS_AS(f_statistic(x, zero, SignalVector::zero(4)), ModelError);
}

TEST_CASE("statistics are bounded") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(60);
        const auto x = random_spins(n, rng);
        const double rn = std::sqrt(static_cast<double>(n));
        const auto q = coupling(trial % 2 ? CouplingKind::cycle : CouplingKind::curie_weiss, std::max<std::size_t>(n, 3),
                                3.0 * rng.uniform());
        CHECK(std::abs(total_magnetization(x)) <= 1.0);
        CHECK(std::abs(evaluate_statistic(StatisticKind::sqrt_n_mean(), x)) <= rn + 1e-12);
        CHECK(std::abs(evaluate_statistic(StatisticKind::quarter_root_mean(), x)) <= std::pow(n, 0.25) + 1e-12);
        if (q->size() == n) {
            CHECK(std::abs(evaluate_statistic(StatisticKind::cond_centered(q), x)) <= 2.0 * rn + 1e-12);
            CHECK(std::abs(f_statistic(x, *q, SignalVector::zero(n))) <= 2.0 + 1e-12);
        }
    }
}

TEST_CASE("statistics are odd under a global flip") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(40);
        const auto x = random_spins(n, rng);
        const auto y = x.flipped();
        std::vector<std::shared_ptr<const CouplingMatrix>> qs = {coupling(CouplingKind::curie_weiss, n, 1.3),
                                                                  coupling(CouplingKind::cycle, n, 0.7)};
        for (const auto& q : qs) {
            for (auto kind : {StatisticKind::sqrt_n_mean(), StatisticKind::quarter_root_mean(),
                              StatisticKind::cond_centered(q)}) {
                CHECK(evaluate_statistic(kind, y) == doctest::Approx(-evaluate_statistic(kind, x)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("structured fast paths agree with the dense computation") {
    Rng rng(14);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + rng.below(80);
        const double theta = 3.0 * rng.uniform() - 0.5;
        const auto x = random_spins(n, rng);
        for (auto kind : {CouplingKind::curie_weiss, CouplingKind::cycle}) {
            const auto q = coupling(kind, n, theta);
            const double fast = evaluate_statistic(StatisticKind::cond_centered(q), x);
            const double dense = evaluate_statistic(StatisticKind::cond_centered(as_custom(*q)), x);
            CHECK(fast == doctest::Approx(dense).epsilon(1e-12));
        }
    }
}

TEST_CASE("cond_centered requires a coupling of matching size") {
    CHECK_THROWS(StatisticKind::cond_centered(nullptr));
    const auto q = coupling(CouplingKind::cycle, 5, 0.5);
    CHECK_THROWS_AS(evaluate_statistic(StatisticKind::cond_centered(q), SpinConfiguration::constant(6, 1)), ModelError);
}

TEST_CASE("statistic names") {
    for (auto tag : {StatisticTag::sqrt_n_mean, StatisticTag::quarter_root_mean, StatisticTag::cond_centered})
        CHECK(parse_statistic_tag(to_string(tag)) == tag);
    CHECK(parse_statistic_tag("cond-centered") == StatisticTag::cond_centered);
    CHECK_THROWS_AS(parse_statistic_tag("median"), ModelError);
}

}  // TEST_SUITE
