#include "isingdetect/testing.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace isingdetect;

namespace {

ModelSpec curie_weiss(std::size_t n, double theta) {
    ModelSpec spec;
    spec.coupling.kind = CouplingKind::curie_weiss;
    spec.coupling.n = n;
    spec.coupling.theta = theta;
    return spec;
}

CriticalValue threshold(double value, StatisticTag tag = StatisticTag::sqrt_n_mean) {
    CriticalValue c;
    c.stat_kind = tag;
    c.value = value;
    return c;
}

}  // namespace

TEST_SUITE("testing") {

TEST_CASE("critical rank") {
    CHECK(critical_rank(0.05, 500) == 475);
    CHECK(critical_rank(0.05, 100) == 95);
    CHECK(critical_rank(0.1, 1000) == 900);
    CHECK(critical_rank(0.05, 501) == 476);
    CHECK(critical_rank(0.5, 1) == 1);
    CHECK(critical_rank(1e-6, 10) == 10);
}

TEST_CASE("decision rule rejects on ties") {
    const auto c = threshold(1.5);
    CHECK(decide(1.5, c) == Decision::reject);
    CHECK(decide(std::nextafter(1.5, 0.0), c) == Decision::retain);
    CHECK(decide(std::numeric_limits<double>::infinity(), c) == Decision::reject);
    CHECK(decide(-std::numeric_limits<double>::infinity(), c) == Decision::retain);
}

TEST_CASE("run_test checks the statistic kind") {
    const auto x = SpinConfiguration::constant(4, 1);
    CHECK(run_test(x, StatisticKind::sqrt_n_mean(), threshold(2.0)) == Decision::reject);
    CHECK(run_test(x, StatisticKind::sqrt_n_mean(), threshold(2.1)) == Decision::retain);
    CHECK_THROWS_AS(run_test(x, StatisticKind::quarter_root_mean(), threshold(2.0)), ModelError);
}

TEST_CASE("calibration is deterministic and sorted") {
    const ReplicateModel null_model(curie_weiss(100, 0.5));
    const auto kind = StatisticKind::sqrt_n_mean();
    const auto a = calibrate(null_model, kind, 0.05, 300, 11, 1);
    const auto b = calibrate(null_model, kind, 0.05, 300, 11, 3);
    const auto c = calibrate(null_model, kind, 0.05, 300, 12, 1);
    CHECK(a.value == b.value);
    CHECK(a.null_sample == b.null_sample);
    CHECK(a.null_sample != c.null_sample);
    REQUIRE(a.null_sample.size() == 300);
    CHECK(std::is_sorted(a.null_sample.begin(), a.null_sample.end()));
    CHECK(a.value == a.null_sample[critical_rank(0.05, 300) - 1]);
    CHECK(a.m_null == 300);
    CHECK(a.seed == 11);
}

TEST_CASE("high-temperature critical value is near the normal quantile") {
    // sqrt(n) Xbar -> N(0, 1 / (1 - theta)); 0.95 quantile at theta = 0.5 is 2.326.
    const ReplicateModel null_model(curie_weiss(400, 0.5));
    const auto c = calibrate(null_model, StatisticKind::sqrt_n_mean(), 0.05, 5000, 3);
    CHECK(std::abs(c.value - 2.326) < 0.15);
}

TEST_CASE("calibration rejects bad inputs") {
    const ReplicateModel null_model(curie_weiss(50, 0.5));
    CHECK_THROWS_AS(calibrate(null_model, StatisticKind::sqrt_n_mean(), 0.05, 50, 1), ModelError);
    CHECK_THROWS_AS(calibrate(null_model, StatisticKind::sqrt_n_mean(), 0.7, 500, 1), ModelError);
    const ReplicateModel alt(curie_weiss(50, 0.5).with_signal(5, 1.0));
    CHECK_THROWS_AS(calibrate(alt, StatisticKind::sqrt_n_mean(), 0.05, 500, 1), ModelError);
}

TEST_CASE("power is one under a saturating signal") {
    const auto family = curie_weiss(100, 0.5);
    const ReplicateModel null_model(family);
    const auto kind = StatisticKind::sqrt_n_mean();
    const auto c = calibrate(null_model, kind, 0.05, 200, 1);
    const ReplicateModel alt(family.with_signal(100, 8.0), null_model.coupling());
    const auto p = estimate_power(alt, kind, c, 200, 2);
    CHECK(p.p_hat == 1.0);
    CHECK(p.ci_halfwidth == 0.0);
    CHECK(p.rejections == 200);
}

TEST_CASE("power estimate is deterministic across worker counts") {
    const auto family = curie_weiss(80, 1.0);
    const ReplicateModel null_model(family);
    const auto kind = StatisticKind::quarter_root_mean();
    const auto c = calibrate(null_model, kind, 0.05, 200, 5);
    const ReplicateModel alt(family.with_signal(10, 0.5), null_model.coupling());
    const auto p1 = estimate_power(alt, kind, c, 300, 6, 1);
    const auto p4 = estimate_power(alt, kind, c, 300, 6, 4);
    CHECK(p1.rejections == p4.rejections);
}

TEST_CASE("power is nondecreasing in B") {
    const auto family = curie_weiss(200, 0.5);
    const ReplicateModel null_model(family);
    const auto kind = null_model.statistic(StatisticTag::cond_centered);
    const auto c = calibrate(null_model, kind, 0.05, 500, 21);
    PowerEstimate prev;
    bool first = true;
    for (double b : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        const ReplicateModel alt(family.with_signal(20, b), null_model.coupling());
        const auto p = estimate_power(alt, kind, c, 400, 22);
        if (!first) CHECK(p.p_hat + 2.0 * std::hypot(p.standard_error(), prev.standard_error()) >= prev.p_hat);
        prev = p;
        first = false;
    }
}

TEST_CASE("curie-weiss power does not depend on placement") {
    const auto family = curie_weiss(200, 0.5);
    const ReplicateModel null_model(family);
    const auto kind = null_model.statistic(StatisticTag::sqrt_n_mean);
    const auto c = calibrate(null_model, kind, 0.05, 500, 31);
    auto prefix = family.with_signal(20, 0.4);
    prefix.placement = Placement::prefix;
    auto random = prefix;
    random.placement = Placement::uniform_random;
    const auto p1 = estimate_power(ReplicateModel(prefix, null_model.coupling()), kind, c, 1000, 32);
    const auto p2 = estimate_power(ReplicateModel(random, null_model.coupling()), kind, c, 1000, 33);
    CHECK(std::abs(p1.p_hat - p2.p_hat) <= 2.0 * std::hypot(p1.standard_error(), p2.standard_error()));
}

TEST_CASE("power interval") {
    const auto p = PowerEstimate::from_counts(30, 100);
    CHECK(p.p_hat == doctest::Approx(0.3));
    CHECK(p.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(0.3 * 0.7 / 100)));
}

TEST_CASE("risk behaves on both sides of the boundary") {
    const auto family = curie_weiss(400, 0.5);
    // a = 0.1, r = 0.1: s = round(400^0.9), tanh B = 400^-0.1.
    const auto deep = estimate_risk(family, 220, std::atanh(std::pow(400.0, -0.1)), StatisticTag::sqrt_n_mean, 0.05,
                                    500, 300, 7);
    CHECK(deep.risk < 0.15);
    // a = 0.6, r = 0.3: below the boundary.
    const auto flat = estimate_risk(family, 11, std::atanh(std::pow(400.0, -0.3)), StatisticTag::sqrt_n_mean, 0.05,
                                    500, 300, 7);
    CHECK(flat.risk > 0.8);
    const auto none = estimate_risk(family, 0, 1.0, StatisticTag::sqrt_n_mean, 0.05, 500, 300, 7);
    CHECK(none.risk == doctest::Approx(1.0).epsilon(0.12));
    CHECK(none.risk == doctest::Approx(none.type_one + none.type_two));
}

TEST_CASE("placement defaults") {
    CHECK(curie_weiss(10, 0.5).effective_placement() == Placement::prefix);
    ModelSpec cyc;
    cyc.coupling.kind = CouplingKind::cycle;
    CHECK(cyc.effective_placement() == Placement::uniform_random);
    CHECK(curie_weiss(10, 0.5).is_null());
    CHECK_FALSE(curie_weiss(10, 0.5).with_signal(2, 0.3).is_null());
    CHECK(curie_weiss(10, 0.5).with_signal(2, 0.3).null_model().is_null());
}

}  // TEST_SUITE
