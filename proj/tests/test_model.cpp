#include "isingdetect/model.hpp"
#include "isingdetect/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace isingdetect;

namespace {

CouplingMatrix make(CouplingKind kind, std::size_t n, double theta) {
    CouplingParams p;
    p.kind = kind;
    p.n = n;
    p.theta = theta;
    return build_coupling(p);
}

CouplingMatrix make_er(std::size_t n, double theta, double prob, std::uint64_t seed) {
    CouplingParams p;
    p.kind = CouplingKind::erdos_renyi;
    p.n = n;
    p.theta = theta;
    p.edge_prob = prob;
    p.seed = seed;
    return build_coupling(p);
}

CouplingMatrix make_circulant(std::size_t n, double theta, std::size_t d) {
    CouplingParams p;
    p.kind = CouplingKind::regular_circulant;
    p.n = n;
    p.theta = theta;
    p.degree = d;
    return build_coupling(p);
}

void require_symmetric_hollow(const CouplingMatrix& q) {
    for (std::size_t i = 0; i < q.size(); ++i) {
        REQUIRE(q(i, i) == 0.0);
        for (std::size_t j = 0; j < q.size(); ++j) REQUIRE(q(i, j) == q(j, i));
    }
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("curie-weiss entries are theta/n") {
    const auto q = make(CouplingKind::curie_weiss, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(q(i, j) == (i == j ? 0.0 : 0.25));
    CHECK(q.kind() == CouplingKind::curie_weiss);
}

TEST_CASE("cycle row has theta/2 at distance one") {
    const auto q = make(CouplingKind::cycle, 5, 0.8);
    const auto row = q.row(0);
    CHECK(row[1] == doctest::Approx(0.4));
    CHECK(row[4] == doctest::Approx(0.4));
    CHECK(row[0] == 0.0);
    CHECK(row[2] == 0.0);
    CHECK(row[3] == 0.0);
}

TEST_CASE("erdos-renyi with p = 1 is the complete graph") {
    const auto er = make_er(6, 0.5, 1.0, 7);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(er(i, j) == doctest::Approx(i == j ? 0.0 : 0.5 / 6.0));
}

TEST_CASE("erdos-renyi is reproducible for a fixed seed") {
    const auto a = make_er(40, 0.7, 0.3, 99);
    const auto b = make_er(40, 0.7, 0.3, 99);
    const auto c = make_er(40, 0.7, 0.3, 100);
    CHECK(std::equal(a.entries().begin(), a.entries().end(), b.entries().begin()));
    CHECK_FALSE(std::equal(a.entries().begin(), a.entries().end(), c.entries().begin()));
    CHECK(a.gen_seed() == std::optional<std::uint64_t>(99));
}

TEST_CASE("build_coupling rejects bad inputs") {
    CHECK_THROWS_AS(make(CouplingKind::curie_weiss, 1, 0.5), ModelError);
    CouplingParams p;
    p.kind = CouplingKind::erdos_renyi;
    p.n = 10;
    p.theta = 0.5;
    CHECK_THROWS_AS(build_coupling(p), ModelError);  // no p, no seed
    p.edge_prob = 0.5;
    CHECK_THROWS_AS(build_coupling(p), ModelError);  // no seed
    p.seed = 1;
    p.edge_prob = 0.0;
    CHECK_THROWS_AS(build_coupling(p), ModelError);
    CHECK_THROWS_AS(make_circulant(10, 0.5, 3), ModelError);
    CHECK_THROWS_AS(make_circulant(10, 0.5, 10), ModelError);
    CHECK_THROWS_AS(make_circulant(10, 0.5, 0), ModelError);
}

TEST_CASE("every built matrix is symmetric and hollow") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + rng.below(30);
        const double theta = 3.0 * rng.uniform() - 1.0;
        require_symmetric_hollow(make(CouplingKind::curie_weiss, n, theta));
        require_symmetric_hollow(make(CouplingKind::cycle, n, theta));
        require_symmetric_hollow(make_er(n, theta, 0.1 + 0.9 * rng.uniform(), rng()));
        require_symmetric_hollow(make_circulant(n, theta, 2 * (1 + rng.below((n - 1) / 2))));
    }
}

TEST_CASE("from_entries validates symmetry and the diagonal") {
    CHECK_NOTHROW(CouplingMatrix::from_entries(2, {0.0, 0.3, 0.3, 0.0}));
    CHECK_THROWS_AS(CouplingMatrix::from_entries(2, {0.0, 0.3, 0.2, 0.0}), ModelError);
    CHECK_THROWS_AS(CouplingMatrix::from_entries(2, {0.1, 0.3, 0.3, 0.0}), ModelError);
    CHECK_THROWS_AS(CouplingMatrix::from_entries(2, {0.0, 0.3, 0.3}), ModelError);
    CHECK(CouplingMatrix::from_entries(2, {0.0, 0.3, 0.3, 0.0}).kind() == CouplingKind::custom);
}

TEST_CASE("condition report closed forms") {
    const auto cyc = make(CouplingKind::cycle, 9, 1.3);
    CHECK(condition_report(cyc).inf_norm == doctest::Approx(1.3));

    const auto cw = make(CouplingKind::curie_weiss, 10, 0.5);
    const auto r = condition_report(cw);
    CHECK(r.inf_norm == doctest::Approx(0.5 * 9.0 / 10.0));
    CHECK(r.rowsum_dispersion == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.frob_sq == doctest::Approx(0.225));
    CHECK(r.rho_star == doctest::Approx(0.45));

    const auto circ = make_circulant(12, 0.9, 4);
    CHECK(condition_report(circ).rowsum_dispersion < 1e-28);
    CHECK(condition_report(circ).inf_norm == doctest::Approx(0.9));
}

TEST_CASE("inf norm scales with |c|") {
    const auto er = make_er(30, 0.8, 0.4, 3);
    const double base = condition_report(er).inf_norm;
    for (double c : {-2.0, -0.5, 0.0, 0.3, 4.0})
        CHECK(condition_report(er.scaled(c)).inf_norm == doctest::Approx(std::abs(c) * base));
}

TEST_CASE("report fields are nonnegative and rho_star is the mean row sum") {
    const auto er = make_er(25, -0.6, 0.5, 11);
    const auto r = condition_report(er);
    CHECK(r.inf_norm >= 0.0);
    CHECK(r.frob_sq >= 0.0);
    CHECK(r.rowsum_dispersion >= 0.0);
    double total = 0.0;
    for (double v : er.entries()) total += v;
    CHECK(r.rho_star == doctest::Approx(total / 25.0));
}

TEST_CASE("local fields") {
    const auto zero = CouplingMatrix::from_entries(3, std::vector<double>(9, 0.0));
    const auto x = SpinConfiguration({1, -1, 1});
    for (double m : local_fields(zero, x)) CHECK(m == 0.0);

    const auto ones = SpinConfiguration::constant(7, 1);
    for (double m : local_fields(make(CouplingKind::cycle, 7, 0.6), ones)) CHECK(m == doctest::Approx(0.6));
    for (double m : local_fields(make(CouplingKind::curie_weiss, 7, 0.6), ones))
        CHECK(m == doctest::Approx(0.6 * 6.0 / 7.0));

    CHECK_THROWS_AS(local_fields(zero, ones), ModelError);
}

TEST_CASE("local field fast paths agree with the dense product") {
    Rng rng(17);
    for (auto kind : {CouplingKind::curie_weiss, CouplingKind::cycle}) {
        const auto q = make(kind, 11, 0.9);
        const auto dense = CouplingMatrix::from_entries(11, {q.entries().begin(), q.entries().end()});
        std::vector<std::int8_t> s(11);
        for (auto& v : s) v = rng.uniform() < 0.5 ? -1 : 1;
        const SpinConfiguration x(s);
        const auto fast = local_fields(q, x);
        const auto slow = local_fields(dense, x);
        for (std::size_t i = 0; i < 11; ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-14));
    }
}

TEST_CASE("spin configurations hold only +-1") {
    CHECK_THROWS_AS(SpinConfiguration({1, 0, -1}), ModelError);
    CHECK_THROWS_AS(SpinConfiguration({2}), ModelError);
    const SpinConfiguration x({1, 1, -1});
    CHECK(x.total() == 1);
    CHECK(x.flipped().total() == -1);
    CHECK(x.flipped().flipped() == x);
}

TEST_CASE("make_signal") {
    const auto empty = make_signal(10, 0, 5.0, Placement::prefix);
    CHECK(empty.support().empty());
    CHECK(empty.signal_mass() == 0.0);
    CHECK(empty.is_zero());

    const auto pre = make_signal(8, 3, 1.0, Placement::prefix);
    REQUIRE(pre.sparsity() == 3);
    CHECK(pre.support()[0] == 0);
    CHECK(pre.support()[1] == 1);
    CHECK(pre.support()[2] == 2);
    CHECK(pre.signal_mass() == doctest::Approx(3.0 / 8.0 * std::tanh(1.0)));
    CHECK(pre[2] == 1.0);
    CHECK(pre[3] == 0.0);

    const auto a = make_signal(100, 10, 0.5, Placement::uniform_random, 1);
    const auto b = make_signal(100, 10, 0.5, Placement::uniform_random, 1);
    CHECK(a.sparsity() == 10);
    CHECK(std::equal(a.support().begin(), a.support().end(), b.support().begin()));
    for (std::size_t i : a.support()) CHECK(i < 100);

    CHECK_THROWS_AS(make_signal(5, 6, 1.0, Placement::prefix), ModelError);
    CHECK_THROWS_AS(make_signal(5, 2, -1.0, Placement::prefix), ModelError);
    CHECK_THROWS_AS(make_signal(5, 2, 1.0, Placement::uniform_random), ModelError);
}

TEST_CASE("signal mass is nondecreasing in B and s") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + rng.below(200);
        const std::size_t s = rng.below(n);
        const double b = 3.0 * rng.uniform();
        const double db = rng.uniform();
        const auto base = make_signal(n, s, b, Placement::prefix).signal_mass();
        CHECK(make_signal(n, s, b + db, Placement::prefix).signal_mass() >= base);
        CHECK(make_signal(n, s + 1, b, Placement::prefix).signal_mass() >= base);
    }
}

TEST_CASE("random support is a uniform s-subset") {
    // Each site should be chosen with probability s/n.
    Rng rng(8);
    std::vector<int> hits(20, 0);
    const int rounds = 20000;
    for (int r = 0; r < rounds; ++r) {
        const auto mu = make_random_signal(20, 5, 1.0, rng);
        for (std::size_t i : mu.support()) ++hits[i];
    }
    const double expect = rounds * 0.25;
    const double sd = std::sqrt(rounds * 0.25 * 0.75);
    for (int h : hits) CHECK(std::abs(h - expect) < 4.5 * sd);
}

TEST_CASE("names round-trip") {
    for (auto k : {CouplingKind::curie_weiss, CouplingKind::cycle, CouplingKind::regular_circulant,
                   CouplingKind::erdos_renyi})
        CHECK(parse_coupling_kind(to_string(k)) == k);
    CHECK(parse_coupling_kind("curie-weiss") == CouplingKind::curie_weiss);
    CHECK_THROWS_AS(parse_coupling_kind("torus"), ModelError);
    CHECK(parse_placement("uniform-random") == Placement::uniform_random);
}

TEST_CASE("coupling csv has one row per line") {
    const auto q = make(CouplingKind::cycle, 4, 1.0);
    const auto csv = q.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.substr(0, csv.find('\n')) == "0,0.5,0,0.5");
}

}  // TEST_SUITE
