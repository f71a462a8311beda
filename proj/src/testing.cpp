#include "isingdetect/testing.hpp"

#include "isingdetect/parallel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace isingdetect {

Placement ModelSpec::effective_placement() const {
    if (placement) return *placement;
    return coupling.kind == CouplingKind::curie_weiss ? Placement::prefix : Placement::uniform_random;
}

ModelSpec ModelSpec::null_model() const {
    return with_signal(0, 0.0);
}

ModelSpec ModelSpec::with_signal(std::size_t s, double b) const {
    ModelSpec out = *this;
    out.sparsity = s;
    out.strength = b;
    return out;
}

ReplicateModel::ReplicateModel(ModelSpec spec)
    : ReplicateModel(spec, std::make_shared<const CouplingMatrix>(build_coupling(spec.coupling))) {}

ReplicateModel::ReplicateModel(ModelSpec spec, std::shared_ptr<const CouplingMatrix> q)
    : spec_(std::move(spec)), q_(std::move(q)) {
    const std::size_t n = q_->size();
    if (spec_.sparsity > n) throw ModelError(fmt::format("sparsity {} exceeds n = {}", spec_.sparsity, n));
    if (spec_.is_null() || spec_.effective_placement() == Placement::prefix) {
        SignalVector mu = spec_.is_null() ? SignalVector::zero(n)
                                          : make_signal(n, spec_.sparsity, spec_.strength, Placement::prefix);
        fixed_.emplace(q_, std::move(mu), spec_.backend, spec_.glauber);
    } else {
        // Surface configuration errors now rather than on the first draw.
        IsingSampler probe(q_, SignalVector::zero(n), spec_.backend, spec_.glauber);
        (void)probe;
    }
}

SpinConfiguration ReplicateModel::draw(Rng& rng) const {
    if (fixed_) return fixed_->draw(rng);
    SignalVector mu = make_random_signal(q_->size(), spec_.sparsity, spec_.strength, rng);
    return IsingSampler(q_, std::move(mu), spec_.backend, spec_.glauber).draw(rng);
}

std::size_t critical_rank(double alpha, std::size_t m_null) {
    const double target = (1.0 - alpha) * static_cast<double>(m_null);
    // Guard against (1 - alpha) m landing a rounding error above an integer.
    auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9));
    return std::clamp<std::size_t>(rank, 1, m_null);
}

CriticalValue calibrate(const ReplicateModel& null_model, const StatisticKind& kind, double alpha, std::size_t m_null,
                        std::uint64_t seed, std::size_t workers) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ModelError(fmt::format("alpha must lie in (0, 0.5], got {}", alpha));
    if (m_null < 100) throw ModelError(fmt::format("calibration needs m_null >= 100, got {}", m_null));
    if (!null_model.spec().is_null()) throw ModelError("calibration model must carry no signal");

    CriticalValue crit;
    crit.stat_kind = kind.tag();
    crit.alpha = alpha;
    crit.m_null = m_null;
    crit.seed = seed;
    crit.null_sample.resize(m_null);
    parallel_for(
        m_null,
        [&](std::size_t r) {
            Rng rng = stream_rng(seed, kCalibrationStream, r);
            crit.null_sample[r] = evaluate_statistic(kind, null_model.draw(rng));
        },
        workers);
    std::sort(crit.null_sample.begin(), crit.null_sample.end());
    crit.value = crit.null_sample[critical_rank(alpha, m_null) - 1];
    return crit;
}

Decision decide(double statistic, const CriticalValue& crit) {
    return statistic >= crit.value ? Decision::reject : Decision::retain;
}

Decision run_test(const SpinConfiguration& x, const StatisticKind& kind, const CriticalValue& crit) {
    if (kind.tag() != crit.stat_kind)
        throw ModelError(fmt::format("statistic {} does not match critical value for {}", to_string(kind.tag()),
                                     to_string(crit.stat_kind)));
    return decide(evaluate_statistic(kind, x), crit);
}

PowerEstimate PowerEstimate::from_counts(std::size_t rejections, std::size_t replicates) {
    PowerEstimate p;
    p.rejections = rejections;
    p.replicates = replicates;
    p.p_hat = replicates ? static_cast<double>(rejections) / static_cast<double>(replicates) : 0.0;
    p.ci_halfwidth = 1.96 * p.standard_error();
    return p;
}

double PowerEstimate::standard_error() const {
    if (replicates == 0) return 0.0;
    return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(replicates));
}

namespace {

PowerEstimate count_rejections(const ReplicateModel& model, const StatisticKind& kind, const CriticalValue& crit,
                               std::size_t replicates, std::uint64_t seed, std::uint64_t purpose,
                               std::size_t workers) {
    if (replicates < 1) throw ModelError("power estimation needs at least one replicate");
    if (kind.tag() != crit.stat_kind) throw ModelError("statistic does not match the critical value");
    std::vector<char> rejected(replicates, 0);
    parallel_for(
        replicates,
        [&](std::size_t r) {
            Rng rng = stream_rng(seed, purpose, r);
            rejected[r] = decide(evaluate_statistic(kind, model.draw(rng)), crit) == Decision::reject;
        },
        workers);
    const auto hits = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
    return PowerEstimate::from_counts(hits, replicates);
}

}  // namespace

PowerEstimate estimate_power(const ReplicateModel& alternative, const StatisticKind& kind, const CriticalValue& crit,
                             std::size_t replicates, std::uint64_t seed, std::size_t workers) {
    return count_rejections(alternative, kind, crit, replicates, seed, kPowerStream, workers);
}

RiskEstimate estimate_risk(const ModelSpec& family, std::size_t s, double strength, StatisticTag tag, double alpha,
                           std::size_t m_null, std::size_t replicates, std::uint64_t seed, std::size_t workers) {
    ReplicateModel null_model(family.null_model());
    ReplicateModel alt(family.with_signal(s, strength), null_model.coupling());
    const StatisticKind kind = null_model.statistic(tag);

    RiskEstimate out;
    out.crit = calibrate(null_model, kind, alpha, m_null, seed, workers);
    out.level = count_rejections(null_model, kind, out.crit, replicates, seed, kTypeOneStream, workers);
    out.power = estimate_power(alt, kind, out.crit, replicates, seed, workers);
    out.type_one = out.level.p_hat;
    out.type_two = 1.0 - out.power.p_hat;
    out.risk = out.type_one + out.type_two;
    return out;
}

}  // namespace isingdetect
