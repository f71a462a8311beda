#include "isingdetect/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace isingdetect {

namespace {

// Bisection for a sign change of g on [lo, hi] with g(lo) < 0 < g(hi).
template <typename F>
FixedPointResult bisect(F&& g, double lo, double hi) {
    FixedPointResult out;
    for (; out.iterations < 2000; ++out.iterations) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double glo = std::abs(g(lo));
    const double ghi = std::abs(g(hi));
    out.root = glo <= ghi ? lo : hi;
    out.residual = std::min(glo, ghi);
    return out;
}

// ---- quartic W law -------------------------------------------------------

constexpr double kQuarticSpan = 6.0;
constexpr std::size_t kQuarticKnots = 1201;  // spacing 0.01

double quartic_density_unnormalized(double x) {
    const double x2 = x * x;
    return std::exp(-x2 * x2 / 12.0);
}

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double adaptive_simpson(F f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 24);
}

struct QuarticTable {
    double normalizer = 0.0;
    std::array<double, kQuarticKnots> cumulative{};  // unnormalized mass on [-6, knot]

    QuarticTable() {
        cumulative[0] = 0.0;
        for (std::size_t k = 1; k < kQuarticKnots; ++k) {
            const double a = knot(k - 1);
            const double b = knot(k);
            cumulative[k] = cumulative[k - 1] + adaptive_simpson(quartic_density_unnormalized, a, b, 1e-14);
        }
        normalizer = cumulative.back();
    }

    static double knot(std::size_t k) {
        return -kQuarticSpan + 2.0 * kQuarticSpan * static_cast<double>(k) / static_cast<double>(kQuarticKnots - 1);
    }

    double mass_below(double x) const {
        if (x <= -kQuarticSpan) return 0.0;
        if (x >= kQuarticSpan) return normalizer;
        const double pos = (x + kQuarticSpan) / (2.0 * kQuarticSpan) * static_cast<double>(kQuarticKnots - 1);
        std::size_t k = std::min(static_cast<std::size_t>(pos), kQuarticKnots - 2);
        return cumulative[k] + adaptive_simpson(quartic_density_unnormalized, knot(k), x, 1e-14);
    }
};

const QuarticTable& quartic_table() {
    static const QuarticTable table;
    return table;
}

}  // namespace

double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// ---------------------------------------------------------------------------
// Fixed points

FixedPointResult solve_spontaneous_magnetization(double theta) {
    if (!(theta >= 0.0)) throw ModelError(fmt::format("theta must be >= 0, got {}", theta));
    if (theta <= 1.0) return {0.0, 0.0, 0};
    auto g = [theta](double z) { return z - std::tanh(theta * z); };
    // g < 0 just above zero; g(1) = 1 - tanh(theta) > 0.
    double lo = std::min(0.5, 0.5 * std::sqrt(3.0 * (theta - 1.0) / (theta * theta * theta)));
    while (g(lo) >= 0.0 && lo > 1e-300) lo *= 0.5;
    return bisect(g, lo, 1.0);
}

FixedPointResult solve_tilted_fixed_point(double theta, double p, double strength) {
    if (!(p >= 0.0 && p <= 1.0)) throw ModelError(fmt::format("fraction p must lie in [0, 1], got {}", p));
    if (!(strength >= 0.0)) throw ModelError(fmt::format("strength must be >= 0, got {}", strength));
    if (!(theta >= 0.0)) throw ModelError(fmt::format("theta must be >= 0, got {}", theta));
    if (p == 0.0 || strength == 0.0) return solve_spontaneous_magnetization(theta);

    auto h = [=](double z) { return z - p * std::tanh(theta * z + strength) - (1.0 - p) * std::tanh(theta * z); };
    // h(0) < 0 and h(1) > 0. Walk down from 1 to the first negative point so
    // the bracket holds the largest root.
    constexpr int kSteps = 20000;
    double hi = 1.0;
    double lo = 0.0;
    for (int k = kSteps - 1; k >= 0; --k) {
        const double z = static_cast<double>(k) / kSteps;
        if (h(z) < 0.0) {
            lo = z;
            break;
        }
        hi = z;
    }
    return bisect(h, lo, hi);
}

std::optional<double> detection_boundary(double theta, double a) {
    if (!(a > 0.0 && a < 1.0)) throw ModelError(fmt::format("sparsity exponent must lie in (0, 1), got {}", a));
    const double r = (theta == 1.0 ? 0.75 : 0.5) - a;
    if (r <= 0.0) return std::nullopt;
    return r;
}

// ---------------------------------------------------------------------------
// Limit laws

LimitDistribution LimitDistribution::normal(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw ModelError("normal limit needs a finite positive variance");
    LimitDistribution d;
    d.kind_ = LimitKind::normal;
    d.variance_ = variance;
    return d;
}

LimitDistribution LimitDistribution::quartic_w() {
    LimitDistribution d;
    d.kind_ = LimitKind::quartic_w;
    d.normalizer_ = quartic_table().normalizer;
    // E W^2 = sqrt(12) Gamma(3/4) / Gamma(1/4)
    d.variance_ = std::sqrt(12.0) * std::tgamma(0.75) / std::tgamma(0.25);
    return d;
}

LimitDistribution LimitDistribution::conditional_normal(double center, double variance) {
    LimitDistribution d = normal(variance);
    d.kind_ = LimitKind::conditional_normal;
    d.center_ = center;
    return d;
}

double LimitDistribution::pdf(double x) const {
    if (kind_ == LimitKind::quartic_w) return quartic_density_unnormalized(x) / normalizer_;
    const double sd = std::sqrt(variance_);
    return std::exp(-0.5 * x * x / variance_) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double LimitDistribution::cdf(double x) const {
    if (kind_ == LimitKind::quartic_w) {
        const auto& t = quartic_table();
        return t.mass_below(x) / t.normalizer;
    }
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance_));
}

double LimitDistribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw ModelError(fmt::format("quantile level must lie in (0, 1), got {}", p));
    if (kind_ != LimitKind::quartic_w) {
        boost::math::normal_distribution<double> nd(0.0, std::sqrt(variance_));
        return boost::math::quantile(nd, p);
    }
    // Bracket from the knot table, then bisect the exact CDF.
    const auto& t = quartic_table();
    const double target = p * t.normalizer;
    auto it = std::lower_bound(t.cumulative.begin(), t.cumulative.end(), target);
    std::size_t k = static_cast<std::size_t>(std::distance(t.cumulative.begin(), it));
    double lo = QuarticTable::knot(k == 0 ? 0 : k - 1);
    double hi = QuarticTable::knot(std::min(k, kQuarticKnots - 1));
    if (hi <= lo) hi = lo + 2.0 * kQuarticSpan / static_cast<double>(kQuarticKnots - 1);
    for (int it2 = 0; it2 < 200; ++it2) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (t.mass_below(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ellis_newman_variance(double theta) {
    if (!(theta > 1.0)) throw ModelError("ellis_newman_variance needs theta > 1");
    const double m = solve_spontaneous_magnetization(theta).root;
    const double c = 1.0 - m * m;
    return c / (1.0 - theta * c);
}

double displayed_conditional_variance(double theta) {
    if (!(theta > 1.0)) throw ModelError("displayed_conditional_variance needs theta > 1");
    const double m = solve_spontaneous_magnetization(theta).root;
    return 1.0 / (1.0 - theta * (1.0 - m * m));
}

LimitDistribution null_limit(double theta) {
    if (!(theta >= 0.0)) throw ModelError(fmt::format("theta must be >= 0, got {}", theta));
    if (theta < 1.0) return LimitDistribution::normal(1.0 / (1.0 - theta));
    if (theta == 1.0) return LimitDistribution::quartic_w();
    const double m = solve_spontaneous_magnetization(theta).root;
    return LimitDistribution::conditional_normal(m, ellis_newman_variance(theta));
}

double quartic_w_normalizer() {
    return quartic_table().normalizer;
}

// ---------------------------------------------------------------------------
// Concentration

double concentration_bound(std::size_t n, double inf_norm, double t) {
    if (!(t > 0.0)) throw ModelError(fmt::format("deviation t must be > 0, got {}", t));
    const double denom = 4.0 * (1.0 + inf_norm) * (1.0 + inf_norm);
    return std::min(1.0, 2.0 * std::exp(-static_cast<double>(n) * t * t / denom));
}

double concentration_bound(const CouplingMatrix& q, double t) {
    return concentration_bound(q.size(), condition_report(q).inf_norm, t);
}

// ---------------------------------------------------------------------------
// Cycle transfer matrix

TransferEigenvalues transfer_eigenvalues(double edge_coupling, double field) {
    const double ej = std::exp(edge_coupling);
    const double emj = std::exp(-edge_coupling);
    const double sh = std::sinh(field);
    const double norm = ej + emj;
    TransferEigenvalues ev;
    ev.lambda1 = (ej * std::cosh(field) + std::sqrt(ej * ej * sh * sh + emj * emj)) / norm;
    // lambda1 * lambda2 = (e^{2J} - e^{-2J}) / norm^2 = tanh(J); avoids cancellation.
    ev.lambda2 = std::tanh(edge_coupling) / ev.lambda1;
    return ev;
}

double log_transfer_trace(double edge_coupling, double field, std::size_t n) {
    const double nd = static_cast<double>(n);
    const auto ev = transfer_eigenvalues(edge_coupling, field);
    return nd * std::log(ev.lambda1) + std::log1p(std::pow(ev.lambda2 / ev.lambda1, nd));
}

double log_cycle_mgf(double theta, double t, std::size_t n) {
    if (n < 3) throw ModelError("cycle_mgf needs n >= 3");
    const double j = theta / 2.0;
    return log_transfer_trace(j, t / std::sqrt(static_cast<double>(n)), n) - log_transfer_trace(j, 0.0, n);
}

double cycle_mgf(double theta, double t, std::size_t n) {
    return std::exp(log_cycle_mgf(theta, t, n));
}

// ---------------------------------------------------------------------------
// Auxiliary potential

namespace {

void check_signal(std::size_t n, const SignalVector& mu) {
    if (mu.size() != n) throw ModelError(fmt::format("signal has length {} but n = {}", mu.size(), n));
}

}  // namespace

double aux_potential(double z, std::size_t n, double theta, const SignalVector& mu) {
    check_signal(n, mu);
    const double nd = static_cast<double>(n);
    const double s = static_cast<double>(mu.sparsity());
    return nd * theta * z * z / 2.0 - (nd - s) * log_cosh(theta * z) - s * log_cosh(theta * z + mu.strength());
}

double aux_potential_derivative(double z, std::size_t n, double theta, const SignalVector& mu) {
    check_signal(n, mu);
    const double nd = static_cast<double>(n);
    const double s = static_cast<double>(mu.sparsity());
    return theta * (nd * z - (nd - s) * std::tanh(theta * z) - s * std::tanh(theta * z + mu.strength()));
}

double aux_potential_second_derivative(double z, std::size_t n, double theta, const SignalVector& mu) {
    check_signal(n, mu);
    const double nd = static_cast<double>(n);
    const double s = static_cast<double>(mu.sparsity());
    auto sech2 = [](double x) {
        const double c = std::cosh(x);
        return 1.0 / (c * c);
    };
    return theta * nd - theta * theta * ((nd - s) * sech2(theta * z) + s * sech2(theta * z + mu.strength()));
}

FixedPointResult solve_aux_mode(std::size_t n, const SignalVector& mu) {
    check_signal(n, mu);
    if (mu.is_zero()) return {0.0, 0.0, 0};
    const double nd = static_cast<double>(n);
    auto g = [&](double z) { return aux_potential_derivative(z, n, 1.0, mu) / nd; };
    // g(0) = -A(mu) < 0 and g(1) = 1 - mean tanh(1 + mu_i) > 0.
    return bisect(g, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Likelihood ratio profile

std::vector<double> log_likelihood_ratio_profile(std::size_t n, std::size_t s, double strength) {
    if (s > n) throw ModelError(fmt::format("sparsity {} exceeds n = {}", s, n));
    if (!(strength >= 0.0)) throw ModelError("strength must be >= 0");
    auto lchoose = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
    const double nd = static_cast<double>(n);
    const double sd = static_cast<double>(s);
    const double lnorm = lchoose(nd, sd);
    std::vector<double> out(n + 1);
    std::vector<double> terms;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t jmin = s > n - k ? s - (n - k) : 0;
        const std::size_t jmax = std::min(s, k);
        terms.clear();
        for (std::size_t j = jmin; j <= jmax; ++j) {
            const double jd = static_cast<double>(j);
            terms.push_back(lchoose(static_cast<double>(k), jd) + lchoose(nd - k, sd - jd) - lnorm +
                            strength * (2.0 * jd - sd));
        }
        const double top = *std::max_element(terms.begin(), terms.end());
        double acc = 0.0;
        for (double v : terms) acc += std::exp(v - top);
        out[k] = top + std::log(acc);
    }
    return out;
}

std::vector<double> likelihood_ratio_profile(std::size_t n, std::size_t s, double strength) {
    auto out = log_likelihood_ratio_profile(n, s, strength);
    for (double& v : out) v = std::exp(v);
    return out;
}

}  // namespace isingdetect
