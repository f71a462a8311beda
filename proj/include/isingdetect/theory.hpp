#pragma once

// Reference quantities: magnetization fixed points, detection boundaries,
// null limit laws, the concentration bound for the centered statistic,
// cycle transfer-matrix moment generating functions, the auxiliary-variable
// potential of the Curie-Weiss model and the likelihood-ratio profile.

#include "isingdetect/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace isingdetect {

struct FixedPointResult {
    double root = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Numerically stable log(cosh(x)).
double log_cosh(double x);

/// m(theta): the largest root of z = tanh(theta z). Zero for theta <= 1.
FixedPointResult solve_spontaneous_magnetization(double theta);

/// Largest nonnegative root of z = p tanh(theta z + B) + (1 - p) tanh(theta z).
FixedPointResult solve_tilted_fixed_point(double theta, double p, double strength);

/// Critical strength exponent r for tanh(B) = n^-r at sparsity s = n^(1-a):
/// 1/2 - a off criticality, 3/4 - a at theta == 1. nullopt when that value is
/// <= 0, i.e. no test has power at any strength.
std::optional<double> detection_boundary(double theta, double a);

enum class LimitKind { normal, quartic_w, conditional_normal };

/// Limit law of the scaled null magnetization.
///
/// normal:             sqrt(n) Xbar -> N(0, variance)
/// quartic_w:          n^(1/4) Xbar -> density exp(-x^4/12) / normalizer
/// conditional_normal: sqrt(n) (Xbar - center) | Xbar > 0 -> N(0, variance)
class LimitDistribution {
public:
    static LimitDistribution normal(double variance);
    static LimitDistribution quartic_w();
    static LimitDistribution conditional_normal(double center, double variance);

    LimitKind kind() const { return kind_; }
    double variance() const { return variance_; }
    double center() const { return center_; }
    /// Integral of exp(-x^4/12) over the line (quartic_w only, else 0).
    double normalizer() const { return normalizer_; }

    double pdf(double x) const;
    double cdf(double x) const;
    /// Nondecreasing in p; throws unless 0 < p < 1.
    double quantile(double p) const;

private:
    LimitKind kind_ = LimitKind::normal;
    double variance_ = 1.0;
    double center_ = 0.0;
    double normalizer_ = 0.0;
};

/// theta < 1 -> Normal(1/(1-theta)); theta == 1 -> QuarticW;
/// theta > 1 -> ConditionalNormal(m(theta), ellis_newman_variance(theta)).
LimitDistribution null_limit(double theta);

/// (1 - m^2) / (1 - theta (1 - m^2)) with m = m(theta), theta > 1.
double ellis_newman_variance(double theta);
/// 1 / (1 - theta (1 - m^2)): the alternative form of the same limit.
double displayed_conditional_variance(double theta);

/// Adaptive-Simpson integral of exp(-x^4/12) over [-6, 6].
double quartic_w_normalizer();

/// min(1, 2 exp(-n t^2 / (4 (1 + ||Q||_inf)^2))).
double concentration_bound(const CouplingMatrix& q, double t);
double concentration_bound(std::size_t n, double inf_norm, double t);

struct TransferEigenvalues {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

/// Normalized eigenvalues of the 2x2 cycle transfer matrix with per-edge
/// coupling J and per-site field h:
///   (e^J cosh h +- sqrt(e^{2J} sinh^2 h + e^{-2J})) / (e^J + e^{-J}).
TransferEigenvalues transfer_eigenvalues(double edge_coupling, double field);

/// log(lambda1^n + lambda2^n): the transfer-matrix trace divided by
/// (e^J + e^-J)^n. Equals 1 + tanh(J)^n at field 0.
double log_transfer_trace(double edge_coupling, double field, std::size_t n);

/// E exp((t / sqrt n) sum_i X_i) under the null cycle model built by
/// build_coupling(cycle, n, theta). That coupling puts theta/2 on each edge,
/// so this is the transfer trace at J = theta/2, h = t/sqrt(n), divided by its
/// value at h = 0.
double cycle_mgf(double theta, double t, std::size_t n);
double log_cycle_mgf(double theta, double t, std::size_t n);

/// f(z) = n theta z^2 / 2 - sum_i log cosh(theta z + mu_i).
double aux_potential(double z, std::size_t n, double theta, const SignalVector& mu);
double aux_potential_derivative(double z, std::size_t n, double theta, const SignalVector& mu);
double aux_potential_second_derivative(double z, std::size_t n, double theta, const SignalVector& mu);

/// Global minimiser of the theta = 1 potential, found by bisection of f' on
/// (0, 1]. The residual is f'(root) / n. Zero when mu carries no signal.
FixedPointResult solve_aux_mode(std::size_t n, const SignalVector& mu);

/// log of E_S exp(B sum_{i in S} x_i) for a uniform s-subset S, as a function
/// of k = #{i : x_i = +1}; entry k for k = 0..n.
std::vector<double> log_likelihood_ratio_profile(std::size_t n, std::size_t s, double strength);
std::vector<double> likelihood_ratio_profile(std::size_t n, std::size_t s, double strength);

}  // namespace isingdetect
