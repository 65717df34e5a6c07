#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>

#include "unilab/distmodel.hpp"
#include "unilab/statistics.hpp"

namespace unilab::mgf {

/// Circle lambda = lambda0 e^{i psi} sampled at `nodes` equispaced angles.
struct ContourSpec {
  double lambda0 = 0.0;
  int nodes = 0;

  /// lambda0 = n, nodes = max(256, 8n).
  static ContourSpec defaults(std::int64_t n);
};

/// Controls the Poisson series E[exp(theta f(Z))].
struct TermTruncation {
  double tail_tol = 1e-12;
  // Keep only Z <= max_count. Exact for n-sample expectations when
  // max_count >= n, since no bin can hold more than n samples.
  std::optional<std::int64_t> max_count;
  // Keep only Z with f(Z) <= phi_bound (the conditioned MGF).
  std::optional<double> phi_bound;
};

/// E[exp(theta_eff * f(Z))] for Z ~ Poisson(lam_nu), with deviation kinds
/// evaluated at Z - center.
double poisson_term_mgf(const StatisticKind& kind, double theta_eff, double lam_nu, double center,
                        const TermTruncation& trunc = {});

/// E[exp(theta * S~)] when the sample size is Poisson(lambda).
double poissonized_mgf(const StatisticKind& kind, double theta, const ProbabilityVector& p, std::int64_t n,
                       std::int64_t m, double epsilon, double lambda, const TermTruncation& trunc = {});

/// Maps complex lambda to log of the Poissonized expectation F(lambda).
using LogTermProduct = std::function<std::complex<double>(std::complex<double>)>;

/// Exact n-sample expectation n! [lambda^n] e^lambda F(lambda) by the
/// trapezoid rule on a circle. Raises quadrature-failure when halving the
/// node count moves the result by more than 1e-6 relative.
double depoissonize(const LogTermProduct& log_terms, std::int64_t n, const ContourSpec& spec);

/// Same as depoissonize, also returning the coarse (half-node) estimate.
struct ContourResult {
  double value = 0.0;
  double coarse = 0.0;
};
ContourResult depoissonize_detailed(const LogTermProduct& log_terms, std::int64_t n, const ContourSpec& spec);

/// log of prod_j E[exp(theta_eff f(Z_j))] with Z_j ~ Poisson(lambda p_j),
/// each series cut at Z <= max_count, for complex lambda.
LogTermProduct separable_log_terms(const StatisticKind& kind, double theta_eff, const ProbabilityVector& p,
                                   double center, std::int64_t max_count);

/// E_n[exp(theta * S~)] through the contour integral.
double depoissonized_mgf(const StatisticKind& kind, double theta, const ProbabilityVector& p, std::int64_t n,
                         std::int64_t m, double epsilon, std::optional<ContourSpec> spec = std::nullopt);

enum class LimitDistribution { kUniform, kFlat };

/// (m / (n^2 eps^4)) ln E[exp((n^2 eps^4 / m) theta S~)]; tends to theta^2
/// under uniform and theta^2 + theta/(gamma(1-gamma)) under flat(gamma).
double limiting_logmgf_estimate(const StatisticKind& kind, LimitDistribution dist, double gamma, double theta,
                                std::int64_t n, std::int64_t m, double epsilon);

}  // namespace unilab::mgf
