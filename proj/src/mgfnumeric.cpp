#include "unilab/mgfnumeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "unilab/error.hpp"
#include "unilab/oracle.hpp"

namespace unilab::mgf {

namespace {

constexpr std::int64_t kSeriesHardCap = 1'000'000;
constexpr double kOracleCompositionLimit = 1e5;

double log_sum_exp(const std::vector<double>& logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  return top + std::log(sum);
}

bool grows_superlinearly(const StatisticKind& kind) {
  const auto tag = kind.effective_tag();
  return tag == StatisticKind::Tag::kSquared || tag == StatisticKind::Tag::kCollisions;
}

// Kinds whose f(y) is nondecreasing once y exceeds the center.
bool monotone_beyond_center(const StatisticKind& kind) {
  const auto tag = kind.effective_tag();
  return tag == StatisticKind::Tag::kSquared || tag == StatisticKind::Tag::kCollisions ||
         tag == StatisticKind::Tag::kHuber || tag == StatisticKind::Tag::kTv;
}

double log_poisson_term_mgf(const StatisticKind& kind, double theta_eff, double lam_nu, double center,
                            const TermTruncation& trunc) {
  require(lam_nu >= 0.0 && std::isfinite(lam_nu), ErrorCode::kInvalidParameter, "Poisson mean must be finite and >= 0");
  require(trunc.tail_tol > 0.0, ErrorCode::kInvalidParameter, "tail tolerance must be positive");
  if (theta_eff == 0.0 && !trunc.max_count && !trunc.phi_bound) return 0.0;
  if (lam_nu == 0.0) return theta_eff * term_value(kind, 0, center);

  const bool truncated = trunc.max_count.has_value() || trunc.phi_bound.has_value();
  if (kind.effective_tag() == StatisticKind::Tag::kEmptyBins && !truncated) {
    // e^{-lam nu} e^{theta} - e^{-lam nu} + 1
    return std::log1p(std::exp(-lam_nu) * std::expm1(theta_eff));
  }
  if (theta_eff > 0.0 && grows_superlinearly(kind) && !truncated) {
    fail(ErrorCode::kDivergentMgf, kind.name() + " term MGF diverges for theta > 0 without truncation");
  }

  const double log_lam = std::log(lam_nu);
  const double log_tol = std::log(trunc.tail_tol);
  std::vector<double> logs;
  double previous = -std::numeric_limits<double>::infinity();
  double running = -std::numeric_limits<double>::infinity();
  for (std::int64_t y = 0;; ++y) {
    if (trunc.max_count && y > *trunc.max_count) break;
    require(y < kSeriesHardCap, ErrorCode::kDivergentMgf, "Poisson series did not converge");
    const double yd = static_cast<double>(y);
    const double f = term_value(kind, y, center);
    const double log_pmf = -lam_nu + yd * log_lam - std::lgamma(yd + 1.0);
    if (trunc.phi_bound && f > *trunc.phi_bound) {
      if (yd > center && monotone_beyond_center(kind)) break;
      continue;
    }
    const double term = log_pmf + theta_eff * f;
    logs.push_back(term);
    running = running == -std::numeric_limits<double>::infinity()
                  ? term
                  : std::max(running, term) + std::log1p(std::exp(-std::abs(running - term)));
    if (yd > lam_nu) {
      // Poisson tail beyond y is at most pmf(y) / (1 - lam/(y+1)).
      const double tail = log_pmf - std::log1p(-lam_nu / (yd + 1.0));
      const bool decreasing = term < previous;
      if (tail < log_tol && decreasing && term < running + log_tol) break;
      if (tail < log_tol - 50.0 && !decreasing) {
        fail(ErrorCode::kDivergentMgf, "Poisson series terms still growing past the tail cutoff");
      }
    }
    previous = term;
  }
  return log_sum_exp(logs);
}

// Complex log of e^{-z} sum_{y <= cap} z^y / y! e^{a_y} for z = lambda nu.
std::complex<double> log_capped_series(std::complex<double> z, const std::vector<double>& weights) {
  const std::complex<double> log_z = std::log(z);
  std::vector<std::complex<double>> terms(weights.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < weights.size(); ++y) {
    terms[y] = weights[y] + static_cast<double>(y) * log_z;
    top = std::max(top, terms[y].real());
  }
  std::complex<double> sum = 0.0;
  for (const auto& t : terms) sum += std::exp(t - top);
  return -z + top + std::log(sum);
}

}  // namespace

ContourSpec ContourSpec::defaults(std::int64_t n) {
  const auto nodes = std::max<std::int64_t>(256, 8 * n);
  return {static_cast<double>(std::max<std::int64_t>(n, 1)), static_cast<int>(nodes + (nodes % 2))};
}

double poisson_term_mgf(const StatisticKind& kind, double theta_eff, double lam_nu, double center,
                        const TermTruncation& trunc) {
  return std::exp(log_poisson_term_mgf(kind, theta_eff, lam_nu, center, trunc));
}

double poissonized_mgf(const StatisticKind& kind, double theta, const ProbabilityVector& p, std::int64_t n,
                       std::int64_t m, double epsilon, double lambda, const TermTruncation& trunc) {
  require(p.size() == static_cast<std::size_t>(m), ErrorCode::kInvalidParameter, "distribution length differs from m");
  require(lambda > 0.0, ErrorCode::kInvalidParameter, "lambda must be positive");
  const auto rescale = rescaling(kind, n, m, epsilon);
  const double theta_eff = theta * rescale.scale;
  const double center = static_cast<double>(n) / static_cast<double>(m);
  double log_value = -theta_eff * rescale.center;
  std::map<double, std::int64_t> groups;
  for (double v : p.probs()) ++groups[v];
  for (const auto& [nu, count] : groups) {
    log_value += static_cast<double>(count) * log_poisson_term_mgf(kind, theta_eff, lambda * nu, center, trunc);
  }
  return std::exp(log_value);
}

LogTermProduct separable_log_terms(const StatisticKind& kind, double theta_eff, const ProbabilityVector& p,
                                   double center, std::int64_t max_count) {
  require(max_count >= 0, ErrorCode::kInvalidParameter, "max_count must be nonnegative");
  std::vector<double> weights(static_cast<std::size_t>(max_count + 1));
  for (std::int64_t y = 0; y <= max_count; ++y) {
    weights[static_cast<std::size_t>(y)] =
        theta_eff * term_value(kind, y, center) - std::lgamma(static_cast<double>(y) + 1.0);
  }
  std::map<double, std::int64_t> grouped;
  for (double v : p.probs()) ++grouped[v];
  std::vector<std::pair<double, double>> groups(grouped.begin(), grouped.end());
  const double at_zero = theta_eff * term_value(kind, 0, center);

  return [weights = std::move(weights), groups = std::move(groups), at_zero](std::complex<double> lambda) {
    std::complex<double> total = 0.0;
    for (const auto& [nu, count] : groups) {
      const auto term = nu == 0.0 ? std::complex<double>(at_zero) : log_capped_series(lambda * nu, weights);
      total += count * term;
    }
    return total;
  };
}

ContourResult depoissonize_detailed(const LogTermProduct& log_terms, std::int64_t n, const ContourSpec& spec) {
  require(n >= 1, ErrorCode::kInvalidParameter, "depoissonization needs n >= 1");
  require(spec.lambda0 > 0.0, ErrorCode::kInvalidParameter, "contour radius must be positive");
  require(spec.nodes >= 16 && spec.nodes % 2 == 0, ErrorCode::kInvalidParameter, "nodes must be even and >= 16");

  const std::int64_t fine = 2 * static_cast<std::int64_t>(spec.nodes);
  const double nd = static_cast<double>(n);
  const double prefix = std::lgamma(nd + 1.0) - nd * std::log(spec.lambda0);
  std::vector<std::complex<double>> exponents(static_cast<std::size_t>(fine));
  double top = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < fine; ++k) {
    const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(fine);
    const std::complex<double> lambda = std::polar(spec.lambda0, psi);
    const std::complex<double> z = prefix + lambda + log_terms(lambda) - std::complex<double>(0.0, nd * psi);
    exponents[static_cast<std::size_t>(k)] = z;
    top = std::max(top, z.real());
  }
  require(std::isfinite(top), ErrorCode::kQuadratureFailure, "contour integrand is not finite");

  // Compensated sums of the real part over all nodes and over even nodes
  // (the half grid). The imaginary part integrates to zero.
  auto accumulate = [&](std::int64_t stride) {
    double sum = 0.0;
    double carry = 0.0;
    std::int64_t count = 0;
    for (std::int64_t k = 0; k < fine; k += stride) {
      const double w = std::exp(exponents[static_cast<std::size_t>(k)] - top).real();
      const double y = w - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
      ++count;
    }
    const double mean = sum / static_cast<double>(count);
    return std::copysign(std::exp(top + std::log(std::abs(mean))), mean);
  };

  ContourResult result;
  result.value = accumulate(1);
  result.coarse = accumulate(2);
  return result;
}

double depoissonize(const LogTermProduct& log_terms, std::int64_t n, const ContourSpec& spec) {
  const auto result = depoissonize_detailed(log_terms, n, spec);
  const double scale = std::max(std::abs(result.value), std::numeric_limits<double>::min());
  if (std::abs(result.value - result.coarse) > 1e-6 * scale) {
    fail(ErrorCode::kQuadratureFailure, "contour integral not stable under node doubling");
  }
  return result.value;
}

double depoissonized_mgf(const StatisticKind& kind, double theta, const ProbabilityVector& p, std::int64_t n,
                         std::int64_t m, double epsilon, std::optional<ContourSpec> spec) {
  require(p.size() == static_cast<std::size_t>(m), ErrorCode::kInvalidParameter, "distribution length differs from m");
  const auto rescale = rescaling(kind, n, m, epsilon);
  const double theta_eff = theta * rescale.scale;
  const double center = static_cast<double>(n) / static_cast<double>(m);
  const auto terms = separable_log_terms(kind, theta_eff, p, center, n);
  const auto contour = spec.value_or(ContourSpec::defaults(n));
  // Fold the centering factor into the integrand so that it stays in log space.
  const double shift = -theta_eff * rescale.center;
  return depoissonize([&](std::complex<double> lambda) { return terms(lambda) + shift; }, n, contour);
}

double limiting_logmgf_estimate(const StatisticKind& kind, LimitDistribution dist, double gamma, double theta,
                                std::int64_t n, std::int64_t m, double epsilon) {
  const ProbabilityVector p =
      dist == LimitDistribution::kUniform ? uniform(m) : flat_alternative(m, epsilon, gamma).realize();
  const double nd = static_cast<double>(n);
  const double x = nd * nd * std::pow(epsilon, 4) / static_cast<double>(m);
  require(x > 0.0, ErrorCode::kInvalidParameter, "n^2 eps^4 / m must be positive");
  if (theta == 0.0) return 0.0;
  const double t = x * theta;
  const double value = oracle::composition_count(n, m) <= kOracleCompositionLimit
                           ? oracle::exact_mgf(kind, p, n, m, epsilon, t)
                           : depoissonized_mgf(kind, t, p, n, m, epsilon);
  return std::log(value) / x;
}

}  // namespace unilab::mgf
