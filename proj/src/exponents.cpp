#include "unilab/exponents.hpp"

#include <cmath>

#include "unilab/error.hpp"

namespace unilab::exponents {

namespace {

// e^a - 1 - a without cancellation near zero.
double exp_excess(double a) {
  if (std::abs(a) < 1e-2) {
    const double a2 = a * a;
    return a2 * (0.5 + a / 6.0 + a2 / 24.0 + a2 * a / 120.0 + a2 * a2 / 720.0);
  }
  return std::expm1(a) - a;
}

bool is_quadratic_family(const StatisticKind& kind) {
  switch (kind.effective_tag()) {
    case StatisticKind::Tag::kHuber:
    case StatisticKind::Tag::kSquared:
    case StatisticKind::Tag::kCollisions:
      return true;
    default:
      return false;
  }
}

bool is_empty_bins_family(const StatisticKind& kind) {
  const auto tag = kind.effective_tag();
  return tag == StatisticKind::Tag::kEmptyBins || tag == StatisticKind::Tag::kTv;
}

void check_gamma(double gamma) {
  require(gamma > 0.0 && gamma < 1.0, ErrorCode::kOutOfDomain, "gamma must lie in (0, 1)");
}

double gaussian_factor(double delta_minus, double delta_plus) {
  return 0.5 * (std::sqrt(-std::log(delta_plus)) + std::sqrt(-std::log(delta_minus)));
}

}  // namespace

SizingRule sizing_rule_from_name(const std::string& name) {
  if (name == "huber") return SizingRule::kHuber;
  if (name == "squared") return SizingRule::kSquared;
  if (name == "collisions") return SizingRule::kCollisions;
  if (name == "tv" || name == "empty_bins") return SizingRule::kTv;
  if (name == "superlinear" || name == "superlinear_tv") return SizingRule::kSuperlinear;
  fail(ErrorCode::kInvalidParameter, "unknown sizing rule '" + name + "'");
}

double rate_uniform_sublinear(double tau) {
  require(tau > 0.0, ErrorCode::kOutOfDomain, "uniform-side rate needs tau > 0");
  return tau * tau / 4.0;
}

double rate_alternative_sublinear(double tau, double gamma) {
  check_gamma(gamma);
  const double g = gamma * (gamma - 1.0);
  require(tau >= 0.0 && tau < -1.0 / g, ErrorCode::kOutOfDomain, "tau must lie in [0, 1/(gamma(1-gamma)))");
  const double num = tau * g + 1.0;
  return num * num / (4.0 * g * g);
}

double rate_uniform_empty(double tau, double alpha) {
  require(tau > 0.0, ErrorCode::kOutOfDomain, "uniform-side rate needs tau > 0");
  require(alpha > 0.0, ErrorCode::kOutOfDomain, "alpha must be positive");
  // tau^2 alpha^2 e^{2 alpha} / (2 (e^alpha - 1 - alpha))
  return tau * tau * alpha * alpha * std::exp(2.0 * alpha) / (2.0 * exp_excess(alpha));
}

double rate_alternative_empty(double tau, double alpha, double gamma) {
  check_gamma(gamma);
  require(alpha > 0.0, ErrorCode::kOutOfDomain, "alpha must be positive");
  const double g = gamma * (gamma - 1.0);
  require(tau >= 0.0 && tau < std::exp(-alpha) / (-2.0 * g), ErrorCode::kOutOfDomain,
          "tau must lie in [0, e^-alpha / (2 gamma (1-gamma)))");
  const double num = 2.0 * tau * std::exp(alpha) * g + 1.0;
  return alpha * alpha * num * num / (8.0 * exp_excess(alpha) * g * g);
}

double error_exponent(const StatisticKind& kind, double alpha) {
  if (is_quadratic_family(kind)) return 1.0;
  if (is_empty_bins_family(kind)) {
    require(alpha > 0.0, ErrorCode::kOutOfDomain, "alpha must be positive");
    return alpha * alpha / (2.0 * exp_excess(alpha));
  }
  fail(ErrorCode::kOutOfDomain, "no closed-form exponent for " + kind.name());
}

ExponentReport exponent_report(const StatisticKind& kind, const RateQuery& query) {
  ExponentReport report;
  if (is_quadratic_family(kind)) {
    report.c_minus = rate_uniform_sublinear(query.tau);
    report.c_plus = rate_alternative_sublinear(query.tau, query.gamma);
  } else if (is_empty_bins_family(kind)) {
    report.c_minus = rate_uniform_empty(query.tau, query.alpha);
    report.c_plus = rate_alternative_empty(query.tau, query.alpha, query.gamma);
  } else {
    fail(ErrorCode::kOutOfDomain, "no closed-form rates for " + kind.name());
  }
  report.c = std::min(report.c_plus, report.c_minus);
  report.constant = report.c > 0.0 ? 1.0 / std::sqrt(report.c) : INFINITY;
  return report;
}

double tv_sample_constant(double alpha) {
  require(alpha > 0.0, ErrorCode::kOutOfDomain, "alpha must be positive");
  return std::sqrt(2.0 * exp_excess(alpha) / (alpha * alpha));
}

std::int64_t sample_size(std::int64_t m, double epsilon, double delta_minus, double delta_plus, SizingRule rule) {
  require(m >= 1, ErrorCode::kInvalidParameter, "m must be positive");
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidParameter, "epsilon must lie in (0, 1)");
  require(delta_minus > 0.0 && delta_minus < 1.0 && delta_plus > 0.0 && delta_plus < 1.0,
          ErrorCode::kInvalidParameter, "error probabilities must lie in (0, 1)");
  const double md = static_cast<double>(m);
  const double eps2 = epsilon * epsilon;
  const double n_quad = std::sqrt(md) * gaussian_factor(delta_minus, delta_plus) / eps2;

  switch (rule) {
    case SizingRule::kHuber:
    case SizingRule::kSquared:
    case SizingRule::kCollisions:
      return static_cast<std::int64_t>(std::ceil(n_quad));
    case SizingRule::kSuperlinear: {
      const double delta = std::max(delta_minus, delta_plus);
      return static_cast<std::int64_t>(std::ceil(2.0 * -std::log(delta) / eps2));
    }
    case SizingRule::kTv: {
      // n = C1(n/m) * n_quad, solved by damped fixed-point iteration.
      double n = n_quad;
      bool converged = false;
      for (int iter = 0; iter < 200; ++iter) {
        if (n > 50.0 * md) break;
        const double next = 0.5 * (n + tv_sample_constant(n / md) * n_quad);
        const double change = std::abs(next - n) / next;
        n = next;
        if (change < 1e-6) {
          converged = true;
          break;
        }
      }
      require(n <= md, ErrorCode::kOutOfValidity, "TV sample size exceeds m; the TV analysis holds only for n <= m");
      require(converged, ErrorCode::kOutOfValidity, "TV sample-size iteration did not converge");
      return static_cast<std::int64_t>(std::ceil(n));
    }
  }
  fail(ErrorCode::kInvalidParameter, "unknown sizing rule");
}

double gaussian_delta(double nvar) {
  require(nvar > 0.0, ErrorCode::kOutOfDomain, "normalized variance must be positive");
  return std::exp(-1.0 / (8.0 * nvar));
}

double nvar_closed_form(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon) {
  require(n >= 1 && m >= 1 && epsilon > 0.0, ErrorCode::kOutOfDomain, "closed form needs n, m >= 1 and eps > 0");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double e4 = epsilon * epsilon * epsilon * epsilon;
  const double base = md / (nd * nd * e4);
  if (is_quadratic_family(kind)) return base / 8.0;
  if (is_empty_bins_family(kind)) {
    const double a = nd / md;
    return exp_excess(a) / (4.0 * a * a) * base;
  }
  fail(ErrorCode::kOutOfDomain, "no closed-form normalized variance for " + kind.name());
}

RegimeReport regime(std::int64_t n, std::int64_t m, double epsilon, double delta) {
  require(n >= 1 && m >= 1 && epsilon > 0.0 && delta > 0.0, ErrorCode::kInvalidParameter,
          "regime needs positive parameters");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double ratio = nd / md;
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  constexpr double kMargin = 10.0;

  RegimeReport report;
  report.x_axis = nd * nd * epsilon * epsilon * epsilon * epsilon / md;
  if (report.x_axis < 1.0) {
    report.label = "impossible-leaning";
  } else if (ratio >= kMargin * inv_eps2) {
    report.label = "superlinear";
  } else if (ratio <= inv_eps2 / kMargin) {
    report.label = "sublinear";
  } else {
    report.label = "transitional";
  }
  const double log_n = std::log(nd);
  const double log_inv_delta = -std::log(delta);
  report.huber_theorem_applicable = ratio <= inv_eps2 / kMargin && md >= 30.0 * log_n;
  report.collisions_window = log_n <= log_inv_delta && log_inv_delta <= std::pow(nd, 1.0 / 13.0);
  report.paninski_fails = nd >= 48.0 * md * std::log(md);
  report.peebles_regime = epsilon >= std::pow(log_n, 0.25) / std::pow(nd, 0.125);
  return report;
}

double peebles_bound(std::int64_t n, std::int64_t m) {
  require(n >= 2 && m >= 2, ErrorCode::kInvalidParameter, "Peebles bound needs n, m >= 2");
  const double nd = static_cast<double>(n);
  return -(4.0 * nd / std::sqrt(static_cast<double>(m))) * std::log(nd);
}

}  // namespace unilab::exponents
