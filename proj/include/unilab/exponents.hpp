#pragma once

#include <cstdint>
#include <string>

#include "unilab/statistics.hpp"

namespace unilab::exponents {

// Closed-form large-deviation rates and sample-size calculators. Rates are
// per unit of n^2 eps^4 / m: a tester with exponent c fails with probability
// about exp(-c * n^2 eps^4 / m). All logarithms are natural.

struct RateQuery {
  double tau = 0.0;
  double gamma = 0.5;
  double alpha = 1.0;  // n / m
};

struct ExponentReport {
  double c_plus = 0.0;
  double c_minus = 0.0;
  double c = 0.0;         // min(c_plus, c_minus)
  double constant = 0.0;  // C1 (sublinear) or C2 (superlinear)
};

enum class SizingRule { kHuber, kSquared, kCollisions, kTv, kSuperlinear };

SizingRule sizing_rule_from_name(const std::string& name);

double rate_uniform_sublinear(double tau);
double rate_alternative_sublinear(double tau, double gamma);
double rate_uniform_empty(double tau, double alpha);
double rate_alternative_empty(double tau, double alpha, double gamma);

/// Balanced exponent at the default threshold.
double error_exponent(const StatisticKind& kind, double alpha);

/// Both rates at a given threshold (gamma = 1/2 for the alternative unless set).
ExponentReport exponent_report(const StatisticKind& kind, const RateQuery& query);

/// C1 for the TV / empty-bins tester: sqrt(2 (e^a - 1 - a) / a^2).
double tv_sample_constant(double alpha);

std::int64_t sample_size(std::int64_t m, double epsilon, double delta_minus, double delta_plus, SizingRule rule);

/// exp(-1 / (8 nvar)).
double gaussian_delta(double nvar);

/// Leading-order normalized variance; kind is Squared/Collisions/Huber
/// ("quadratic") or TV/EmptyBins.
double nvar_closed_form(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon);

struct RegimeReport {
  std::string label;  // superlinear | sublinear | transitional | impossible-leaning
  double x_axis = 0.0;  // n^2 eps^4 / m
  bool huber_theorem_applicable = false;
  bool collisions_window = false;
  bool paninski_fails = false;
  bool peebles_regime = false;
};

RegimeReport regime(std::int64_t n, std::int64_t m, double epsilon, double delta);

/// Natural-log exponent -(4n / sqrt(m)) ln n.
double peebles_bound(std::int64_t n, std::int64_t m);

}  // namespace unilab::exponents
