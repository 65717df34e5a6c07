#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "unilab/distmodel.hpp"
#include "unilab/statistics.hpp"

namespace unilab::oracle {

// Brute-force ground truth for small (n, m). Everything here enumerates all
// compositions of n into m parts.

inline constexpr double kMaxCompositions = 1e7;

struct WeightedOutcome {
  Histogram hist;
  double prob = 0.0;
};

struct ErrorRates {
  double delta_minus = 0.0;  // Pr_p[reject]
  double delta_plus = 0.0;   // Pr_q[accept]
};

/// C(n+m-1, m-1) as a double.
double composition_count(std::int64_t n, std::int64_t m);

double log_histogram_pmf(const ProbabilityVector& p, const Histogram& hist);
double histogram_pmf(const ProbabilityVector& p, const Histogram& hist);

/// Calls `visit` for every composition of n into p.size() parts with its
/// multinomial probability. Throws too-large past kMaxCompositions.
void for_each_histogram(const ProbabilityVector& p, std::int64_t n,
                        const std::function<void(const Histogram&, double)>& visit);

std::vector<WeightedOutcome> enumerate_histograms(const ProbabilityVector& p, std::int64_t n);

ErrorRates exact_error_rates(const TestRule& rule, const ProbabilityVector& p, const ProbabilityVector& q);

/// Exact E[g(S)] for the raw statistic S under samples of size n from p.
double exact_expectation(const StatisticKind& kind, const ProbabilityVector& p, std::int64_t n,
                         const std::function<double(double)>& g);

/// E[exp(theta * S~)] with S~ the kind's rescaled statistic.
double exact_mgf(const StatisticKind& kind, const ProbabilityVector& p, std::int64_t n, std::int64_t m,
                 double epsilon, double theta);

/// Pr[X >= k] for X ~ Binomial(n, p).
double exact_binomial_tail(std::int64_t n, double p, std::int64_t k);

}  // namespace unilab::oracle
