#include "unilab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unilab/error.hpp"

namespace unilab::oracle {

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Recursively fills counts[j..] with every split of `remaining`.
void visit_compositions(std::vector<std::int64_t>& counts, std::size_t j, std::int64_t remaining,
                        const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  if (j + 1 == counts.size()) {
    counts[j] = remaining;
    visit(counts);
    return;
  }
  for (std::int64_t k = remaining; k >= 0; --k) {
    counts[j] = k;
    visit_compositions(counts, j + 1, remaining - k, visit);
  }
}

}  // namespace

double composition_count(std::int64_t n, std::int64_t m) {
  require(n >= 0 && m >= 1, ErrorCode::kInvalidParameter, "compositions need n >= 0, m >= 1");
  return std::round(std::exp(log_choose(n + m - 1, m - 1)));
}

double log_histogram_pmf(const ProbabilityVector& p, const Histogram& hist) {
  require(hist.bins() == p.size(), ErrorCode::kInvalidParameter, "histogram and distribution differ in length");
  double logp = std::lgamma(static_cast<double>(hist.n) + 1.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto y = hist.counts[j];
    if (y == 0) continue;
    if (p[j] == 0.0) return -std::numeric_limits<double>::infinity();
    logp += static_cast<double>(y) * std::log(p[j]) - std::lgamma(static_cast<double>(y) + 1.0);
  }
  return logp;
}

double histogram_pmf(const ProbabilityVector& p, const Histogram& hist) {
  return std::exp(log_histogram_pmf(p, hist));
}

void for_each_histogram(const ProbabilityVector& p, std::int64_t n,
                        const std::function<void(const Histogram&, double)>& visit) {
  require(n >= 0, ErrorCode::kInvalidParameter, "n must be nonnegative");
  const auto m = static_cast<std::int64_t>(p.size());
  if (composition_count(n, m) > kMaxCompositions) {
    fail(ErrorCode::kTooLarge, "enumeration of (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                                   ") exceeds 1e7 compositions");
  }
  Histogram hist;
  hist.n = n;
  std::vector<std::int64_t> counts(p.size());
  visit_compositions(counts, 0, n, [&](const std::vector<std::int64_t>& c) {
    hist.counts = c;
    visit(hist, histogram_pmf(p, hist));
  });
}

std::vector<WeightedOutcome> enumerate_histograms(const ProbabilityVector& p, std::int64_t n) {
  std::vector<WeightedOutcome> out;
  for_each_histogram(p, n, [&](const Histogram& h, double prob) { out.push_back({h, prob}); });
  return out;
}

ErrorRates exact_error_rates(const TestRule& rule, const ProbabilityVector& p, const ProbabilityVector& q) {
  const CompiledRule compiled(rule);
  const std::int64_t n = std::visit([](const auto& r) { return r.n; }, rule);
  ErrorRates rates;
  for_each_histogram(p, n, [&](const Histogram& h, double prob) {
    if (compiled.decide(h.counts) == Decision::kNonUniform) rates.delta_minus += prob;
  });
  for_each_histogram(q, n, [&](const Histogram& h, double prob) {
    if (compiled.decide(h.counts) == Decision::kUniform) rates.delta_plus += prob;
  });
  return rates;
}

double exact_expectation(const StatisticKind& kind, const ProbabilityVector& p, std::int64_t n,
                         const std::function<double(double)>& g) {
  const auto m = static_cast<std::int64_t>(p.size());
  const auto table = statistic_table(kind, n, m);
  double total = 0.0;
  for_each_histogram(p, n, [&](const Histogram& h, double prob) {
    double s = 0.0;
    for (auto y : h.counts) s += table[static_cast<std::size_t>(y)];
    total += prob * g(s);
  });
  return total;
}

double exact_mgf(const StatisticKind& kind, const ProbabilityVector& p, std::int64_t n, std::int64_t m,
                 double epsilon, double theta) {
  require(p.size() == static_cast<std::size_t>(m), ErrorCode::kInvalidParameter, "distribution length differs from m");
  const auto rescale = rescaling(kind, n, m, epsilon);
  return exact_expectation(kind, p, n, [&](double s) { return std::exp(theta * rescale.apply(s)); });
}

double exact_binomial_tail(std::int64_t n, double p, std::int64_t k) {
  require(n >= 0 && k >= 0 && k <= n + 1, ErrorCode::kInvalidParameter, "binomial tail needs 0 <= k <= n+1");
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidParameter, "binomial p must lie in [0, 1]");
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n - k + 1));
  for (std::int64_t i = k; i <= n; ++i) {
    logs.push_back(log_choose(n, i) + static_cast<double>(i) * lp + static_cast<double>(n - i) * lq);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  return std::min(1.0, std::exp(top) * sum);
}

}  // namespace unilab::oracle
