#include "unilab/distmodel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "unilab/error.hpp"

namespace unilab {

namespace {

constexpr double kSumTolerance = 1e-12;

std::vector<double> sorted_descending(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  require(!probs_.empty(), ErrorCode::kInvalidParameter, "probability vector is empty");
  double total = 0.0;
  for (double v : probs_) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidParameter,
            "probability entries must be finite and nonnegative");
    total += v;
  }
  require(std::abs(total - 1.0) <= kSumTolerance, ErrorCode::kInvalidParameter,
          "probabilities must sum to 1");
}

double FlatFamily::heavy_value() const {
  return 1.0 / static_cast<double>(m) + epsilon / static_cast<double>(heavy);
}

double FlatFamily::light_value() const {
  return 1.0 / static_cast<double>(m) - epsilon / static_cast<double>(m - heavy);
}

ProbabilityVector FlatFamily::realize() const {
  std::vector<double> probs(static_cast<std::size_t>(m), light_value());
  std::fill_n(probs.begin(), heavy, heavy_value());
  // Light bins can round to -0 or a few ulps below zero at the boundary.
  for (double& v : probs) v = std::max(v, 0.0);
  return ProbabilityVector(std::move(probs));
}

Histogram::Histogram(std::vector<std::int64_t> c) : counts(std::move(c)) {
  n = 0;
  for (auto k : counts) {
    require(k >= 0, ErrorCode::kInvalidParameter, "histogram counts must be nonnegative");
    n += k;
  }
}

ProbabilityVector uniform(std::int64_t m) {
  require(m >= 1, ErrorCode::kInvalidParameter, "uniform needs m >= 1");
  return ProbabilityVector(std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

FlatFamily flat_alternative(std::int64_t m, double epsilon, double gamma) {
  require(m >= 2, ErrorCode::kInvalidParameter, "flat alternative needs m >= 2");
  require(gamma > 0.0 && gamma < 1.0, ErrorCode::kInvalidParameter, "gamma must lie in (0, 1)");
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidParameter, "epsilon must lie in (0, 1)");
  const auto heavy = static_cast<std::int64_t>(std::llround(gamma * static_cast<double>(m)));
  require(heavy >= 1 && heavy <= m - 1, ErrorCode::kInvalidParameter,
          "round(gamma*m) must lie in [1, m-1]");
  FlatFamily family{m, epsilon, gamma, heavy};
  // Light mass 1/m - eps/(m-l) >= 0, i.e. eps <= (m-l)/m.
  require(epsilon * static_cast<double>(m) <= static_cast<double>(m - heavy) * (1.0 + 1e-12),
          ErrorCode::kInvalidParameter, "epsilon too large for gamma: light bins would be negative");
  return family;
}

double tv_to_uniform(const ProbabilityVector& p) {
  const double base = 1.0 / static_cast<double>(p.size());
  double tv = 0.0;
  for (double v : p.probs()) {
    if (v > base) tv += v - base;
  }
  return tv;
}

ProbabilityVector flatten(const ProbabilityVector& p, double gamma) {
  require(gamma > 0.0 && gamma < 0.5, ErrorCode::kInvalidParameter, "gamma must lie in (0, 1/2)");
  const auto m = static_cast<std::int64_t>(p.size());
  const double md = static_cast<double>(m);
  const auto lower = static_cast<std::int64_t>(std::ceil(gamma * md - 1e-9));
  const auto upper = static_cast<std::int64_t>(std::floor((1.0 - gamma) * md + 1e-9));
  require(lower <= upper && lower >= 1 && upper <= m - 1, ErrorCode::kInvalidParameter,
          "no heavy-set size in [gamma*m, (1-gamma)*m] for this m");

  // Indices ordered by decreasing probability; the heavy set is a prefix.
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

  const double base = 1.0 / md;
  const auto above = static_cast<std::int64_t>(
      std::count_if(p.probs().begin(), p.probs().end(), [&](double v) { return v > base; }));
  const std::int64_t heavy = std::clamp(above, lower, upper);

  double heavy_mass = 0.0;
  double light_mass = 0.0;
  for (std::int64_t r = 0; r < m; ++r) {
    (r < heavy ? heavy_mass : light_mass) += p[order[static_cast<std::size_t>(r)]];
  }
  const double heavy_value = heavy_mass / static_cast<double>(heavy);
  const double light_value = light_mass / static_cast<double>(m - heavy);

  std::vector<double> out(p.size());
  for (std::int64_t r = 0; r < m; ++r) {
    out[order[static_cast<std::size_t>(r)]] = r < heavy ? heavy_value : light_value;
  }
  return ProbabilityVector(std::move(out));
}

bool majorizes(const ProbabilityVector& p, const ProbabilityVector& q) {
  require(p.size() == q.size(), ErrorCode::kInvalidParameter, "majorization needs equal lengths");
  const auto ps = sorted_descending(p.probs());
  const auto qs = sorted_descending(q.probs());
  double prefix_p = 0.0;
  double prefix_q = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    prefix_p += ps[i];
    prefix_q += qs[i];
    if (prefix_p < prefix_q - kSumTolerance) return false;
  }
  return true;
}

HistogramSampler::HistogramSampler(const ProbabilityVector& p) : conditional_(p.size()) {
  // conditional_[j] = p_j / sum_{i >= j} p_i, with suffix sums accumulated
  // from the back so that the tail mass is not a difference of near-equal
  // numbers.
  double suffix = 0.0;
  for (std::size_t j = p.size(); j-- > 0;) {
    suffix += p[j];
    conditional_[j] = suffix > 0.0 ? std::min(1.0, p[j] / suffix) : 0.0;
  }
}

void HistogramSampler::sample(std::int64_t n, SplitMix64& rng, std::vector<std::int64_t>& out) const {
  require(n >= 0, ErrorCode::kInvalidParameter, "sample count must be nonnegative");
  out.assign(conditional_.size(), 0);
  std::int64_t remaining = n;
  const std::size_t last = conditional_.size() - 1;
  for (std::size_t j = 0; j < last && remaining > 0; ++j) {
    const std::int64_t k = sample_binomial(rng, remaining, conditional_[j]);
    out[j] = k;
    remaining -= k;
  }
  out[last] += remaining;
}

Histogram sample_histogram(const ProbabilityVector& p, std::int64_t n, std::uint64_t seed) {
  HistogramSampler sampler(p);
  SplitMix64 rng(seed);
  std::vector<std::int64_t> counts;
  sampler.sample(n, rng, counts);
  return Histogram(std::move(counts));
}

}  // namespace unilab
